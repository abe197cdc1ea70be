#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
几何原语测试
测试距离、投影、网格预言机与最小范数凸组合
"""

import math
import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setreg.core.exceptions import (
    DimensionMismatchError, InfeasiblePolyhedronError, PreconditionError,
)
from setreg.core.geometry import (
    Affine, Ball, Box, GridSpec, Halfspace, ParabolaEpi, Polyhedron, Translate, Union,
    brute_distance, distance, grid_nearest_member, membership, min_norm_weights, project,
)

SQRT3 = math.sqrt(3.0)


class TestPrimitives(unittest.TestCase):
    """测试各原语的精确距离与投影"""

    def test_halfspace_projection(self):
        """测试半空间投影"""
        h = Halfspace([0, 1], 0)
        np.testing.assert_allclose(project(h, [2, 3]), [2, 0])
        self.assertAlmostEqual(distance(h, [2, 3]), 3.0)
        self.assertEqual(distance(h, [2, -3]), 0.0)

    def test_affine_axis(self):
        """测试坐标轴投影"""
        axis = Affine([0, 0], [[1, 0]])
        np.testing.assert_allclose(project(axis, [3, 4]), [3, 0])
        self.assertAlmostEqual(distance(axis, [3, 4]), 4.0)

    def test_union_distance_is_minimum(self):
        """测试并集距离取最小值"""
        quadrants = Union([Halfspace([1, 0], 0), Halfspace([0, 1], 0)])
        self.assertAlmostEqual(distance(quadrants, [1, 1]), 1.0)

    def test_union_of_two_halfplanes(self):
        """测试两个半平面并集的距离"""
        omega2 = Union([Halfspace([-1, SQRT3], 0), Halfspace([-1, -SQRT3], 0)])
        self.assertAlmostEqual(distance(omega2, [-1, 0]), 0.5)

    def test_ball_and_box(self):
        """测试球与盒子投影"""
        ball = Ball([1, 0], 1)
        np.testing.assert_allclose(project(ball, [3, 0]), [2, 0])
        box = Box([-1, -1], [1, 1])
        np.testing.assert_allclose(project(box, [2, -3]), [1, -1])
        self.assertTrue(membership(box, [0.5, 0.5]))

    def test_infinite_box_is_whole_space(self):
        """测试无穷边界盒子表示全空间"""
        plane = Box([-np.inf, -np.inf], [np.inf, np.inf])
        self.assertEqual(distance(plane, [1e6, -1e6]), 0.0)

    def test_parabola_projection(self):
        """测试抛物线上境图投影"""
        epi = ParabolaEpi(1.0)
        np.testing.assert_allclose(project(epi, [0, -1]), [0, 0], atol=1e-12)
        self.assertAlmostEqual(distance(epi, [0, -1]), 1.0)
        self.assertEqual(distance(epi, [0, 1]), 0.0)

    def test_polyhedron_corner(self):
        """测试多面体角点投影"""
        square = Polyhedron([([1, 0], 1), ([0, 1], 1), ([-1, 0], 1), ([0, -1], 1)])
        np.testing.assert_allclose(project(square, [2, 2]), [1, 1], atol=1e-12)

    def test_translate(self):
        """测试平移"""
        moved = Translate(Ball([0, 0], 1), [3, 0])
        self.assertAlmostEqual(distance(moved, [0, 0]), 2.0)

    def test_batch_shapes(self):
        """测试批量输入形状"""
        h = Halfspace([1, 0], 0)
        d = distance(h, np.array([[1.0, 0.0], [-1.0, 0.0], [2.0, 5.0]]))
        np.testing.assert_allclose(d, [1.0, 0.0, 2.0])


class TestValidation(unittest.TestCase):
    """测试构造参数校验"""

    def test_zero_normal(self):
        with self.assertRaises(PreconditionError):
            Halfspace([0, 0], 1)

    def test_box_bounds(self):
        with self.assertRaises(PreconditionError):
            Box([1, 0], [0, 1])

    def test_dependent_basis(self):
        with self.assertRaises(PreconditionError):
            Affine([0, 0], [[1, 0], [2, 0]])

    def test_empty_polyhedron(self):
        """测试空多面体"""
        with self.assertRaises(InfeasiblePolyhedronError):
            Polyhedron([([1, 0], -1), ([-1, 0], -1)])

    def test_union_needs_two_children(self):
        with self.assertRaises(PreconditionError):
            Union([Ball([0, 0], 1)])

    def test_dimension_mismatch(self):
        """测试维度不匹配"""
        with self.assertRaises(DimensionMismatchError):
            distance(Ball([0, 0], 1), [1, 2, 3])

    def test_grid_spec(self):
        with self.assertRaises(PreconditionError):
            GridSpec(1.0, 2)
        with self.assertRaises(PreconditionError):
            GridSpec(0.0, 5)


class TestMinNormWeights(unittest.TestCase):
    """测试凸包最小范数点"""

    def test_single_vector(self):
        np.testing.assert_allclose(min_norm_weights(np.array([[1.0, 0.0]])), [1.0])

    def test_opposite_vectors_cancel(self):
        lam = min_norm_weights(np.array([[0.0, 1.0], [0.0, -1.0]]))
        np.testing.assert_allclose(lam, [0.5, 0.5])

    def test_orthogonal_pair(self):
        vecs = np.array([[1.0, 0.0], [0.0, 1.0]])
        point = min_norm_weights(vecs) @ vecs
        self.assertAlmostEqual(float(np.linalg.norm(point)), 1 / math.sqrt(2))

    def test_three_vectors_contain_origin(self):
        """测试三个向量的凸包含原点"""
        vecs = np.array([[1.0, 0.0], [-0.5, SQRT3 / 2], [-0.5, -SQRT3 / 2]])
        lam = min_norm_weights(vecs)
        self.assertAlmostEqual(float(lam.sum()), 1.0)
        self.assertLess(float(np.linalg.norm(lam @ vecs)), 1e-6)

    def test_empty(self):
        with self.assertRaises(PreconditionError):
            min_norm_weights(np.zeros((0, 2)))


# -- 随机化性质 ----------------------------------------------------------------------------

coords = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
points = st.tuples(coords, coords).map(np.array)


@st.composite
def convex_primitives(draw):
    kind = draw(st.sampled_from(["halfspace", "ball", "box", "affine", "parabola"]))
    angle = draw(st.floats(min_value=0.0, max_value=2 * math.pi))
    direction = [math.cos(angle), math.sin(angle)]
    if kind == "halfspace":
        return Halfspace(direction, draw(st.floats(-1, 1)))
    if kind == "ball":
        return Ball(draw(points), draw(st.floats(0.1, 1.5)))
    if kind == "box":
        lo = draw(points)
        return Box(lo, lo + draw(st.floats(0.1, 1.0)))
    if kind == "affine":
        return Affine(draw(points), [direction])
    return ParabolaEpi(draw(st.floats(0.3, 2.0)))


@settings(max_examples=60, deadline=None)
@given(convex_primitives(), points)
def test_projection_attains_distance(s, x):
    """投影点属于集合且距离等于精确距离"""
    p = s.project(x)
    assert s.distance(p) <= 1e-9
    assert float(np.linalg.norm(x - p)) - s.distance(x) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(convex_primitives(), points)
def test_projection_is_idempotent(s, x):
    p = s.project(x)
    np.testing.assert_allclose(s.project(p), p, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(convex_primitives(), points)
def test_brute_distance_within_one_cell(s, x):
    """网格预言机与精确距离相差不超过一个单元对角线"""
    d = s.distance(x)
    grid = GridSpec(max(1.25 * d, 0.25), 21, 4)
    brute = brute_distance(s, x, grid)
    assert brute.found
    assert abs(brute.value - d) <= grid.cell_diagonal(2)


def test_brute_distance_on_union_of_halfplanes():
    omega2 = Union([Halfspace([-1, SQRT3], 0), Halfspace([-1, -SQRT3], 0)])
    grid = GridSpec(1.0, 21, 4)
    brute = brute_distance(omega2, [-1, 0], grid)
    assert brute.value == pytest.approx(0.5, abs=grid.cell_diagonal(2))


def _band_residual(gap, slope=0.0):
    """max 距离: 直线 v = gap 与直线 v = slope·(u − 0.6) − gap"""
    def residual(samples, rows):
        u, v = samples[..., 0], samples[..., 1]
        other = np.abs(v - slope * (u - 0.6) + gap) / math.hypot(1.0, slope)
        return np.maximum(np.abs(v - gap), other)
    return residual


def test_grid_oracle_rejects_coarse_near_miss():
    """粗网格下容差接受、细网格下不相交的两条平行线"""
    residual = _band_residual(0.05)
    coarse_values, coarse_found = grid_nearest_member(np.zeros((1, 2)), residual,
                                                      GridSpec(1.0, 21, 1))
    assert coarse_found[0]
    values, found = grid_nearest_member(np.zeros((1, 2)), residual, GridSpec(1.0, 21, 4))
    assert not found[0]
    assert np.isinf(values[0])


def test_grid_oracle_keeps_transversal_member():
    """相交直线的交点在细网格下仍被找到"""
    values, found = grid_nearest_member(np.zeros((1, 2)), _band_residual(0.0, slope=1.0),
                                        GridSpec(1.0, 21, 6))
    assert found[0]
    assert values[0] == pytest.approx(0.6, abs=0.02)
