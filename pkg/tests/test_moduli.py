#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
正则性常数估计测试
"""

import math
import unittest

import numpy as np
import pytest

from setreg.core.exceptions import PreconditionError
from setreg.core.geometry import Affine, Halfspace
from setreg.core.moduli import (
    FLAG_VACUOUS, POINT_ESTIMATE, UPPER_BIASED, ModulusEstimate, RhoRow, classify,
    slope_zeta_hat, theta, theta_hat, theta_hat_rho_at, theta_rho, zeta, zeta_rho_delta,
)
from setreg.core.scene import make_scene
from setreg.services.scenes import bundled_scene

from conftest import FAST

INV_SQRT2 = 1 / math.sqrt(2)


class TestThetaRho(unittest.TestCase):
    """测试单个 ρ 上的覆盖半径"""

    def test_wedge_complement(self):
        """测试 θ_ρ = 2ρ"""
        value = theta_rho(bundled_scene("reflex_wedge"), 0.1, FAST)
        self.assertAlmostEqual(value, 0.2, delta=0.02)

    def test_parallel_lines_have_zero_radius(self):
        self.assertLess(theta_rho(bundled_scene("identical_axes"), 0.1, FAST), 1e-3)

    def test_rho_must_be_positive(self):
        with self.assertRaises(PreconditionError):
            theta_rho(bundled_scene("identical_axes"), 0.0, FAST)

    def test_shifted_base_point_outside_set(self):
        scene = bundled_scene("orthogonal_lines")
        with self.assertRaises(PreconditionError):
            theta_hat_rho_at(scene, [[0.0, 1.0], [0.0, 0.0]], 0.1, FAST)


class TestZetaRhoDelta(unittest.TestCase):
    """测试定义式 ζ_{ρ,δ}"""

    def test_rho_below_delta(self):
        scene = bundled_scene("orthogonal_lines")
        with self.assertRaises(PreconditionError):
            zeta_rho_delta(scene, 0.2, 0.2, FAST)

    def test_no_violation_is_infinite(self):
        """内部点附近没有违反包含关系的样本"""
        self.assertTrue(math.isinf(zeta_rho_delta(bundled_scene("interior"), 0.1, 0.2, FAST)))

    def test_orthogonal_lines(self):
        value = zeta_rho_delta(bundled_scene("orthogonal_lines"), 0.05, 0.1, FAST)
        self.assertAlmostEqual(value / 0.05, INV_SQRT2, delta=0.05)


class TestEstimates(unittest.TestCase):
    """测试完整的估计量"""

    def test_theta_wedge_complement(self):
        est = theta(bundled_scene("reflex_wedge"), FAST)
        self.assertEqual(est.kind, "theta")
        self.assertEqual(est.direction, UPPER_BIASED)
        self.assertGreaterEqual(est.value, 1.8)
        self.assertLessEqual(est.value, 2.1)
        self.assertIn("metric_form", est.cross_checks)
        self.assertEqual(len(est.per_rho), len(FAST.rho_schedule()))

    def test_theta_identical_axes(self):
        self.assertLess(theta(bundled_scene("identical_axes"), FAST).value, 0.05)

    def test_zeta_identical_sets_is_one(self):
        """测试两个相同集合的 ζ = 1"""
        est = zeta(bundled_scene("identical_axes"), FAST)
        self.assertAlmostEqual(est.value, 1.0, places=6)
        self.assertFalse(est.is_vacuous)

    def test_zeta_orthogonal_lines(self):
        est = zeta(bundled_scene("orthogonal_lines"), FAST)
        self.assertAlmostEqual(est.value, INV_SQRT2, delta=1e-3)
        self.assertIn("definitional", est.cross_checks)

    def test_zeta_interior_is_vacuous(self):
        """测试 x̄ 为内点时标记为空泛"""
        est = zeta(bundled_scene("interior"), FAST)
        self.assertEqual(est.value, 1.0)
        self.assertIn(FLAG_VACUOUS, est.flags)
        self.assertTrue(all(row.excluded == row.samples for row in est.per_rho))

    def test_theta_hat_bounds(self):
        est = theta_hat(bundled_scene("orthogonal_lines"), FAST)
        self.assertLessEqual(est.value, 1.0)
        self.assertAlmostEqual(est.value, INV_SQRT2, delta=0.05)

    def test_theta_hat_identical_axes(self):
        """测试平移后交集为空的样本计为比值 0 并记录在 empty 列"""
        est = theta_hat(bundled_scene("identical_axes"), FAST)
        self.assertLess(est.value, 0.05)
        self.assertTrue(all(row.empty > 0 for row in est.per_rho))
        self.assertTrue(all(row.ratio == 0.0 for row in est.per_rho))

    def test_theta_hat_transversal_lines_have_no_empty_samples(self):
        est = theta_hat(bundled_scene("lines_pi6"), FAST)
        self.assertTrue(all(row.empty == 0 for row in est.per_rho))
        self.assertGreater(est.value, 0.05)

    def test_slope_orthogonal_lines(self):
        est = slope_zeta_hat(bundled_scene("orthogonal_lines"), FAST)
        self.assertEqual(est.direction, POINT_ESTIMATE)
        self.assertAlmostEqual(est.value, INV_SQRT2, delta=0.1)

    def test_seed_reproducibility(self):
        """相同种子得到相同结果"""
        scene = bundled_scene("lines_pi6")
        a = zeta(scene, FAST).to_dict()
        b = zeta(scene, FAST).to_dict()
        self.assertEqual(a, b)

    def test_estimate_needs_rows(self):
        with self.assertRaises(PreconditionError):
            ModulusEstimate("zeta", 1.0, (0.5, 0.5, 0.1), FAST.ball_samples, [])


class TestClassification(unittest.TestCase):
    """测试正则性分类"""

    def test_identical_axes(self):
        result = classify(bundled_scene("identical_axes"), FAST)
        self.assertFalse(result.semiregular)
        self.assertTrue(result.subregular)
        self.assertFalse(result.uniformly_regular)
        self.assertEqual(set(result.to_dict()["estimates"]), {"theta", "zeta", "theta_hat"})

    def test_threshold_positive(self):
        with self.assertRaises(PreconditionError):
            classify(bundled_scene("identical_axes"), FAST, threshold=0.0)


def test_transversal_halfplanes_are_regular():
    scene = make_scene([Halfspace([0, 1], 0), Halfspace([1, 0], 0)], [0, 0])
    result = classify(scene, FAST)
    assert result.semiregular and result.subregular and result.uniformly_regular


@pytest.mark.parametrize("name", ["orthogonal_lines", "lines_pi6", "identical_axes"])
def test_uniform_below_semi_and_sub(name):
    scene = bundled_scene(name)
    th, z, th_hat = theta(scene, FAST).value, zeta(scene, FAST).value, theta_hat(scene, FAST).value
    assert th_hat <= min(th, z) + 0.05


def test_zeta_is_invariant_under_translation():
    scene = make_scene([Affine([0, 0], [[1, 0]]), Affine([0, 0], [[0, 1]])], [0, 0])
    moved = scene.translated(np.array([3.0, -2.0]))
    assert zeta(moved, FAST).value == pytest.approx(zeta(scene, FAST).value, abs=1e-4)


def test_row_dataclass():
    row = RhoRow(0.1, 0.5, 10, 2)
    assert row.samples - row.excluded == 8
    assert row.empty == 0
