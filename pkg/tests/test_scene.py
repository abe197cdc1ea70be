#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
场景解析与交集距离测试
"""

import json
import unittest

import numpy as np
import pytest

from setreg.core.exceptions import (
    InfeasiblePolyhedronError, NotInIntersectionError, PreconditionError, SceneParseError,
)
from setreg.core.geometry import Affine, Ball, GridSpec, Halfspace
from setreg.core.scene import load_scene, make_scene, parse_scene, scene_from_dict
from setreg.services.scenes import bundled_scene

AXIS = {"type": "affine", "p": [0, 0], "basis": [[1, 0]]}


def _doc(**changes):
    doc = {"dim": 2, "xbar": [0, 0], "sets": [AXIS, AXIS]}
    doc.update(changes)
    return doc


class TestParseScene(unittest.TestCase):
    """测试场景文件解析"""

    def test_two_copies_of_axis(self):
        """测试两条重合坐标轴"""
        scene = bundled_scene("identical_axes")
        self.assertEqual(scene.m, 2)
        self.assertEqual(scene.dim, 2)
        self.assertTrue(scene.is_convex)

    def test_reflex_wedge_sets(self):
        """测试全平面与两个半平面的并"""
        scene = bundled_scene("reflex_wedge")
        self.assertEqual(scene.sets[0].kind, "box")
        self.assertEqual(scene.sets[1].kind, "union")
        self.assertFalse(scene.is_convex)

    def test_xbar_outside_a_set(self):
        """测试 x̄ 不在集合中"""
        doc = _doc(sets=[AXIS, {"type": "ball", "c": [3, 0], "r": 1}])
        with self.assertRaises(NotInIntersectionError) as ctx:
            scene_from_dict(doc)
        self.assertEqual(ctx.exception.index, 2)

    def test_unknown_type(self):
        with self.assertRaises(SceneParseError):
            scene_from_dict(_doc(sets=[AXIS, {"type": "cylinder"}]))

    def test_missing_field(self):
        with self.assertRaises(SceneParseError):
            scene_from_dict({"dim": 2, "sets": [AXIS, AXIS]})

    def test_invalid_json(self):
        with self.assertRaises(SceneParseError):
            parse_scene("{not json")

    def test_infeasible_polyhedron_keeps_its_type(self):
        poly = {"type": "polyhedron", "rows": [{"a": [1, 0], "b": -1}, {"a": [-1, 0], "b": -1}]}
        with self.assertRaises(InfeasiblePolyhedronError):
            scene_from_dict(_doc(sets=[AXIS, poly]))

    def test_wrong_intersection_declaration(self):
        """测试声明的交集超出集合"""
        doc = _doc(intersection={"type": "ball", "c": [0, 0], "r": 1})
        with self.assertRaises(SceneParseError):
            scene_from_dict(doc)

    def test_metadata_kept(self):
        scene = scene_from_dict(_doc(description="两条轴"), name="axes")
        self.assertEqual(scene.metadata["description"], "两条轴")
        self.assertEqual(scene.name, "axes")

    def test_to_dict_reparses(self):
        scene = bundled_scene("halfplane_axis")
        again = scene_from_dict(json.loads(json.dumps(scene.to_dict())))
        np.testing.assert_allclose(again.residuals([[1.0, 1.0]]), scene.residuals([[1.0, 1.0]]))


def test_load_missing_file(tmp_path):
    with pytest.raises(SceneParseError) as info:
        load_scene(tmp_path / "nope.json")
    assert info.value.path.endswith("nope.json")


def test_load_scene_file(tmp_path):
    path = tmp_path / "axes.json"
    path.write_text(json.dumps(_doc()), encoding="utf-8")
    scene = load_scene(path)
    assert scene.name == "axes"


class TestSceneQuantities(unittest.TestCase):
    """测试残差、投影与交集距离"""

    def setUp(self):
        self.lines = make_scene([Affine([0, 0], [[1, 0]]), Affine([0, 0], [[0, 1]])], [0, 0])

    def test_residuals(self):
        res = self.lines.residuals([[3.0, 4.0]])
        np.testing.assert_allclose(res, [[4.0, 3.0]])
        np.testing.assert_allclose(self.lines.max_residual([[3.0, 4.0]]), [4.0])

    def test_projections_shape(self):
        self.assertEqual(self.lines.projections([[1.0, 2.0], [0.0, 0.0]]).shape, (2, 2, 2))

    def test_brute_intersection_distance(self):
        """测试无声明交集时的网格预言机"""
        grid = GridSpec(8.0, 41, 6)
        d, found = self.lines.intersection_distance([[3.0, 4.0]], grid)
        self.assertTrue(found[0])
        self.assertAlmostEqual(float(d[0]), 5.0, delta=grid.cell_diagonal(2))

    def test_declared_intersection_is_exact(self):
        scene = bundled_scene("orthogonal_lines")
        d, found = scene.intersection_distance([[3.0, 4.0]], GridSpec(1.0, 5))
        self.assertEqual(float(d[0]), 5.0)

    def test_translated_intersection_empty(self):
        """测试平移后交集为空"""
        scene = bundled_scene("identical_axes")
        offsets = np.array([[[0.0, -0.1], [0.0, 0.1]]])
        d, found = scene.translated_intersection_distance([[0.0, 0.0]], offsets,
                                                          GridSpec(1.0, 21, 4))
        self.assertFalse(found[0])
        self.assertTrue(np.isinf(d[0]))

    def test_scaled_scene_keeps_xbar(self):
        scene = bundled_scene("reflex_wedge").scaled(2.0)
        np.testing.assert_allclose(scene.xbar, [0, 0])
        self.assertAlmostEqual(scene.sets[1].distance([-2.0, 0.0]), 1.0)

    def test_needs_two_sets(self):
        with self.assertRaises(PreconditionError):
            make_scene([Halfspace([1, 0], 0)], [0, 0])

    def test_translated(self):
        moved = make_scene([Ball([0, 0], 1), Halfspace([1, 0], 0)], [0, 0]).translated([1, 1])
        np.testing.assert_allclose(moved.xbar, [1, 1])
