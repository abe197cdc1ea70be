#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
集值映射与桥接关系测试
"""

import json
import unittest

import numpy as np
import pytest

from setreg.core.exceptions import PreconditionError, SceneParseError
from setreg.core.geometry import Affine, GridSpec
from setreg.core.mappings import (
    SvMapping, graph_scene, graph_scene_moduli, load_mapping, mapping_from_dict,
    product_mapping, reg_modulus, semireg_modulus, subreg_modulus, verify_graph_bridge,
    verify_product_bridge,
)
from setreg.services.scenes import bundled_mapping, bundled_scene

from conftest import FAST

GRID = GridSpec(2.0, 21, 4)


class TestSvMapping(unittest.TestCase):
    """测试映射的构造与切片距离"""

    def test_basepoint_off_graph(self):
        with self.assertRaises(PreconditionError):
            SvMapping(1, 1, Affine([0, 0], [[1, 2]]), [1.0], [0.0])

    def test_dimension_mismatch(self):
        with self.assertRaises(PreconditionError):
            SvMapping(2, 1, Affine([0, 0], [[1, 2]]), [0.0, 0.0], [0.0])

    def test_slices_of_affine_graph(self):
        """测试 F(x) = 2x 的像与逆像距离"""
        f = bundled_mapping("double")
        value, found = f.image_distance([[1.0]], [[0.0]], GRID)
        self.assertAlmostEqual(float(value[0]), 2.0)
        value, found = f.inverse_distance([[1.0]], [[0.0]], GRID)
        self.assertAlmostEqual(float(value[0]), 0.5)
        self.assertTrue(f.contains(np.array([1.0]), np.array([2.0])))

    def test_perturbations_within_rho(self):
        dy = bundled_mapping("identity").y_perturbations(0.1, FAST)
        self.assertTrue(np.all(np.linalg.norm(dy, axis=1) <= 0.1 + 1e-12))
        self.assertTrue(np.all(np.linalg.norm(dy, axis=1) > 0))

    def test_missing_key(self):
        with self.assertRaises(SceneParseError):
            mapping_from_dict({"dim_x": 1, "dim_y": 1, "xbar": [0], "ybar": [0]})

    def test_graph_off_basepoint_is_parse_error(self):
        doc = {"dim_x": 1, "dim_y": 1, "graph": {"type": "affine", "p": [0, 1],
                                                 "basis": [[1, 1]]},
               "xbar": [0], "ybar": [0]}
        with self.assertRaises(SceneParseError):
            mapping_from_dict(doc)


def test_load_mapping(tmp_path):
    path = tmp_path / "half.json"
    path.write_text(json.dumps({"dim_x": 1, "dim_y": 1,
                                "graph": {"type": "affine", "p": [0, 0], "basis": [[2, 1]]},
                                "xbar": [0], "ybar": [0]}), encoding="utf-8")
    f = load_mapping(path)
    assert f.name == "half"
    with pytest.raises(SceneParseError):
        load_mapping(tmp_path / "missing.json")


class TestProductMapping(unittest.TestCase):
    """测试乘积映射 F(x) = Π(Ωᵢ − x)"""

    def setUp(self):
        self.scene = bundled_scene("orthogonal_lines")
        self.f = product_mapping(self.scene)

    def test_dimensions(self):
        self.assertEqual(self.f.dim_x, 2)
        self.assertEqual(self.f.dim_y, 4)
        self.assertEqual(self.f.y_blocks, 2)
        self.assertEqual(self.f.name, "F[orthogonal_lines]")

    def test_image_distance_is_max_residual(self):
        x = np.array([[3.0, 4.0]])
        value, _ = self.f.image_distance(x, np.zeros((1, 4)), GRID)
        self.assertAlmostEqual(float(value[0]), 4.0)

    def test_inverse_is_translated_intersection(self):
        y = np.array([[0.0, 0.5, 0.5, 0.0]])
        value, found = self.f.inverse_distance(y, np.zeros((1, 2)), GRID)
        self.assertTrue(found[0])
        self.assertAlmostEqual(float(value[0]), np.hypot(0.5, 0.5), delta=GRID.cell_diagonal(2))

    def test_block_norm(self):
        self.assertAlmostEqual(float(self.f.y_norm([[3.0, 4.0, 0.0, 1.0]])[0]), 5.0)


class TestModuli(unittest.TestCase):
    """测试映射的正则模"""

    def test_double(self):
        f = bundled_mapping("double")
        for estimator in (semireg_modulus, subreg_modulus, reg_modulus):
            with self.subTest(estimator=estimator.__name__):
                self.assertAlmostEqual(estimator(f, FAST).value, 2.0, delta=1e-6)

    def test_graph_scene_of_identity(self):
        scene = graph_scene(bundled_mapping("identity"))
        self.assertEqual(scene.m, 2)
        self.assertIsNotNone(scene.intersection)
        self.assertAlmostEqual(scene.intersection.distance([1.0, 0.0]), 1.0)

    def test_graph_constants(self):
        """测试图场景在最大范数下的常数"""
        identity = graph_scene_moduli(bundled_mapping("identity"), FAST)
        double = graph_scene_moduli(bundled_mapping("double"), FAST)
        self.assertEqual(set(identity), {"theta", "zeta", "theta_hat"})
        self.assertAlmostEqual(identity["zeta"].value, 1 / 3, delta=0.05)
        self.assertAlmostEqual(double["zeta"].value, 0.5, delta=0.05)


class TestBridges(unittest.TestCase):
    """测试集合常数与映射模之间的关系"""

    def test_product_bridge(self):
        report = verify_product_bridge(bundled_scene("orthogonal_lines"), FAST)
        self.assertTrue(report.passed, report.to_dict()["inequalities"])
        self.assertEqual(set(report.rhs), {"semireg", "subreg", "reg"})
        self.assertEqual(report.direction, "sets_to_mapping")

    def test_graph_bridge(self):
        report = verify_graph_bridge(bundled_mapping("double"), FAST)
        self.assertTrue(report.passed, report.to_dict()["inequalities"])
        self.assertTrue(all(c.bounds is not None for c in report.inequalities[::2]))


if __name__ == '__main__':
    unittest.main()
