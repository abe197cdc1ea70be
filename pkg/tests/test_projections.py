#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
循环投影与收敛率测试
"""

import math
import unittest

import numpy as np

from setreg.core.config import EstimatorParams
from setreg.core.exceptions import PreconditionError
from setreg.core.projections import cyclic_project, fit_rate, rate_vs_zeta
from setreg.services.scenes import bundled_scene

from conftest import FAST


class TestFitRate(unittest.TestCase):
    """测试对数线性拟合"""

    def test_geometric_sequence(self):
        residuals = 0.9 ** np.arange(40)
        fit = fit_rate(residuals, m=2)
        self.assertAlmostEqual(fit.q, 0.81, places=6)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=6)
        self.assertFalse(fit.sublinear)
        self.assertEqual(fit.tail_window, 20)

    def test_floor_reached(self):
        """残差降到浮点下限时视为已收敛"""
        residuals = np.array([1.0, 0.1, 1e-14, 0.0, 0.0, 0.0])
        fit = fit_rate(residuals, m=2)
        self.assertTrue(fit.converged)
        self.assertEqual(fit.q, 0.0)

    def test_harmonic_is_sublinear(self):
        residuals = 1.0 / np.arange(1, 1000)
        self.assertTrue(fit_rate(residuals, m=2).sublinear)


class TestCyclicProject(unittest.TestCase):
    """测试循环投影算法"""

    def test_lines_at_thirty_degrees(self):
        """每轮收敛因子为 cos²(π/6)"""
        traj = cyclic_project(bundled_scene("lines_pi6"), [1.0, 0.5], 60, FAST)
        self.assertEqual(traj.iters, 60)
        self.assertAlmostEqual(traj.rate_fit.q, math.cos(math.pi / 6) ** 2, delta=0.01)
        self.assertEqual(len(traj.rows()), 61)
        self.assertEqual(len(traj.rows()[0]), 4)

    def test_orthogonal_lines_converge_in_two_steps(self):
        traj = cyclic_project(bundled_scene("orthogonal_lines"), [3.0, 4.0], 4, FAST)
        np.testing.assert_allclose(traj.points[2], [0.0, 0.0], atol=1e-12)
        self.assertTrue(traj.rate_fit.converged)

    def test_parabola_corner_is_sublinear(self):
        traj = cyclic_project(bundled_scene("parabola_corner"), [0.5, 0.1], 400, FAST)
        self.assertTrue(traj.rate_fit.sublinear)

    def test_preconditions(self):
        scene = bundled_scene("lines_pi6")
        with self.assertRaises(PreconditionError):
            cyclic_project(scene, [1.0, 0.5], 0, FAST)
        with self.assertRaises(PreconditionError):
            cyclic_project(scene, [1.0, 0.5, 0.0], 10, FAST)

    def test_default_params(self):
        traj = cyclic_project(bundled_scene("orthogonal_lines"), [1.0, 1.0], 2)
        self.assertEqual(traj.points.shape, (3, 2))


class TestRateVsZeta(unittest.TestCase):
    """测试收敛率与 ζ 的关系"""

    def test_convex_lines(self):
        report = rate_vs_zeta(bundled_scene("lines_pi6"), FAST, [[1.0, 0.5], [0.2, -0.3]], 60)
        self.assertTrue(report.holds)
        self.assertAlmostEqual(report.bound, 1 - 0.1 * report.zeta.value ** 2)
        self.assertEqual(len(report.to_dict()["trajectories"]), 2)

    def test_nonconvex_scene_makes_no_claim(self):
        report = rate_vs_zeta(bundled_scene("reflex_wedge"), FAST, [[0.1, 0.1]], 10)
        self.assertIsNone(report.holds)
        self.assertIsNone(report.bound)

    def test_needs_a_start(self):
        with self.assertRaises(PreconditionError):
            rate_vs_zeta(bundled_scene("lines_pi6"), FAST, [], 10)

    def test_workers_do_not_change_results(self):
        scene = bundled_scene("lines_pi6")
        starts = [[1.0, 0.5], [0.3, 0.9]]
        one = rate_vs_zeta(scene, FAST, starts, 30).to_dict()
        two = rate_vs_zeta(scene, FAST.with_overrides(workers=2), starts, 30).to_dict()
        self.assertEqual(one, two)


def test_rate_fit_to_dict_keys():
    fit = fit_rate(0.5 ** np.arange(10), m=2)
    assert set(fit.to_dict()) == {"q", "r_squared", "tail_window", "sublinear", "converged"}


def test_default_schedule_params_are_valid():
    assert EstimatorParams().rho_schedule()[-1] >= 1e-3 * (1 - 1e-12)
