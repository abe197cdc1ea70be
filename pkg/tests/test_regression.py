#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
回归检查套件测试
"""

import unittest

import numpy as np

from setreg.core.exceptions import PreconditionError
from setreg.services.regression import (
    CHECKS, CheckResult, SuiteReport, list_checks, random_convex_scene, run_suite,
)

from conftest import FAST


class TestRegistry(unittest.TestCase):
    """测试检查项注册表"""

    def test_list_in_run_order(self):
        names = [name for name, _ in list_checks()]
        self.assertEqual(names, list(CHECKS))
        self.assertEqual(names[-1], "determinism")
        self.assertIn("product_bridge", names)
        self.assertTrue(all(description for _, description in list_checks()))

    def test_unknown_check(self):
        with self.assertRaises(PreconditionError):
            run_suite(FAST, only=["no_such_check"])


class TestSuiteReport(unittest.TestCase):
    """测试汇总表"""

    def test_scoreboard(self):
        report = SuiteReport(seed=0, threshold=0.05, results=[
            CheckResult("a", True, "ok"), CheckResult("b", False, "bad"),
        ])
        self.assertFalse(report.passed)
        self.assertEqual([r.name for r in report.failures], ["b"])
        board = report.scoreboard()
        self.assertIn("PASS  a", board)
        self.assertIn("FAIL  b", board)
        self.assertTrue(board.endswith("1/2 checks passed"))
        self.assertEqual(report.to_dict()["checks"][1]["detail"], "bad")


class TestChecks(unittest.TestCase):
    """运行几个较快的检查"""

    def test_oracle_equivalence(self):
        report = run_suite(FAST, only=["oracle_equivalence"])
        self.assertEqual(len(report.results), 1)
        self.assertTrue(report.passed, report.results[0].detail)

    def test_identical_axes_classification(self):
        report = run_suite(FAST, only=["identical_axes_classification"])
        self.assertTrue(report.passed, report.results[0].detail)

    def test_determinism(self):
        report = run_suite(FAST, only=["determinism"])
        self.assertTrue(report.passed)

    def test_selection_keeps_run_order(self):
        report = run_suite(FAST, only=["determinism", "axis_certificate"])
        self.assertEqual([r.name for r in report.results], ["axis_certificate", "determinism"])


def test_random_scenes_contain_origin():
    for k in range(5):
        scene = random_convex_scene(FAST, k)
        assert scene.is_convex
        assert np.all(scene.residuals(np.zeros((1, 2))) <= 1e-12)


def test_random_scenes_are_seeded():
    a = random_convex_scene(FAST, 3).to_dict()
    b = random_convex_scene(FAST, 3).to_dict()
    assert a == b
