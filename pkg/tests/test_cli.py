#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行接口测试
"""

import json
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest.mock import MagicMock, patch

from setreg import __version__
from setreg.cli import compare_expected, create_parser, main, parse_point
from setreg.core.exceptions import SetRegError
from setreg.utils.error_handler import (
    EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_INTERRUPTED, EXIT_OK, EXIT_RUNTIME_ERROR,
)

FAST_FLAGS = ["--rho-max", "0.2", "--rho-min", "0.05", "--grid", "7", "--quiet",
              "--log-level", "WARNING"]


class TestParser(unittest.TestCase):
    """测试参数解析"""

    def test_parse_point(self):
        self.assertEqual(parse_point("1,0.5"), [1.0, 0.5])

    def test_bridge_choices(self):
        args = create_parser().parse_args(["bridge", "graph", "--mapping", "double"])
        self.assertEqual(args.which, "graph")
        with self.assertRaises(SystemExit):
            create_parser().parse_args(["bridge", "other"])

    def test_repeatable_start(self):
        args = create_parser().parse_args(
            ["project", "--scene", "lines_pi6", "--start", "1,0", "--start", "0,1"])
        self.assertEqual(args.start, [[1.0, 0.0], [0.0, 1.0]])
        self.assertEqual(args.iters, 100)


class TestMain(unittest.TestCase):
    """测试退出码与输出文件"""

    def setUp(self):
        self.temp_dir = TemporaryDirectory()
        self.out = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def run_cli(self, *argv):
        return main(list(argv) + FAST_FLAGS + ["--out", str(self.out)])

    def test_version(self):
        with patch("builtins.print") as mock_print:
            self.assertEqual(main(["--version"]), EXIT_OK)
        mock_print.assert_called_with(f"setreg v{__version__}")

    def test_no_command(self):
        with patch("sys.stdout"):
            self.assertEqual(main([]), EXIT_OK)

    def test_missing_scene_file(self):
        self.assertEqual(self.run_cli("estimate", "--scene", str(self.out / "none.json")),
                         EXIT_INPUT_ERROR)

    def test_scene_off_intersection(self):
        """x̄ 不在交集中时返回输入错误"""
        path = self.out / "bad.json"
        path.write_text(json.dumps({
            "dim": 2, "xbar": [0, 1],
            "sets": [{"type": "affine", "p": [0, 0], "basis": [[1, 0]]},
                     {"type": "affine", "p": [0, 0], "basis": [[0, 1]]}],
        }), encoding="utf-8")
        self.assertEqual(self.run_cli("dual", "--scene", str(path)), EXIT_INPUT_ERROR)

    def test_bad_config_file(self):
        self.assertEqual(self.run_cli("estimate", "--scene", "interior", "--config",
                                      str(self.out / "missing.json")), EXIT_INPUT_ERROR)

    def test_list_checks(self):
        with patch("builtins.print") as mock_print:
            self.assertEqual(self.run_cli("verify", "--list"), EXIT_OK)
        printed = "\n".join(call.args[0] for call in mock_print.call_args_list)
        self.assertIn("oracle_equivalence", printed)

    def test_product_bridge_needs_scene(self):
        self.assertEqual(self.run_cli("bridge", "product"), EXIT_INPUT_ERROR)

    def test_stored_values_mismatch(self):
        """与保存的数值不符时返回检查失败"""
        expected = self.out / "expected.json"
        expected.write_text(json.dumps({"values": {"semireg": 5.0}, "tolerance": 0.05}),
                            encoding="utf-8")
        with patch("sys.stdout"):
            code = self.run_cli("bridge", "graph", "--mapping", "double",
                                "--expected", str(expected))
        self.assertEqual(code, EXIT_CHECK_FAILED)
        doc = json.loads((self.out / "double_bridge_graph.json").read_text(encoding="utf-8"))
        self.assertEqual(doc["expected_mismatch"], ["semireg"])

    def test_unreadable_expected_file(self):
        expected = self.out / "expected.json"
        expected.write_text("{", encoding="utf-8")
        with patch("sys.stdout"):
            code = self.run_cli("bridge", "graph", "--mapping", "double",
                                "--expected", str(expected))
        self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_missing_scene_logged_once(self):
        """测试场景文件缺失只记录一次错误"""
        missing = str(self.out / "none.json")
        with self.assertLogs("setreg", level="ERROR") as captured:
            code = self.run_cli("estimate", "--scene", missing)
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertEqual(len(captured.records), 1)

    def test_write_failure_is_runtime_error(self):
        failing = MagicMock(side_effect=SetRegError("写入结果文件失败"))
        with patch("setreg.services.reports.ReportWriter._write", failing), \
                patch("sys.stdout"):
            code = self.run_cli("dual", "--scene", "orthogonal_lines")
        self.assertEqual(code, EXIT_RUNTIME_ERROR)

    def test_interrupt(self):
        interrupted = MagicMock(side_effect=KeyboardInterrupt)
        with patch.dict("setreg.cli.COMMANDS", {"dual": interrupted}):
            code = self.run_cli("dual", "--scene", "interior")
        self.assertEqual(code, EXIT_INTERRUPTED)

    def test_estimate_writes_artifacts(self):
        with patch("sys.stdout"):
            code = self.run_cli("estimate", "--scene", "reflex_wedge")
        self.assertEqual(code, EXIT_OK)
        doc = json.loads((self.out / "reflex_wedge_estimate.json").read_text(encoding="utf-8"))
        self.assertEqual(doc["command"], "estimate")
        self.assertEqual(set(doc["result"]), {"theta", "zeta", "theta_hat", "slope"})
        self.assertTrue(doc["classification"]["semiregular"])
        self.assertTrue((self.out / "reflex_wedge_estimate_per_rho.csv").is_file())

    def test_verify_artifacts_independent_of_workers(self):
        """不同线程数下 verify 与 estimate 的结果文件逐字节相同"""
        codes = []
        for workers in ("1", "3"):
            out = self.out / f"workers_{workers}"
            flags = FAST_FLAGS + ["--workers", workers, "--out", str(out)]
            with patch("sys.stdout"):
                codes.append(main(["verify", "--only", "identical_axes_classification",
                                   "--only", "graph_bridge"] + flags))
                self.assertEqual(main(["estimate", "--scene", "identical_axes"] + flags),
                                 EXIT_OK)
        self.assertEqual(codes[0], codes[1])
        first = sorted(p.name for p in (self.out / "workers_1").iterdir())
        self.assertEqual(first, sorted(p.name for p in (self.out / "workers_3").iterdir()))
        self.assertIn("verify.json", first)
        for name in first:
            self.assertEqual((self.out / "workers_1" / name).read_bytes(),
                             (self.out / "workers_3" / name).read_bytes(), name)

    def test_project_default_start(self):
        with patch("sys.stdout"):
            code = self.run_cli("project", "--scene", "lines_pi6", "--iters", "40")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((self.out / "lines_pi6_project_trajectory_1.csv").is_file())


def test_compare_expected_tolerance():
    class Est:
        def __init__(self, value):
            self.value = value

    class Report:
        lhs = {"zeta": Est(0.5)}
        rhs = {"subreg": Est(float("inf"))}

    assert compare_expected(Report(), {"values": {"zeta": 0.52}}) == []
    assert compare_expected(Report(), {"values": {"zeta": 0.8}, "tolerance": 0.1}) == ["zeta"]
    assert compare_expected(Report(), {"values": {"subreg": "inf", "theta": 1}}) == ["theta"]
