#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command Line Interface for setreg
"""

import sys
import argparse
import json
import math
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from . import __version__
from .core.config import ConfigManager
from .core.dual import subreg_dual_certificate, uniform_dual_constant
from .core.exceptions import CheckFailure, ConfigurationError, PreconditionError
from .core.mappings import BridgeReport, verify_product_bridge, verify_graph_bridge
from .core.moduli import slope_zeta_hat, theta, theta_hat, zeta
from .core.projections import rate_vs_zeta
from .services.regression import list_checks, run_suite
from .services.reports import (
    ESTIMATE_COLUMNS, ReportWriter, envelope, estimate_rows, trajectory_header,
)
from .services.scenes import resolve_mapping, resolve_scene
from .utils.error_handler import EXIT_INTERRUPTED, EXIT_OK, ErrorHandler, exit_code_for
from .utils.logger import get_logger, setup_logging

DEFAULT_ITERS = 100
EXPECTED_TOLERANCE = 0.1

# command-line dest -> RunConfig field
OVERRIDES = {
    "rho_max": "rho_max", "rho_min": "rho_min", "rho_factor": "rho_factor", "grid": "grid",
    "seed": "seed", "workers": "workers", "out": "output_dir", "format": "format",
    "delta": "delta", "alpha": "alpha", "threshold": "threshold", "log_level": "log_level",
}


def parse_point(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Path to configuration file')
    common.add_argument('--rho-max', type=float, help='Largest ρ of the schedule')
    common.add_argument('--rho-min', type=float, help='Smallest ρ of the schedule')
    common.add_argument('--rho-factor', type=float, help='Ratio of consecutive ρ values')
    common.add_argument('--grid', type=int, help='Ball sample lattice points per axis')
    common.add_argument('--threshold', type=float, help='Classification threshold')
    common.add_argument('--seed', type=int, help='Seed of the sampling jitter')
    common.add_argument('--workers', type=int, help='Worker threads')
    common.add_argument('--out', type=str, help='Output directory')
    common.add_argument('--format', choices=['json', 'csv'], help='Format printed to stdout')
    common.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Set logging level'
    )
    common.add_argument('--quiet', '-q', action='store_true', help='Quiet mode (no colours)')
    return common


def _dual_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--delta', type=float, help='Neighbourhood radius δ')
    parser.add_argument('--alpha', type=float, help='Certificate level α')


def create_parser():
    """Create command line argument parser"""
    parser = argparse.ArgumentParser(
        prog="setreg",
        description=f"Regularity constants of collections of sets v{__version__}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  setreg estimate --scene reflex_wedge         # θ, ζ, θ̂ and slope estimates
  setreg dual --scene orthogonal_lines         # dual constant and certificate
  setreg bridge graph --mapping double         # graph-scene sandwich
  setreg project --scene lines_pi6 --start 1,0.5 --iters 60
  setreg verify --list                         # enumerate bundled checks
        """
    )
    parser.add_argument('--version', '-v', action='store_true', help='Show setreg version')

    common = _common_parser()
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    estimate = sub.add_parser('estimate', parents=[common], help='Estimate θ, ζ, θ̂ and ζ̂')
    estimate.add_argument('--scene', required=True, help='Scene file or bundled scene name')

    dual = sub.add_parser('dual', parents=[common], help='Dual constant and certificate')
    dual.add_argument('--scene', required=True, help='Scene file or bundled scene name')
    _dual_options(dual)

    bridge = sub.add_parser('bridge', parents=[common], help='Set/mapping bridges')
    bridge.add_argument('which', choices=['product', 'graph'],
                        help='product: scene vs product mapping; graph: mapping vs graph scene')
    bridge.add_argument('--scene', help='Scene file or bundled name (product)')
    bridge.add_argument('--mapping', help='Mapping file or bundled name (graph)')
    bridge.add_argument('--expected', help='JSON file of stored values to compare against')

    project = sub.add_parser('project', parents=[common], help='Cyclic projections')
    project.add_argument('--scene', required=True, help='Scene file or bundled scene name')
    project.add_argument('--start', type=parse_point, action='append',
                         help='Start point X,Y (repeatable)')
    project.add_argument('--iters', type=int, default=DEFAULT_ITERS, help='Projection steps')

    verify = sub.add_parser('verify', parents=[common], help='Bundled regression suite')
    verify.add_argument('--list', action='store_true', help='List checks without running')
    verify.add_argument('--only', action='append', metavar='NAME', help='Run only this check')
    _dual_options(verify)

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {field: getattr(args, dest, None) for dest, field in OVERRIDES.items()}


def _emit(writer: ReportWriter, doc: Dict[str, Any], header=(), rows=()) -> None:
    sys.stdout.write(writer.render(doc, header, rows))


def cmd_estimate(config: ConfigManager, args, writer: ReportWriter) -> int:
    scene = resolve_scene(args.scene)
    p = config.estimator_params()
    threshold = config.run.threshold
    estimates = {
        "theta": theta(scene, p),
        "zeta": zeta(scene, p),
        "theta_hat": theta_hat(scene, p),
        "slope": slope_zeta_hat(scene, p),
    }
    classification = {
        "semiregular": estimates["theta"].value > threshold,
        "subregular": estimates["zeta"].value > threshold,
        "uniformly_regular": estimates["theta_hat"].value > threshold,
    }
    doc = envelope("estimate", scene.name, p,
                   {k: v.to_dict() for k, v in estimates.items()},
                   threshold=threshold, classification=classification)
    writer.write_estimates(f"{scene.name}_estimate", doc, estimates)
    _emit(writer, doc, ESTIMATE_COLUMNS, estimate_rows(estimates))
    return EXIT_OK


def cmd_dual(config: ConfigManager, args, writer: ReportWriter) -> int:
    scene = resolve_scene(args.scene)
    p = config.estimator_params()
    run = config.run
    uniform = uniform_dual_constant(scene, run.delta, p)
    certificate = subreg_dual_certificate(scene, run.alpha, run.delta, p)
    doc = envelope("dual", scene.name, p,
                   {"uniform": uniform.to_dict(), "certificate": certificate.to_dict()})
    writer.write_json(f"{scene.name}_dual", doc)
    _emit(writer, doc)
    return EXIT_OK


def _load_expected(path: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise PreconditionError(f"expected-values file not found: {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read expected-values file {path}: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("values", {}), dict):
        raise ConfigurationError("expected-values file must hold an object of values")
    return data


def compare_expected(report: BridgeReport, expected: Dict[str, Any]) -> List[str]:
    """Names whose estimate differs from the stored value by more than the tolerance"""
    values = {**{k: v.value for k, v in report.lhs.items()},
              **{k: v.value for k, v in report.rhs.items()}}
    tolerance = float(expected.get("tolerance", EXPECTED_TOLERANCE))
    mismatched = []
    for name, stored in expected.get("values", {}).items():
        got = values.get(name)
        stored = float(stored)
        if got is None:
            mismatched.append(name)
        elif math.isinf(stored) or math.isinf(got):
            if got != stored:
                mismatched.append(name)
        elif abs(got - stored) > tolerance * max(1.0, abs(stored)):
            mismatched.append(name)
    return mismatched


def cmd_bridge(config: ConfigManager, args, writer: ReportWriter) -> int:
    p = config.estimator_params()
    if args.which == "product":
        if not args.scene:
            raise PreconditionError("bridge product needs --scene")
        scene = resolve_scene(args.scene)
        subject, report = scene.name, verify_product_bridge(scene, p)
    else:
        if not args.mapping:
            raise PreconditionError("bridge graph needs --mapping")
        mapping = resolve_mapping(args.mapping)
        subject, report = mapping.name, verify_graph_bridge(mapping, p)

    extra = {}
    mismatched: List[str] = []
    if args.expected:
        mismatched = compare_expected(report, _load_expected(args.expected))
        extra["expected_mismatch"] = mismatched
    doc = envelope(f"bridge {args.which}", subject, p, report.to_dict(), **extra)
    writer.write_json(f"{subject}_bridge_{args.which}", doc)
    _emit(writer, doc)

    if mismatched:
        raise CheckFailure(f"bridge {args.which}", f"stored values differ: {mismatched}")
    if not report.passed:
        failed = [c.name for c in report.inequalities if not c.satisfied]
        raise CheckFailure(f"bridge {args.which}", f"violated: {failed}")
    return EXIT_OK


def cmd_project(config: ConfigManager, args, writer: ReportWriter) -> int:
    scene = resolve_scene(args.scene)
    p = config.estimator_params()
    if args.start:
        starts = [np.asarray(s, dtype=float) for s in args.start]
    else:
        offsets = 0.5 ** np.arange(scene.dim)
        starts = [scene.xbar + p.rho_max * offsets]
    report = rate_vs_zeta(scene, p, starts, args.iters, config.run.threshold)
    doc = envelope("project", scene.name, p, report.to_dict())
    writer.write_trajectories(f"{scene.name}_project", doc, report.trajectories)
    first = report.trajectories[0]
    _emit(writer, doc, trajectory_header(scene.dim), first.rows())
    if report.holds is False:
        raise CheckFailure("project", f"fitted rate above {report.bound:.4g}")
    return EXIT_OK


def cmd_verify(config: ConfigManager, args, writer: ReportWriter) -> int:
    if args.list:
        for name, description in list_checks():
            print(f"{name:28}  {description}")
        return EXIT_OK
    run = config.run
    report = run_suite(config.estimator_params(), only=args.only, threshold=run.threshold,
                       alpha=run.alpha, delta=run.delta)
    writer.write_json("verify", report)
    print(report.scoreboard())
    if not report.passed:
        first = report.failures[0]
        raise CheckFailure(first.name, first.detail)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "dual": cmd_dual,
    "bridge": cmd_bridge,
    "project": cmd_project,
    "verify": cmd_verify,
}


def main(argv=None):
    """Main CLI entry point"""
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.version:
        print(f"setreg v{__version__}")
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_OK

    setup_logging(level=args.log_level or 'INFO', use_colors=not args.quiet, stream=sys.stderr)
    logger = get_logger(__name__)

    try:
        config = ConfigManager(args.config)
        config.update(_overrides(args))
        run = config.run
        if run.log_file or run.log_level != (args.log_level or 'INFO'):
            setup_logging(level=run.log_level, log_file=run.log_file or None,
                          use_colors=not args.quiet, stream=sys.stderr)

        writer = ReportWriter(config.get_output_dir(), run.format)
        if args.command != "verify" or not args.list:
            config.ensure_directories()
        logger.debug(f"运行命令 {args.command}, 配置: {config.get_all()}")
        return COMMANDS[args.command](config, args, writer)

    except KeyboardInterrupt:
        logger.info("用户取消了操作")
        return EXIT_INTERRUPTED
    except Exception as e:
        message = ErrorHandler().handle_error(e, args.command)
        if not args.quiet:
            print(f"错误: {message}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == '__main__':
    sys.exit(main())
