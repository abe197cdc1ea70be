#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Regression suite over the bundled examples

Each check has a stable name, runs against the bundled scenes and mappings and reports
pass/fail with the numbers it compared.  Estimates are cached per (scene, kind,
parameters) so checks sharing a scene do not recompute it.  The scoreboard carries no
timings so that its JSON is identical across reruns.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import EstimatorParams
from ..core.dual import DualReport, subreg_dual_certificate, uniform_dual_constant
from ..core.exceptions import EstimatorDiagnostic, PreconditionError
from ..core.geometry import (
    Affine, Ball, Box, GridSpec, Halfspace, ParabolaEpi, Polyhedron, SetExpr, Translate,
    Union, brute_distance,
)
from ..core.mappings import (
    graph_scene_moduli, subreg_modulus, verify_product_bridge, verify_graph_bridge,
)
from ..core.moduli import (
    DEFAULT_THRESHOLD, ModulusEstimate, slope_zeta_hat, theta, theta_hat, zeta,
)
from ..core.projections import cyclic_project
from ..core.sampling import STREAM_SCENES, rng_for
from ..core.scene import Scene, make_scene
from .reports import dumps
from .scenes import SCENES, bundled_mapping, bundled_names, bundled_scene
from ..utils.logger import get_logger

logger = get_logger(__name__)

ORDER_TOL = 0.05
UNIT_TOL = 1e-3
CHAIN_TOL = 0.05
RANDOM_SCENES = 20
ORACLE_PAIRS = 500
PROJECTION_TOL = 1e-10
SMALL_RHO_MIN = 1e-4

ESTIMATORS: Dict[str, Callable[[Scene, EstimatorParams], ModulusEstimate]] = {
    "theta": theta,
    "zeta": zeta,
    "theta_hat": theta_hat,
    "slope": slope_zeta_hat,
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    values: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "values": self.values}


@dataclass
class SuiteReport:
    seed: int
    threshold: float
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def scoreboard(self) -> str:
        lines = [f"{'PASS' if r.passed else 'FAIL':4}  {r.name:28}  {r.detail}"
                 for r in self.results]
        lines.append(f"{len(self.results) - len(self.failures)}/{len(self.results)} checks passed")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "threshold": self.threshold,
            "passed": self.passed,
            "checks": [r.to_dict() for r in self.results],
        }


class SuiteContext:
    """Shared parameters plus an estimate cache"""

    def __init__(self, params: EstimatorParams, threshold: float = DEFAULT_THRESHOLD,
                 alpha: float = 0.5, delta: float = 0.3):
        self.params = params
        self.threshold = threshold
        self.alpha = alpha
        self.delta = delta
        self._scenes: Dict[str, Scene] = {}
        self._estimates: Dict[Tuple[str, str, EstimatorParams], ModulusEstimate] = {}
        self._duals: Dict[Tuple[str, str], DualReport] = {}

    def scene(self, name: str) -> Scene:
        if name not in self._scenes:
            self._scenes[name] = bundled_scene(name)
        return self._scenes[name]

    def estimate(self, name: str, kind: str, params: Optional[EstimatorParams] = None,
                 scene: Optional[Scene] = None) -> ModulusEstimate:
        params = params or self.params
        key = (name, kind, params)
        if key not in self._estimates:
            self._estimates[key] = ESTIMATORS[kind](scene or self.scene(name), params)
        return self._estimates[key]

    def uniform(self, name: str) -> DualReport:
        key = (name, "uniform")
        if key not in self._duals:
            self._duals[key] = uniform_dual_constant(self.scene(name), self.delta, self.params)
        return self._duals[key]

    def certificate(self, name: str) -> DualReport:
        key = (name, "certificate")
        if key not in self._duals:
            self._duals[key] = subreg_dual_certificate(self.scene(name), self.alpha,
                                                       self.delta, self.params)
        return self._duals[key]

    def classification(self, name: str) -> Tuple[bool, bool, bool]:
        return tuple(self.estimate(name, kind).value > self.threshold
                     for kind in ("theta", "zeta", "theta_hat"))


# -- randomized inputs ----------------------------------------------------------------------


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_convex_set(rng: np.random.Generator, dim: int = 2) -> SetExpr:
    """Closed convex set containing the origin, often with the origin on its boundary"""
    kind = int(rng.integers(4))
    on_boundary = rng.random() < 0.7
    if kind == 0:
        return Halfspace(_unit(rng, dim), 0.0 if on_boundary else float(rng.random()))
    if kind == 1:
        r = 0.5 + rng.random()
        c = _unit(rng, dim) * (r if on_boundary else r * rng.random())
        return Ball(c, r)
    if kind == 2:
        lo = -rng.random(dim) - 0.1
        hi = rng.random(dim) + 0.1
        if on_boundary:
            axis = int(rng.integers(dim))
            lo[axis] = 0.0
        return Box(lo, hi)
    return Affine(np.zeros(dim), [_unit(rng, dim)])


def random_convex_scene(params: EstimatorParams, index: int, dim: int = 2) -> Scene:
    rng = rng_for(params, STREAM_SCENES, index)
    sets = [random_convex_set(rng, dim) for _ in range(2)]
    return make_scene(sets, np.zeros(dim), name=f"random_convex_{index}")


def random_primitive(rng: np.random.Generator) -> SetExpr:
    """Planar set of any primitive type, used to compare exact and grid distances"""
    kind = int(rng.integers(8))
    if kind == 0:
        return Halfspace(_unit(rng, 2), float(rng.uniform(-1, 1)))
    if kind == 1:
        return Ball(rng.uniform(-1, 1, 2), float(rng.uniform(0.2, 1.5)))
    if kind == 2:
        lo = rng.uniform(-1.5, 0.5, 2)
        return Box(lo, lo + rng.uniform(0.1, 1.5, 2))
    if kind == 3:
        return Affine(rng.uniform(-1, 1, 2), [_unit(rng, 2)])
    if kind == 4:
        inner = rng.uniform(-0.5, 0.5, 2)
        rows = []
        for _ in range(3):
            a = _unit(rng, 2)
            rows.append((a, float(a @ inner + rng.uniform(0.1, 1.0))))
        return Polyhedron(rows)
    if kind == 5:
        return ParabolaEpi(float(rng.uniform(0.3, 2.0)))
    if kind == 6:
        return Union([Halfspace(_unit(rng, 2), float(rng.uniform(-0.5, 0.5))),
                      Ball(rng.uniform(-1, 1, 2), float(rng.uniform(0.2, 1.0)))])
    return Translate(Ball(np.zeros(2), float(rng.uniform(0.2, 1.0))), rng.uniform(-1, 1, 2))


# -- checks ---------------------------------------------------------------------------------


def _interval(name: str, value: float, lo: float, hi: float) -> CheckResult:
    return CheckResult(name, lo <= value <= hi, f"{value:.4g} ∈ [{lo:g}, {hi:g}]",
                       {"value": value, "interval": [lo, hi]})


def check_reflex_wedge_theta(ctx: SuiteContext) -> CheckResult:
    return _interval("reflex_wedge_theta", ctx.estimate("reflex_wedge", "theta").value, 1.85, 2.05)


def check_parabola_corner_theta(ctx: SuiteContext) -> CheckResult:
    value = ctx.estimate("parabola_corner", "theta").value
    return _interval("parabola_corner_theta", value, 0.9, 1.1)


def check_parabola_corner_zeta(ctx: SuiteContext) -> CheckResult:
    params = ctx.params.with_overrides(rho_min=SMALL_RHO_MIN)
    value = ctx.estimate("parabola_corner", "zeta", params).value
    return CheckResult("parabola_corner_zeta", value <= ORDER_TOL,
                       f"zeta = {value:.4g} ≤ {ORDER_TOL} at rho_min = {SMALL_RHO_MIN:g}",
                       {"zeta": value, "rho_min": SMALL_RHO_MIN})


def _classification(ctx: SuiteContext, name: str, expected: Tuple[bool, bool, bool],
                    bounds: Sequence[Tuple[str, float, float]]) -> CheckResult:
    got = ctx.classification(name)
    values = {kind: ctx.estimate(name, kind).value for kind, _, _ in bounds}
    ok = got == expected and all(lo <= values[k] <= hi for k, lo, hi in bounds)
    return CheckResult(f"{name}_classification", ok,
                       f"{list(got)} (expected {list(expected)})",
                       {"classification": list(got), **values})


def check_identical_axes_classification(ctx: SuiteContext) -> CheckResult:
    return _classification(ctx, "identical_axes", (False, True, False),
                           [("theta", 0.0, 0.02), ("zeta", 0.95, 1.0 + UNIT_TOL)])


def check_halfplane_axis_classification(ctx: SuiteContext) -> CheckResult:
    return _classification(ctx, "halfplane_axis", (True, True, False),
                           [("theta_hat", 0.0, ORDER_TOL)])


def check_ordering(ctx: SuiteContext) -> CheckResult:
    """θ̂ ≤ min{θ, ζ} + tol and ζ, θ̂ within [0, 1] on bundled and random scenes"""
    subjects = [(name, None) for name in bundled_names(SCENES)]
    subjects += [(f"random_convex_{k}", random_convex_scene(ctx.params, k))
                 for k in range(RANDOM_SCENES)]
    violations = []
    for name, scene in subjects:
        th, z, th_hat = (ctx.estimate(name, kind, scene=scene).value
                         for kind in ("theta", "zeta", "theta_hat"))
        if th_hat > min(th, z) + ORDER_TOL or not (0 <= z <= 1 + UNIT_TOL
                                                   and 0 <= th_hat <= 1 + UNIT_TOL):
            violations.append({"scene": name, "theta": th, "zeta": z, "theta_hat": th_hat})
    return CheckResult("ordering", not violations,
                       f"{len(subjects) - len(violations)}/{len(subjects)} scenes ordered",
                       {"violations": violations})


def check_dual_equivalence(ctx: SuiteContext) -> CheckResult:
    rows, mismatched = [], []
    for name in bundled_names(SCENES):
        dual = ctx.uniform(name).value
        th_hat = ctx.estimate(name, "theta_hat").value
        rows.append({"scene": name, "dual": dual, "theta_hat": th_hat})
        if (dual > ctx.threshold) != (th_hat > ctx.threshold):
            mismatched.append(name)
    return CheckResult("dual_equivalence", not mismatched,
                       "agree on all scenes" if not mismatched else f"mismatch: {mismatched}",
                       {"scenes": rows})


def check_axis_certificate(ctx: SuiteContext) -> CheckResult:
    report = ctx.certificate("identical_axes")
    return CheckResult("axis_certificate", report.passed,
                       f"min ‖Σx*‖ = {report.value:.4g} > alpha = {ctx.alpha:g}",
                       {"value": report.value, "alpha": ctx.alpha, "delta": ctx.delta})


def check_chain(ctx: SuiteContext) -> CheckResult:
    """certificate minimum ≤ slope estimate + tol ≤ zeta + 2·tol"""
    rows, broken = [], []
    for name in bundled_names(SCENES):
        dual = ctx.certificate(name).value
        slope = ctx.estimate(name, "slope").value
        z = ctx.estimate(name, "zeta").value
        rows.append({"scene": name, "dual": dual, "slope": slope, "zeta": z})
        # an empty certificate search has nothing to compare
        if math.isfinite(dual) and dual > slope + CHAIN_TOL:
            broken.append(name)
        elif slope + CHAIN_TOL > z + 2 * CHAIN_TOL:
            broken.append(name)
    return CheckResult("chain", not broken,
                       "holds on all scenes" if not broken else f"broken: {broken}",
                       {"scenes": rows})


def check_product_bridge(ctx: SuiteContext) -> CheckResult:
    rows, failed = [], []
    for name in ("identical_axes", "parabola_corner", "halfplane_axis", "reflex_wedge"):
        report = verify_product_bridge(ctx.scene(name), ctx.params)
        rows.append({"scene": name, "pairs": [c.to_dict() for c in report.inequalities]})
        if not report.passed:
            failed.append(name)
    return CheckResult("product_bridge", not failed,
                       "all pairs agree" if not failed else f"disagree: {failed}",
                       {"scenes": rows})


def check_graph_bridge(ctx: SuiteContext) -> CheckResult:
    rows, failed = [], []
    for name in ("identity", "double"):
        report = verify_graph_bridge(bundled_mapping(name), ctx.params)
        rows.append({"mapping": name, "checks": [c.to_dict() for c in report.inequalities]})
        if not report.passed:
            failed.append(name)
    return CheckResult("graph_bridge", not failed,
                       "sandwiches hold" if not failed else f"violated: {failed}",
                       {"mappings": rows})


def check_parabola_graph(ctx: SuiteContext) -> CheckResult:
    f = bundled_mapping("parabola_epi")
    zeta_f = subreg_modulus(f, ctx.params).value
    zeta_graph = graph_scene_moduli(f, ctx.params)["zeta"].value
    ok = zeta_f <= ORDER_TOL and zeta_graph <= ORDER_TOL
    return CheckResult("parabola_graph", ok,
                       f"zeta[F] = {zeta_f:.4g}, zeta[gph] = {zeta_graph:.4g}",
                       {"zeta_F": zeta_f, "zeta_graph": zeta_graph})


def check_oracle_equivalence(ctx: SuiteContext) -> CheckResult:
    rng = rng_for(ctx.params, STREAM_SCENES, 10_000)
    worst_gap = worst_residual = 0.0
    failures = 0
    for _ in range(ORACLE_PAIRS):
        s = random_primitive(rng)
        x = rng.uniform(-2, 2, 2)
        d = float(s.distance(x))
        grid = GridSpec(max(1.25 * d, 0.25), 21, 4)
        brute = brute_distance(s, x, grid)
        gap = abs(brute.value - d) if brute.found else math.inf
        residual = float(np.linalg.norm(x - s.project(x))) - d
        worst_gap = max(worst_gap, gap / grid.cell_diagonal(2))
        worst_residual = max(worst_residual, residual)
        if gap > grid.cell_diagonal(2) or residual > PROJECTION_TOL:
            failures += 1
    return CheckResult("oracle_equivalence", failures == 0,
                       f"{ORACLE_PAIRS - failures}/{ORACLE_PAIRS} pairs agree",
                       {"worst_gap_in_cells": worst_gap, "worst_projection_excess": worst_residual})


def check_projection_rates(ctx: SuiteContext) -> CheckResult:
    lines = cyclic_project(ctx.scene("lines_pi6"), [1.0, 0.5], 60, ctx.params).rate_fit
    slow = cyclic_project(ctx.scene("parabola_corner"), [0.5, 0.1], 400, ctx.params).rate_fit
    ok = 0.70 <= lines.q <= 0.80 and slow.sublinear
    return CheckResult("projection_rates", ok,
                       f"q(π/6) = {lines.q:.4g}, parabola corner sublinear = {slow.sublinear}",
                       {"lines_pi6": lines.to_dict(), "parabola_corner": slow.to_dict()})


def check_determinism(ctx: SuiteContext) -> CheckResult:
    scene = ctx.scene("orthogonal_lines")
    docs = []
    for workers in (1, max(2, ctx.params.workers)):
        p = ctx.params.with_overrides(workers=workers)
        docs.append(dumps({"zeta": zeta(scene, p), "theta_hat": theta_hat(scene, p),
                           "uniform": uniform_dual_constant(scene, ctx.delta, p)}))
    same = docs[0] == docs[1]
    return CheckResult("determinism", same,
                       "identical across worker counts" if same else "outputs differ", {})


CHECKS: Dict[str, Tuple[Callable[[SuiteContext], CheckResult], str]] = {
    "reflex_wedge_theta": (check_reflex_wedge_theta, "theta of the reflex wedge close to 2"),
    "parabola_corner_theta": (check_parabola_corner_theta,
                              "theta of the parabola corner close to 1"),
    "parabola_corner_zeta": (check_parabola_corner_zeta, "parabola corner is not subregular"),
    "identical_axes_classification": (check_identical_axes_classification,
                                      "identical axes are subregular only"),
    "halfplane_axis_classification": (check_halfplane_axis_classification,
                                      "halfplane with axis is not uniformly regular"),
    "ordering": (check_ordering, "theta_hat below theta and zeta, all in range"),
    "dual_equivalence": (check_dual_equivalence, "uniform dual constant matches theta_hat"),
    "axis_certificate": (check_axis_certificate, "dual certificate for two copies of an axis"),
    "chain": (check_chain, "certificate, slope and zeta estimates are ordered"),
    "product_bridge": (check_product_bridge, "set constants equal product-mapping moduli"),
    "graph_bridge": (check_graph_bridge, "graph-scene constants sandwiched by mapping moduli"),
    "parabola_graph": (check_parabola_graph, "degenerate parabola graph is not subregular"),
    "oracle_equivalence": (check_oracle_equivalence, "exact and grid distances agree"),
    "projection_rates": (check_projection_rates, "cyclic projection rates"),
    "determinism": (check_determinism, "outputs do not depend on worker count"),
}


def list_checks() -> List[Tuple[str, str]]:
    """(name, one-line description) of every check, in run order"""
    return [(name, description) for name, (_, description) in CHECKS.items()]


def run_suite(params: EstimatorParams, only: Optional[Sequence[str]] = None,
              threshold: float = DEFAULT_THRESHOLD, alpha: float = 0.5,
              delta: float = 0.3) -> SuiteReport:
    """Run the selected checks in their fixed order"""
    names = list(CHECKS)
    if only:
        unknown = sorted(set(only) - set(CHECKS))
        if unknown:
            raise PreconditionError(f"unknown checks: {', '.join(unknown)}")
        names = [n for n in names if n in set(only)]

    ctx = SuiteContext(params, threshold, alpha, delta)
    report = SuiteReport(seed=params.seed, threshold=threshold)
    for name in names:
        started = time.perf_counter()
        try:
            result = CHECKS[name][0](ctx)
        except EstimatorDiagnostic as e:
            result = CheckResult(name, False, f"diagnostic: {e}")
        report.results.append(result)
        logger.info(f"[{'通过' if result.passed else '失败'}] {name} "
                    f"({time.perf_counter() - started:.1f}s): {result.detail}")
    return report
