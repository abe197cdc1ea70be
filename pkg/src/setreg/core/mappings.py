#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Set-valued mappings and the bridges between set and mapping regularity

A mapping F: Rᵈˣ ⇉ Rᵈʸ is given by its graph, a SetExpr in R^(dx+dy).  Slices
F(x) and F⁻¹(y) are exact for affine graphs and for the product mapping
F(x) = Π(Ωᵢ − x) of a scene; every other graph goes through the grid oracle.

Product spaces carry the maximum of the Euclidean norms of their blocks: Y = (Rⁿ)^m
for a product mapping and X × Y for the graph scene.

Bridges:

* ``verify_product_bridge`` compares the scene constants (θ, ζ, θ̂) with the metric
  semiregularity, subregularity and regularity moduli of its product mapping; the two
  sides must agree.
* ``verify_graph_bridge`` brackets the constants of the two-set scene {gph F, X × {ȳ}}
  between F/(F + 2) and F/2 (capped at 1 for ζ and θ̂) for each modulus F of the mapping.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space, orth

from .config import EstimatorParams
from .exceptions import PreconditionError, SceneParseError
from .geometry import (
    MEMBERSHIP_TOL, Affine, GridSpec, SetExpr, _as_points, grid_nearest_member
)
from .moduli import (
    FLAG_VACUOUS, THETA_HAT_DIRECTIONS, THETA_HAT_RADII, UPPER_BIASED, ModulusEstimate,
    RhoRow, estimate_from_rows, theta, theta_hat, zeta
)
from .sampling import ball_points, perturbation_tuples, unit_directions
from .scene import Scene, make_scene, parse_set
from ..services.parallel import map_rows
from ..utils.logger import get_logger, log_function_call

logger = get_logger(__name__)

__all__ = [
    "SvMapping", "ProductGraph", "ProductMapping", "BridgeCheck", "BridgeReport",
    "product_mapping", "graph_scene", "graph_scene_moduli",
    "semireg_modulus", "subreg_modulus", "reg_modulus",
    "verify_product_bridge", "verify_graph_bridge",
    "mapping_from_dict", "parse_mapping", "load_mapping",
]

BASEPOINT_TOL = 1e-12
PRODUCT_RELATIVE_TOL = 0.1
SANDWICH_TOL = 0.05
CLASSIFY_THRESHOLD = 0.05
# below this size an affine slice system is treated as consistent
SLICE_RESIDUAL_TOL = 1e-9


def block_norm(v: np.ndarray, blocks: int) -> np.ndarray:
    """max over equal consecutive blocks of the Euclidean norm, over the last axis"""
    shape = v.shape[:-1] + (blocks, v.shape[-1] // blocks)
    return np.linalg.norm(v.reshape(shape), axis=-1).max(axis=-1)


# -- affine slices ----------------------------------------------------------------------


def _affine_slice_distance(graph: Affine, fixed: slice, free: slice, fixed_values: np.ndarray,
                           targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """d(target, {free part of g ∈ graph : fixed part of g = value}) for affine graphs"""
    B = graph.basis.T  # (d, k)
    Bf, Bv = B[fixed], B[free]
    pf, pv = graph.point[fixed], graph.point[free]
    pinv = np.linalg.pinv(Bf) if Bf.size else np.zeros((B.shape[1], 0))
    rhs = fixed_values - pf
    coeff = rhs @ pinv.T
    residual = np.linalg.norm(coeff @ Bf.T - rhs, axis=1) if Bf.size else np.zeros(len(rhs))
    found = residual <= SLICE_RESIDUAL_TOL * np.maximum(1.0, np.linalg.norm(rhs, axis=1))
    base = pv + coeff @ Bv.T
    kernel = null_space(Bf) if Bf.size else np.eye(B.shape[1])
    directions = orth(Bv @ kernel).T if kernel.size else np.zeros((0, Bv.shape[0]))
    diff = targets - base
    if len(directions):
        diff = diff - (diff @ directions.T) @ directions
    return np.where(found, np.linalg.norm(diff, axis=1), np.inf), found


# -- mappings -------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SvMapping:
    """F: R^dim_x ⇉ R^dim_y with graph ``graph`` and reference point (x̄, ȳ) ∈ gph F

    Y is split into ``y_blocks`` equal blocks and normed by the largest block norm.
    """

    dim_x: int
    dim_y: int
    graph: SetExpr
    xbar: np.ndarray
    ybar: np.ndarray
    name: str = ""
    y_blocks: int = 1

    def __post_init__(self):
        object.__setattr__(self, "xbar", np.asarray(self.xbar, dtype=float).reshape(-1))
        object.__setattr__(self, "ybar", np.asarray(self.ybar, dtype=float).reshape(-1))
        if self.xbar.size != self.dim_x or self.ybar.size != self.dim_y:
            raise PreconditionError("basepoint does not match the mapping dimensions")
        if self.graph.dim != self.dim_x + self.dim_y:
            raise PreconditionError(
                f"graph lives in R^{self.graph.dim}, expected R^{self.dim_x + self.dim_y}"
            )
        if self.dim_y % self.y_blocks:
            raise PreconditionError("dim_y must be a multiple of y_blocks")
        d = self.graph.distance(self.basepoint)
        if d > BASEPOINT_TOL:
            raise PreconditionError(f"(x̄, ȳ) is not on the graph (distance {d:.3g})")

    @property
    def basepoint(self) -> np.ndarray:
        return np.concatenate([self.xbar, self.ybar])

    def y_norm(self, v) -> np.ndarray:
        return block_norm(np.asarray(v, dtype=float), self.y_blocks)

    def contains(self, x, y, tol: float = MEMBERSHIP_TOL):
        return self.graph.contains(np.concatenate([x, y], axis=-1), tol)

    def _brute_slice(self, fixed_values, targets, fixed_first: bool, grid: GridSpec):
        def residual(samples, rows):
            fixed = np.broadcast_to(fixed_values[rows][:, None, :],
                                    samples.shape[:2] + (fixed_values.shape[1],))
            pair = (np.concatenate([fixed, samples], axis=2) if fixed_first
                    else np.concatenate([samples, fixed], axis=2))
            return self.graph.distance(pair.reshape(-1, self.graph.dim)).reshape(
                samples.shape[:2])

        return grid_nearest_member(targets, residual, grid)

    def image_distance(self, x, y, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
        """d(y, F(x)) per row; +inf where F(x) is empty within the grid"""
        x, _ = _as_points(x, self.dim_x)
        y, _ = _as_points(y, self.dim_y)
        if isinstance(self.graph, Affine):
            return _affine_slice_distance(self.graph, slice(0, self.dim_x),
                                          slice(self.dim_x, None), x, y)
        return self._brute_slice(x, y, True, grid)

    def inverse_distance(self, y, x, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
        """d(x, F⁻¹(y)) per row; +inf where F⁻¹(y) is empty within the grid"""
        x, _ = _as_points(x, self.dim_x)
        y, _ = _as_points(y, self.dim_y)
        if isinstance(self.graph, Affine):
            return _affine_slice_distance(self.graph, slice(self.dim_x, None),
                                          slice(0, self.dim_x), y, x)
        return self._brute_slice(y, x, False, grid)

    def y_perturbations(self, rho: float, p: EstimatorParams) -> np.ndarray:
        """Offsets of ȳ of size at most ρ, shape (K, dim_y)"""
        unit = ball_points(np.zeros(self.dim_y), 1.0, p)
        unit = unit[np.linalg.norm(unit, axis=1) > 0]
        return np.concatenate([f * rho * unit for f in p.perturbation_fractions])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim_x": self.dim_x,
            "dim_y": self.dim_y,
            "graph": self.graph.to_dict(),
            "xbar": self.xbar.tolist(),
            "ybar": self.ybar.tolist(),
        }


class ProductGraph(SetExpr):
    """{(x, u₁, …, u_m) : x + uᵢ ∈ Ωᵢ for all i}

    Projection keeps x and moves each uᵢ to proj(Ωᵢ, x + uᵢ) − x, so ``distance`` is
    measured inside the fibre over x; it vanishes exactly on the graph.
    """

    kind = "product_graph"

    def __init__(self, scene: Scene):
        super().__init__(scene.dim * (scene.m + 1))
        self.scene = scene

    @property
    def is_convex(self) -> bool:
        return self.scene.is_convex

    def _project(self, pts):
        n = self.scene.dim
        x = pts[:, :n]
        out = pts.copy()
        for i, s in enumerate(self.scene.sets):
            block = slice(n * (i + 1), n * (i + 2))
            out[:, block] = s.project(x + pts[:, block]) - x
        return out

    def to_dict(self):
        return {"type": self.kind, "scene": self.scene.to_dict()}


class ProductMapping(SvMapping):
    """F(x) = (Ω₁ − x) × … × (Ω_m − x) at (x̄, 0), with exact slices

    d(u, F(x)) = maxᵢ d(x + uᵢ, Ωᵢ) and F⁻¹(u) = ∩(Ωᵢ − uᵢ).
    """

    def __init__(self, scene: Scene):
        super().__init__(
            dim_x=scene.dim, dim_y=scene.dim * scene.m, graph=ProductGraph(scene),
            xbar=scene.xbar, ybar=np.zeros(scene.dim * scene.m),
            name=f"F[{scene.name}]" if scene.name else "F", y_blocks=scene.m,
        )
        object.__setattr__(self, "scene", scene)

    def _tuples(self, y: np.ndarray) -> np.ndarray:
        return y.reshape(len(y), self.scene.m, self.scene.dim)

    def image_distance(self, x, y, grid):
        x, _ = _as_points(x, self.dim_x)
        y, _ = _as_points(y, self.dim_y)
        value = self.scene.shifted_max_residual(x[:, None, :], self._tuples(y))[:, 0]
        return value, np.ones(len(x), dtype=bool)

    def inverse_distance(self, y, x, grid):
        x, _ = _as_points(x, self.dim_x)
        y, _ = _as_points(y, self.dim_y)
        return self.scene.translated_intersection_distance(x, self._tuples(y), grid)

    def y_perturbations(self, rho, p):
        n, m = self.scene.dim, self.scene.m
        tuples = perturbation_tuples(n, m, p, cross=n <= 2).reshape(-1, n * m)
        return np.concatenate([f * rho * tuples for f in p.perturbation_fractions])

    def to_dict(self):
        data = super().to_dict()
        data["scene"] = self.scene.to_dict()
        return data


def product_mapping(scene: Scene) -> ProductMapping:
    return ProductMapping(scene)


def mapping_from_dict(data: Any, name: str = "") -> SvMapping:
    """SvMapping from a decoded mapping document

    ``{"dim_x": 1, "dim_y": 1, "graph": {...set...}, "xbar": [0], "ybar": [0]}``
    """
    if not isinstance(data, dict):
        raise SceneParseError("mapping document must be a JSON object")
    try:
        return SvMapping(
            dim_x=int(data["dim_x"]), dim_y=int(data["dim_y"]),
            graph=parse_set(data["graph"], "graph"),
            xbar=np.array(data["xbar"], dtype=float), ybar=np.array(data["ybar"], dtype=float),
            name=name,
        )
    except KeyError as e:
        raise SceneParseError(f"mapping: missing key {e}") from e
    except (PreconditionError, TypeError, ValueError) as e:
        raise SceneParseError(f"mapping: {e}") from e


def parse_mapping(text: str, name: str = "") -> SvMapping:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneParseError(f"invalid JSON: {e}") from e
    return mapping_from_dict(data, name)


def load_mapping(path) -> SvMapping:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SceneParseError("file not found", str(path)) from e
    try:
        return parse_mapping(text, name=path.stem)
    except SceneParseError as e:
        if e.path is None:
            raise SceneParseError(e.detail, str(path)) from e
        raise


# -- graph scene -------------------------------------------------------------------------


def graph_scene(f: SvMapping) -> Scene:
    """The pair {gph F, X × {ȳ}} at (x̄, ȳ)

    For an affine graph the intersection F⁻¹(ȳ) × {ȳ} is declared explicitly.
    """
    dx, dy = f.dim_x, f.dim_y
    axes = np.eye(dx + dy)[:dx]
    level = Affine(np.concatenate([np.zeros(dx), f.ybar]), axes)
    intersection = None
    if isinstance(f.graph, Affine):
        eye = np.eye(dx + dy)
        proj_graph = f.graph.basis.T @ f.graph.basis
        proj_level = axes.T @ axes
        common = null_space(np.vstack([eye - proj_graph, eye - proj_level])).T
        intersection = Affine(f.basepoint, common)
    return make_scene([f.graph, level], f.basepoint, intersection=intersection,
                      labels=("gph F", "X×{ȳ}"), name=f"graph[{f.name}]" if f.name else "graph")


def _rows_estimate(kind: str, rows: List[RhoRow], p: EstimatorParams,
                   upper: Optional[float] = None) -> ModulusEstimate:
    flags = [FLAG_VACUOUS] if all(math.isinf(r.ratio) for r in rows) else []
    return estimate_from_rows(kind, rows, p, UPPER_BIASED, flags, upper=upper)


def _ratio_row(rho: float, num: np.ndarray, den: np.ndarray, found: np.ndarray,
               tol: float) -> RhoRow:
    """min num/den with den ≤ tol excluded; an empty slice (not found) gives ratio 0"""
    keep = ~found | (den > tol)
    ratio = np.where(found, num / np.where(found & keep, den, 1.0), 0.0)
    value = float(ratio[keep].min()) if np.any(keep) else math.inf
    return RhoRow(rho, value, len(num), int(len(num) - keep.sum()), int((~found).sum()))


def _slice_grid(p: EstimatorParams, rho: float) -> GridSpec:
    return p.oracle_grid.scaled(rho)


def _x_rings(center: np.ndarray, rho: float) -> np.ndarray:
    dirs = unit_directions(center.size, THETA_HAT_DIRECTIONS)
    return np.vstack([center[None]] + [center + r * rho * dirs for r in THETA_HAT_RADII])


# -- metric regularity moduli of F --------------------------------------------------------


@log_function_call(logger)
def semireg_modulus(f: SvMapping, p: EstimatorParams) -> ModulusEstimate:
    """min over y near ȳ of ‖y − ȳ‖ / d(x̄, F⁻¹(y))"""
    rows = []
    for rho in p.rho_schedule():
        dy = f.y_perturbations(rho, p)
        grid = _slice_grid(p, rho)

        def chunk(sl, dy=dy, grid=grid):
            k = sl.stop - sl.start
            den, found = f.inverse_distance(f.ybar + dy[sl], np.broadcast_to(f.xbar, (k, f.dim_x)),
                                            grid)
            return np.column_stack([f.y_norm(dy[sl]), den, found])

        out = map_rows(chunk, len(dy), p.workers)
        rows.append(_ratio_row(rho, out[:, 0], out[:, 1], out[:, 2].astype(bool),
                               p.bisection_tol * rho))
    estimate = _rows_estimate("semireg_F", rows, p)
    logger.info(f"半正则模 = {estimate.value:.6g}")
    return estimate


@log_function_call(logger)
def subreg_modulus(f: SvMapping, p: EstimatorParams) -> ModulusEstimate:
    """min over x near x̄ off F⁻¹(ȳ) of d(ȳ, F(x)) / d(x, F⁻¹(ȳ))"""
    rows = []
    for k, rho in enumerate(p.rho_schedule()):
        xs = ball_points(f.xbar, rho, p, salt=k)
        grid = _slice_grid(p, rho)

        def chunk(sl, xs=xs, grid=grid):
            n = sl.stop - sl.start
            ybar = np.broadcast_to(f.ybar, (n, f.dim_y))
            num, _ = f.image_distance(xs[sl], ybar, grid)
            den, found = f.inverse_distance(ybar, xs[sl], grid)
            return np.column_stack([num, den, found])

        out = map_rows(chunk, len(xs), p.workers)
        rows.append(_ratio_row(rho, out[:, 0], out[:, 1], out[:, 2].astype(bool),
                               p.bisection_tol * rho))
    estimate = _rows_estimate("subreg_F", rows, p)
    logger.info(f"次正则模 = {estimate.value:.6g}")
    return estimate


@log_function_call(logger)
def reg_modulus(f: SvMapping, p: EstimatorParams) -> ModulusEstimate:
    """min over (x, y) near (x̄, ȳ) with x ∉ F⁻¹(y) of d(y, F(x)) / d(x, F⁻¹(y))"""
    rows = []
    for rho in p.rho_schedule():
        xs = _x_rings(f.xbar, rho)
        dy = np.vstack([np.zeros((1, f.dim_y)), f.y_perturbations(rho, p)])
        X = np.repeat(xs, len(dy), axis=0)
        Y = f.ybar + np.tile(dy, (len(xs), 1))
        grid = _slice_grid(p, rho)

        def chunk(sl, X=X, Y=Y, grid=grid):
            num, _ = f.image_distance(X[sl], Y[sl], grid)
            den, found = f.inverse_distance(Y[sl], X[sl], grid)
            return np.column_stack([num, den, found])

        out = map_rows(chunk, len(X), p.workers)
        rows.append(_ratio_row(rho, out[:, 0], out[:, 1], out[:, 2].astype(bool),
                               p.bisection_tol * rho))
    estimate = _rows_estimate("reg_F", rows, p)
    logger.info(f"正则模 = {estimate.value:.6g}")
    return estimate


# -- constants of the graph scene in the max norm of X × Y -------------------------------


def _graph_distance(f: SvMapping, Z: np.ndarray, grid: GridSpec) -> np.ndarray:
    """max-norm distance from the rows of Z to gph F

    The Euclidean distance bounds the max-norm one from above, so the lattice around
    each point spans that distance.
    """
    euclid = f.graph.distance(Z)
    out = np.zeros(len(Z))
    todo = np.flatnonzero(euclid > 0)
    if todo.size == 0:
        return out

    def residual(samples, rows):
        return f.graph.distance(samples.reshape(-1, f.graph.dim)).reshape(samples.shape[:2])

    def norm(v):
        return np.maximum(np.linalg.norm(v[..., :f.dim_x], axis=-1),
                          f.y_norm(v[..., f.dim_x:]))

    unit = GridSpec(1.0, grid.points_per_axis, grid.refinement_levels)
    values, found = grid_nearest_member(Z[todo], residual, unit, euclid[todo], norm)
    out[todo] = np.where(found, values, euclid[todo])
    return out


def _split(f: SvMapping, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return v[..., :f.dim_x], v[..., f.dim_x:]


def _graph_rows(f: SvMapping, kind: str, p: EstimatorParams) -> List[RhoRow]:
    d = f.dim_x + f.dim_y
    center = f.basepoint
    tuples = perturbation_tuples(d, 2, p, cross=d <= 2)
    rows = []
    for k, rho in enumerate(p.rho_schedule()):
        grid = _slice_grid(p, rho)
        tol = p.bisection_tol * rho
        if kind == "zeta":
            Z = ball_points(center, rho, p, salt=k)
            A = np.zeros((len(Z), 2, d))
        else:
            shifts = np.concatenate([fr * rho * tuples for fr in p.perturbation_fractions])
            base = center[None] if kind == "theta" else _x_rings(center, rho)
            if kind == "theta_hat":
                shifts = np.concatenate([np.zeros((1, 2, d)), shifts])
            Z = np.repeat(base, len(shifts), axis=0)
            A = np.tile(shifts, (len(base), 1, 1))

        def chunk(sl, Z=Z, A=A, grid=grid):
            z, a1, a2 = Z[sl], A[sl, 0], A[sl, 1]
            x, y = _split(f, z)
            a1x, a1y = _split(f, a1)
            _, a2y = _split(f, a2)
            # ∩(Ωᵢ − aᵢ) = {(x', ȳ − a₂ʸ) : x' + a₁ˣ ∈ F⁻¹(ȳ − a₂ʸ + a₁ʸ)}
            w = f.ybar - a2y + a1y
            dx_, found = f.inverse_distance(w, x + a1x, grid)
            den = np.maximum(dx_, f.y_norm(y - f.ybar + a2y))
            if kind == "theta":
                num = np.maximum(np.maximum(np.linalg.norm(a1x, axis=1), f.y_norm(a1y)),
                                 np.maximum(np.linalg.norm(a2[:, :f.dim_x], axis=1),
                                            f.y_norm(a2y)))
            else:
                num = np.maximum(_graph_distance(f, z + a1, grid), f.y_norm(y + a2y - f.ybar))
            return np.column_stack([num, den, found])

        out = map_rows(chunk, len(Z), p.workers)
        rows.append(_ratio_row(rho, out[:, 0], out[:, 1], out[:, 2].astype(bool), tol))
    return rows


@log_function_call(logger)
def graph_scene_moduli(f: SvMapping, p: EstimatorParams) -> Dict[str, ModulusEstimate]:
    """θ, ζ and θ̂ of {gph F, X × {ȳ}} with X × Y normed by max(‖x‖, ‖y‖)"""
    estimates = {}
    for kind in ("theta", "zeta", "theta_hat"):
        upper = None if kind == "theta" else 1.0
        rows = _graph_rows(f, kind, p)
        if kind != "theta":
            rows = [RhoRow(r.rho, 1.0 if math.isinf(r.ratio) else r.ratio, r.samples, r.excluded,
                           r.empty)
                    for r in rows]
        estimates[kind] = _rows_estimate(f"graph_{kind}", rows, p, upper=upper)
        logger.info(f"图场景 {kind} = {estimates[kind].value:.6g}")
    return estimates


# -- bridge reports -------------------------------------------------------------------------


@dataclass
class BridgeCheck:
    name: str
    satisfied: bool
    slack: float
    lhs: float
    rhs: float
    bounds: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {"name": self.name, "satisfied": self.satisfied, "slack": self.slack,
                "lhs": self.lhs, "rhs": self.rhs}
        if self.bounds is not None:
            data["bounds"] = list(self.bounds)
        return data


@dataclass
class BridgeReport:
    """Side-by-side estimates of set constants (lhs) and mapping moduli (rhs)"""

    direction: str
    lhs: Dict[str, ModulusEstimate]
    rhs: Dict[str, ModulusEstimate]
    inequalities: List[BridgeCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.satisfied for check in self.inequalities)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "passed": self.passed,
            "lhs": {k: v.to_dict() for k, v in self.lhs.items()},
            "rhs": {k: v.to_dict() for k, v in self.rhs.items()},
            "inequalities": [c.to_dict() for c in self.inequalities],
        }


MODULUS_PAIRS: Tuple[Tuple[str, str, Callable], ...] = (
    ("theta", "semireg", semireg_modulus),
    ("zeta", "subreg", subreg_modulus),
    ("theta_hat", "reg", reg_modulus),
)


@log_function_call(logger)
def verify_product_bridge(scene: Scene, p: EstimatorParams) -> BridgeReport:
    """Set constants of the scene against the moduli of its product mapping

    ζ and θ̂ never exceed 1 and θ is searched up to theta_cap, so the mapping side is
    capped the same way before comparing.
    Each pair passes when |lhs − rhs| ≤ 0.1·max(1, lhs).
    """
    f = product_mapping(scene)
    lhs = {"theta": theta(scene, p), "zeta": zeta(scene, p), "theta_hat": theta_hat(scene, p)}
    report = BridgeReport("sets_to_mapping", lhs, {})
    for set_kind, map_kind, estimator in MODULUS_PAIRS:
        est = estimator(f, p)
        report.rhs[map_kind] = est
        a = lhs[set_kind].value
        b = min(est.value, p.theta_cap if set_kind == "theta" else 1.0)
        slack = PRODUCT_RELATIVE_TOL * max(1.0, a) - abs(a - b)
        report.inequalities.append(
            BridgeCheck(f"{set_kind} = {map_kind}", slack >= 0, slack, a, b)
        )
    logger.info(f"乘积映射桥 {'通过' if report.passed else '失败'}: {scene.name or 'scene'}")
    return report


def _sandwich(modulus: float, capped: bool) -> Tuple[float, float]:
    if math.isinf(modulus):
        return 1.0, 1.0 if capped else math.inf
    lower = modulus / (modulus + 2.0)
    upper = modulus / 2.0
    return lower, min(upper, 1.0) if capped else upper


@log_function_call(logger)
def verify_graph_bridge(f: SvMapping, p: EstimatorParams) -> BridgeReport:
    """Graph-scene constants bracketed by the mapping moduli

    F/(F + 2) ≤ θ[Ω] ≤ F/2 for semiregularity and F/(F + 2) ≤ ·[Ω] ≤ min(F/2, 1) for
    subregularity and regularity, each with additive tolerance 0.05.  The two sides
    must also fall on the same side of the classification threshold.
    """
    rhs = {"semireg": semireg_modulus(f, p), "subreg": subreg_modulus(f, p),
           "reg": reg_modulus(f, p)}
    lhs = graph_scene_moduli(f, p)
    report = BridgeReport("mapping_to_sets", lhs, rhs)
    for set_kind, map_kind, _ in MODULUS_PAIRS:
        F = rhs[map_kind].value
        v = lhs[set_kind].value
        lower, upper = _sandwich(F, capped=set_kind != "theta")
        slack = min(v - lower, upper - v)
        report.inequalities.append(BridgeCheck(
            f"{map_kind}/({map_kind}+2) ≤ {set_kind} ≤ bound", slack >= -SANDWICH_TOL, slack, v, F,
            bounds=(lower, upper),
        ))
        agree = (v > CLASSIFY_THRESHOLD) == (F > CLASSIFY_THRESHOLD)
        report.inequalities.append(BridgeCheck(
            f"{set_kind} and {map_kind} classify alike", agree,
            min(abs(v - CLASSIFY_THRESHOLD), abs(F - CLASSIFY_THRESHOLD)) * (1 if agree else -1),
            v, F,
        ))
    logger.info(f"图场景桥 {'通过' if report.passed else '失败'}: {f.name or 'mapping'}")
    return report
