#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Primal regularity constants of a collection of sets

Estimators for the semiregularity constant θ, the subregularity constant ζ, the
uniform regularity constant θ̂ and the slope constant ζ̂.  Every liminf is realized
as the minimum over a finite geometric ρ-schedule; the per-ρ table is kept so the
bias direction stays auditable.

Inner problems are solved on sample patterns (canonical directions, polar rings,
a Cartesian lattice and seeded extras) followed by a shrinking-stencil refinement
around the best samples.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import EstimatorParams
from .exceptions import EstimatorDiagnostic, PreconditionError
from .geometry import GridSpec, min_norm_weights, refine_stencil
from .sampling import (
    STREAM_SLOPE, ball_points, pairwise_midpoints, perturbation_tuples, random_ball,
    rng_for, unit_directions
)
from .scene import Scene
from ..services.parallel import map_rows
from ..utils.logger import get_logger, log_function_call

logger = get_logger(__name__)

__all__ = [
    "EstimatorParams", "ModulusEstimate", "RhoRow", "Classification",
    "theta_rho", "theta_hat_rho_at", "zeta_rho_delta",
    "theta", "zeta", "theta_hat", "slope_zeta_hat", "slope_configurations", "classify",
]

UPPER_BIASED = "upper-biased"
LOWER_BIASED = "lower-biased"
POINT_ESTIMATE = "point-estimate"

FLAG_VACUOUS = "vacuous near x̄"
FLAG_CAPPED = "capped"
FLAG_METRIC_DISAGREES = "metric form disagrees"

DEFAULT_THRESHOLD = 0.05
METRIC_DISAGREEMENT = 0.2
# x samples of the uniform constant: canonical directions at these multiples of ρ
THETA_HAT_RADII = (1.0, 0.5)
THETA_HAT_DIRECTIONS = 8
# base points of the definitional θ̂ cross-check, multiples of ρ
THETA_HAT_BASE_RADII = (0.5, 1.5)
THETA_METRIC_FRACTIONS = (1.0, 0.25)
# oracle half-width multiple searched before a translated intersection counts as empty
EMPTY_SEARCH_FACTOR = 4.0


@dataclass(frozen=True)
class RhoRow:
    """One line of the per-ρ table"""
    rho: float
    ratio: float
    samples: int
    excluded: int
    empty: int = 0


@dataclass
class ModulusEstimate:
    """Estimate of one regularity constant with the discretization that produced it"""

    kind: str
    value: float
    rho_schedule: Tuple[float, float, float]
    grid: GridSpec
    per_rho: List[RhoRow]
    direction: str = UPPER_BIASED
    flags: List[str] = field(default_factory=list)
    cross_checks: Dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not self.per_rho:
            raise PreconditionError("an estimate needs at least one ρ row")

    @property
    def is_vacuous(self) -> bool:
        return FLAG_VACUOUS in self.flags

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "direction": self.direction,
            "flags": list(self.flags),
            "cross_checks": dict(sorted(self.cross_checks.items())),
            "rho_schedule": {
                "rho_max": self.rho_schedule[0],
                "factor": self.rho_schedule[1],
                "rho_min": self.rho_schedule[2],
            },
            "grid": asdict(self.grid),
            "seed": self.seed,
            "per_rho": [asdict(row) for row in self.per_rho],
        }


def estimate_from_rows(kind: str, rows: List[RhoRow], p: EstimatorParams, direction: str,
                       flags: List[str], upper: Optional[float] = None) -> ModulusEstimate:
    value = min(row.ratio for row in rows)
    if upper is not None:
        value = min(max(value, 0.0), upper)
    return ModulusEstimate(
        kind=kind,
        value=float(value),
        rho_schedule=(p.rho_max, p.rho_factor, p.rho_min),
        grid=p.ball_samples,
        per_rho=rows,
        direction=direction,
        flags=flags,
        seed=p.seed,
    )


# -- inner minimization over a ball ----------------------------------------------------


def _clip_to_ball(pts: np.ndarray, center: np.ndarray, radius: np.ndarray) -> np.ndarray:
    """Radially pull points of shape (A, ..., n) into the balls B(center[a], radius[a])"""
    shape = (-1,) + (1,) * (pts.ndim - 2) + (pts.shape[-1],)
    c = center.reshape(shape)
    diff = pts - c
    norms = np.linalg.norm(diff, axis=-1, keepdims=True)
    r = radius.reshape((-1,) + (1,) * (pts.ndim - 1))
    scale = np.minimum(1.0, np.divide(r, norms, out=np.ones_like(norms), where=norms > r))
    return c + diff * scale


def _stencil_descent(value_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                     starts: np.ndarray, h0: np.ndarray, levels: int,
                     center: np.ndarray, radius: np.ndarray,
                     stop: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Shrinking-stencil minimization inside balls

    Args:
        value_fn: ``value_fn(points (a, K, n), rows (a,)) -> (a, K)``
        starts: incumbents, shape (A, S, n)
        h0: level-0 cell per row; level ``k`` uses ``h0 / 2**k``
        levels: number of refinement levels
        center, radius: feasible ball per row, shapes (A, n) and (A,)
        stop: optional per-row target; rows reaching it stop refining

    Returns:
        (best values (A,), best points (A, n))
    """
    A, S, n = starts.shape
    stencil = refine_stencil(n)
    inc = starts.copy()
    inc_val = value_fn(inc, np.arange(A))
    active = np.ones(A, dtype=bool)
    for level in range(1, levels + 1):
        if stop is not None:
            active &= inc_val.min(axis=1) > stop
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        h = h0[rows] / 2 ** level
        pts = inc[rows][:, :, None, :] + h[:, None, None, None] * stencil[None, None]
        pts = _clip_to_ball(pts, center[rows], radius[rows])
        vals = value_fn(pts.reshape(rows.size, -1, n), rows).reshape(rows.size, S, -1)
        k = vals.argmin(axis=2)
        inc_val[rows] = np.take_along_axis(vals, k[..., None], axis=2)[..., 0]
        inc[rows] = np.take_along_axis(pts, k[..., None, None], axis=2)[:, :, 0, :]
    best = inc_val.argmin(axis=1)
    idx = np.arange(A)
    return inc_val[idx, best], inc[idx, best]


def _unit_cell(p: EstimatorParams) -> float:
    return p.ball_samples.cell_size / p.ball_samples.radius


def _residual_floor(n: int, rho: float, p: EstimatorParams) -> float:
    """Pass tolerance of the covering test: relative tolerance plus the finest cell"""
    finest = _unit_cell(p) / 2 ** p.ball_samples.refinement_levels
    return p.bisection_tol * rho + rho * finest * math.sqrt(n)


def _min_shifted_residuals(scene: Scene, center: np.ndarray, shifts: np.ndarray,
                           rho: float, p: EstimatorParams, unit: np.ndarray) -> np.ndarray:
    """min over x ∈ B_ρ(center) of maxᵢ d(x + shiftᵢ, Ωᵢ) for each shift tuple

    Rows that clearly pass or clearly fail on the sample pattern skip refinement;
    a clear failure is reported by its pattern minimum.
    """
    n = scene.dim
    samples = center + rho * unit
    K = len(samples)
    tol = p.bisection_tol * rho
    cover = _unit_cell(p) * math.sqrt(n) * rho
    floor = _residual_floor(n, rho, p)

    def chunk(sl: slice) -> np.ndarray:
        sub = shifts[sl]
        pts = np.broadcast_to(samples, (len(sub), K, n))
        res = scene.shifted_max_residual(pts, sub)
        g0 = res.min(axis=1)
        if np.any(g0 > floor + cover):
            return g0
        open_rows = np.flatnonzero(g0 > tol)
        if open_rows.size == 0:
            return g0
        S = min(p.refine_starts, K)
        order = np.argsort(res[open_rows], axis=1, kind="stable")[:, :S]
        starts = samples[order]
        A = open_rows.size

        def value_fn(pts_, rows):
            return scene.shifted_max_residual(pts_, sub[open_rows[rows]])

        best, _ = _stencil_descent(
            value_fn, starts, np.full(A, _unit_cell(p) * rho),
            p.ball_samples.refinement_levels,
            np.broadcast_to(center, (A, n)), np.full(A, rho), stop=np.full(A, tol),
        )
        out = g0.copy()
        out[open_rows] = best
        return out

    return map_rows(chunk, len(shifts), p.workers)


def _covering_radius_search(scene: Scene, center: np.ndarray, base: np.ndarray,
                            rho: float, p: EstimatorParams,
                            salt: int = 0) -> Tuple[float, bool, int]:
    """Largest r such that every sampled r-perturbation keeps a common point in B_ρ

    Returns:
        (r, capped, number of perturbation tuples)
    """
    n, m = scene.dim, scene.m
    dirs = perturbation_tuples(n, m, p, cross=n <= 2, salt=salt)
    unit = ball_points(np.zeros(n), 1.0, p, salt=salt)
    floor = _residual_floor(n, rho, p)

    def passes(r: float) -> bool:
        shifts = base[None] + r * dirs
        return bool(np.all(_min_shifted_residuals(scene, center, shifts, rho, p, unit) <= floor))

    hi = p.theta_cap * rho
    if passes(hi):
        return hi, True, len(dirs)
    lo = 0.0
    while hi - lo > p.bisection_tol * rho:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo, False, len(dirs)


def theta_rho(scene: Scene, rho: float, p: EstimatorParams) -> float:
    """sup{r ≥ 0 : ∩(Ωᵢ − xᵢ) ∩ B_ρ(x̄) ≠ ∅ for all xᵢ ∈ rB}, over sampled tuples

    Equivalently the largest r with rB^m covered by ∪_{x ∈ B_ρ(x̄)} Π(Ωᵢ − x).
    """
    if not rho > 0:
        raise PreconditionError("rho must be > 0")
    origin = np.zeros((scene.m, scene.dim))
    value, _, _ = _covering_radius_search(scene, scene.xbar, origin, rho, p)
    return value


def theta_hat_rho_at(scene: Scene, omegas, rho: float, p: EstimatorParams) -> float:
    """θ_ρ of the shifted collection {Ωᵢ − ωᵢ} at the origin, ωᵢ ∈ Ωᵢ"""
    if not rho > 0:
        raise PreconditionError("rho must be > 0")
    omegas = np.asarray(omegas, dtype=float).reshape(scene.m, scene.dim)
    for i, s in enumerate(scene.sets):
        if s.distance(omegas[i]) > 1e-9:
            raise PreconditionError(f"omega {i + 1} is not in its set")
    value, _, _ = _covering_radius_search(scene, np.zeros(scene.dim), omegas, rho, p)
    return value


# -- definitional ζ -----------------------------------------------------------------------


def zeta_rho_delta(scene: Scene, rho: float, delta: float, p: EstimatorParams) -> float:
    """sup{r ≥ 0 : ∩(Ωᵢ + rB) ∩ B_δ(x̄) ⊆ ∩Ωᵢ + ρB} over samples of B_δ(x̄)

    A radius r fails exactly when some x ∈ B_δ(x̄) with maxᵢ d(x, Ωᵢ) ≤ r lies farther
    than ρ from the intersection, so the supremum is the smallest residual among such
    witnesses; it is refined by stencil descent over the witness region.  Returns +inf
    when no sample violates the inclusion.
    """
    if not 0 < rho < delta:
        raise PreconditionError("zeta_rho_delta requires 0 < rho < delta")
    n = scene.dim
    grid = p.oracle_grid.scaled(delta)
    limit = rho + p.bisection_tol

    def witness_residual(pts: np.ndarray) -> np.ndarray:
        flat = pts.reshape(-1, n)
        dcap, found = scene.intersection_distance(flat, grid)
        if not np.all(found):
            raise EstimatorDiagnostic(
                "zeta_rho_delta", "grid oracle found no point of the intersection"
            )
        res = scene.max_residual(flat)
        return np.where(dcap > limit, res, np.inf).reshape(pts.shape[:-1])

    x = ball_points(scene.xbar, delta, p)
    values = witness_residual(x)
    violating = np.flatnonzero(np.isfinite(values))
    if violating.size == 0:
        return float("inf")
    S = min(p.refine_starts, violating.size)
    starts = x[violating[np.argsort(values[violating], kind="stable")[:S]]][None]
    best, _ = _stencil_descent(
        lambda pts, rows: witness_residual(pts), starts,
        np.array([_unit_cell(p) * delta]), p.ball_samples.refinement_levels,
        scene.xbar[None], np.array([delta]),
    )
    return float(min(best[0], values[violating].min()))


# -- θ -------------------------------------------------------------------------------------


def _translated_distance(scene: Scene, X: np.ndarray, S: np.ndarray, R: float,
                         p: EstimatorParams) -> Tuple[np.ndarray, np.ndarray]:
    """d(x, ∩(Ωᵢ − sᵢ)) per row searched within R, then within EMPTY_SEARCH_FACTOR·R

    Rows still without a member are empty: their distance is +inf.
    """
    den, found = scene.translated_intersection_distance(
        X, S, p.oracle_grid, radii=np.full(len(X), R)
    )
    miss = np.flatnonzero(~found)
    if miss.size:
        den[miss], found[miss] = scene.translated_intersection_distance(
            X[miss], S[miss], p.oracle_grid, radii=np.full(miss.size, EMPTY_SEARCH_FACTOR * R)
        )
    return den, found


def _theta_metric_rows(scene: Scene, p: EstimatorParams) -> List[RhoRow]:
    """Ratio maxᵢ‖xᵢ‖ / d(x̄, ∩(Ωᵢ − xᵢ)) over sampled tuples, one row per ρ

    An empty translated intersection has distance +inf and contributes ratio 0.
    """
    n, m = scene.dim, scene.m
    dirs = perturbation_tuples(n, m, p, cross=n <= 2)
    rows = []
    for rho in p.rho_schedule():
        tuples = np.concatenate([f * rho * dirs for f in THETA_METRIC_FRACTIONS])
        T = len(tuples)
        R = p.oracle_grid.radius * rho
        num = np.linalg.norm(tuples, axis=2).max(axis=1)

        def chunk(sl, tuples=tuples, R=R):
            k = sl.stop - sl.start
            den, found = _translated_distance(
                scene, np.broadcast_to(scene.xbar, (k, n)).copy(), tuples[sl], R, p
            )
            return np.column_stack([den, found])

        out = map_rows(chunk, T, p.workers)
        den, found = out[:, 0], out[:, 1].astype(bool)
        keep = ~found | (den > p.bisection_tol * rho)
        ratio = np.where(found, num / np.where(keep, den, 1.0), 0.0)
        value = float(ratio[keep].min()) if np.any(keep) else p.theta_cap
        rows.append(RhoRow(rho, value, T, int(T - keep.sum()), int((~found).sum())))
    return rows


@log_function_call(logger)
def theta(scene: Scene, p: EstimatorParams) -> ModulusEstimate:
    """Semiregularity constant: min over the schedule of θ_ρ/ρ

    The metric form (ratio of perturbation size to the distance from x̄ to the
    translated intersection) is reported as a cross-check; a relative disagreement
    above 20% on a non-degenerate value raises a flag.
    """
    rows: List[RhoRow] = []
    flags: List[str] = []
    capped = 0
    for rho in p.rho_schedule():
        value, hit_cap, tuples = _covering_radius_search(
            scene, scene.xbar, np.zeros((scene.m, scene.dim)), rho, p
        )
        capped += hit_cap
        rows.append(RhoRow(rho, value / rho, tuples, 0))
        logger.debug(f"theta rho={rho:.4g} ratio={value / rho:.6g}{' (capped)' if hit_cap else ''}")
    if capped == len(rows):
        flags.append(FLAG_CAPPED)

    estimate = estimate_from_rows("theta", rows, p, UPPER_BIASED, flags)
    metric = min(row.ratio for row in _theta_metric_rows(scene, p))
    estimate.cross_checks["metric_form"] = float(metric)
    larger = max(estimate.value, metric)
    if larger > DEFAULT_THRESHOLD and abs(estimate.value - metric) > METRIC_DISAGREEMENT * larger:
        estimate.flags.append(FLAG_METRIC_DISAGREES)
    logger.info(f"θ 估计值 = {estimate.value:.6g} 标记={estimate.flags}")
    return estimate


# -- ζ -------------------------------------------------------------------------------------


@log_function_call(logger)
def zeta(scene: Scene, p: EstimatorParams) -> ModulusEstimate:
    """Subregularity constant via the metric form maxᵢ d(x, Ωᵢ) / d(x, ∩Ωᵢ)

    Samples with d(x, ∩Ωᵢ) ≤ bisection_tol·ρ are excluded.  Rows where every sample
    is excluded report 1; if that happens at every ρ the estimate is flagged vacuous.
    The definitional ζ_{ρ,2ρ}/ρ is attached as a cross-check.
    """
    n = scene.dim
    rows: List[RhoRow] = []
    vacuous = 0
    for k, rho in enumerate(p.rho_schedule()):
        x = ball_points(scene.xbar, rho, p, salt=k)
        grid = p.oracle_grid.scaled(rho)

        def chunk(sl, x=x, grid=grid):
            den, found = scene.intersection_distance(x[sl], grid)
            return np.column_stack([scene.max_residual(x[sl]), den, found])

        out = map_rows(chunk, len(x), p.workers)
        num, den, found = out[:, 0], out[:, 1], out[:, 2].astype(bool)
        keep = found & (den > p.bisection_tol * rho)
        if np.any(keep):
            ratio = float(np.min(num[keep] / den[keep]))
        else:
            ratio = 1.0
            vacuous += 1
        rows.append(RhoRow(rho, min(max(ratio, 0.0), 1.0), len(x), int(len(x) - keep.sum())))
        logger.debug(f"zeta rho={rho:.4g} ratio={ratio:.6g}")

    flags = [FLAG_VACUOUS] if vacuous == len(rows) else []
    estimate = estimate_from_rows("zeta", rows, p, UPPER_BIASED, flags, upper=1.0)
    definitional = [
        min(zeta_rho_delta(scene, rho, 2.0 * rho, p) / rho, 1.0) for rho in p.rho_schedule()
    ]
    estimate.cross_checks["definitional"] = float(min(definitional))
    logger.info(f"ζ 估计值 = {estimate.value:.6g} 标记={estimate.flags} (维数={n})")
    return estimate


# -- θ̂ -------------------------------------------------------------------------------------


def _theta_hat_x_samples(scene: Scene, rho: float) -> np.ndarray:
    dirs = unit_directions(scene.dim, THETA_HAT_DIRECTIONS)
    rings = [scene.xbar + f * rho * dirs for f in THETA_HAT_RADII]
    return np.vstack([scene.xbar[None]] + rings)


def _theta_hat_tuples(scene: Scene, p: EstimatorParams) -> np.ndarray:
    dirs = perturbation_tuples(scene.dim, scene.m, p)
    return np.concatenate([dirs, np.zeros((1, scene.m, scene.dim))])


@log_function_call(logger)
def theta_hat(scene: Scene, p: EstimatorParams) -> ModulusEstimate:
    """Uniform regularity constant via maxᵢ d(x + xᵢ, Ωᵢ) / d(x, ∩(Ωᵢ − xᵢ))

    x ranges over x̄ and canonical points at distance ρ and ρ/2; tuples over the
    canonical and seeded families scaled by each perturbation fraction of ρ, plus the
    zero tuple.  A translated intersection with no member in the widened oracle
    window is empty: d(x, ∅) = +inf, so the sample contributes ratio 0 and is counted
    in the row's ``empty`` column.
    """
    n, m = scene.dim, scene.m
    base_tuples = _theta_hat_tuples(scene, p)
    rows: List[RhoRow] = []
    vacuous = 0
    for rho in p.rho_schedule():
        xs = _theta_hat_x_samples(scene, rho)
        tuples = np.concatenate([f * rho * base_tuples for f in p.perturbation_fractions])
        X = np.repeat(xs, len(tuples), axis=0)
        S = np.tile(tuples, (len(xs), 1, 1))
        R = p.oracle_grid.radius * rho
        tol = p.bisection_tol * rho

        def chunk(sl, X=X, S=S, R=R):
            num = scene.shifted_max_residual(X[sl][:, None, :], S[sl])[:, 0]
            den, found = _translated_distance(scene, X[sl], S[sl], R, p)
            return np.column_stack([num, den, found])

        out = map_rows(chunk, len(X), p.workers)
        num, den, found = out[:, 0], out[:, 1], out[:, 2].astype(bool)
        empty = ~found
        keep = empty | (den > tol)
        ratio_all = np.where(found, num / np.where(found & keep, den, 1.0), 0.0)
        if np.any(keep):
            ratio = float(ratio_all[keep].min())
        else:
            ratio = 1.0
            vacuous += 1
        rows.append(RhoRow(rho, min(max(ratio, 0.0), 1.0), len(X), int(len(X) - keep.sum()),
                           int(empty.sum())))
        logger.debug(f"theta_hat rho={rho:.4g} ratio={ratio:.6g} empty={int(empty.sum())}")

    flags = [FLAG_VACUOUS] if vacuous == len(rows) else []
    estimate = estimate_from_rows("theta_hat", rows, p, UPPER_BIASED, flags, upper=1.0)
    estimate.cross_checks["definitional"] = _theta_hat_definitional(scene, p)
    logger.info(f"θ̂ 估计值 = {estimate.value:.6g} 标记={estimate.flags}")
    return estimate


def _theta_hat_definitional(scene: Scene, p: EstimatorParams) -> float:
    """min over base points ω of θ_ρ[Ω − ω](0)/ρ at the largest ρ"""
    rho = p.rho_max
    dirs = unit_directions(scene.dim, THETA_HAT_DIRECTIONS)
    anchors = [scene.xbar[None]] + [scene.xbar + f * rho * dirs for f in THETA_HAT_BASE_RADII]
    omegas = scene.projections(np.vstack(anchors))
    values = [theta_hat_rho_at(scene, w, rho, p) / rho for w in omegas]
    return float(min(values))


# -- slope ζ̂ -------------------------------------------------------------------------------


def _min_norm_hull_point(vectors: np.ndarray) -> np.ndarray:
    return min_norm_weights(vectors) @ vectors


def slope_configurations(scene: Scene, rho: float, p: EstimatorParams,
                         salt: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sampled (x, ω̂): projections, perturbed neighbours and pairwise bisectors

    Returns:
        x of shape (N, n) and ω̂ of shape (N, m, n)
    """
    n, m = scene.dim, scene.m
    xs = np.vstack([ball_points(scene.xbar, f * rho, p, salt=salt)
                    for f in p.perturbation_fractions])
    omegas = scene.projections(xs)

    # perturbed neighbours: ωᵢ moved by up to half the current spread, re-projected
    rng = rng_for(p, STREAM_SLOPE, salt)
    spread = np.linalg.norm(xs[:, None, :] - omegas, axis=2).max(axis=1)
    noise = random_ball(rng, len(xs) * m, n).reshape(len(xs), m, n)
    moved = omegas + 0.5 * spread[:, None, None] * noise
    perturbed = np.stack([s.project(moved[:, i]) for i, s in enumerate(scene.sets)], axis=1)

    mids = pairwise_midpoints(omegas)
    mid_omegas = scene.projections(mids) if len(mids) else np.zeros((0, m, n))

    X = np.vstack([xs, xs, mids])
    W = np.concatenate([omegas, perturbed, mid_omegas])
    return X, W


def _active_units(x: np.ndarray, omegas: np.ndarray, f0: np.ndarray) -> np.ndarray:
    """Unit residuals (x − ωᵢ)/‖x − ωᵢ‖ of the indices attaining the max, zeros elsewhere"""
    diff = x[:, None, :] - omegas
    norms = np.linalg.norm(diff, axis=2)
    active = norms >= f0[:, None] * (1 - 1e-9)
    units = np.divide(diff, norms[..., None], out=np.zeros_like(diff), where=norms[..., None] > 0)
    return np.where(active[..., None], units, 0.0)


def _config_slopes(scene: Scene, x: np.ndarray, omegas: np.ndarray, rho: float,
                   p: EstimatorParams) -> np.ndarray:
    """Sampled local slope of (u, v̂) ↦ maxᵢ‖u − vᵢ‖ in the ρ-weighted product norm

    Three step families along every sampled direction d, each of length s = τ·f:
    u alone moves; u and every vᵢ move together (vᵢ re-projected); the vᵢ move and u
    follows by the projection of their mean displacement onto the span of the active
    residuals.
    """
    N, m, n = omegas.shape
    f0 = np.linalg.norm(x[:, None, :] - omegas, axis=2).max(axis=1)
    step = p.step_fraction * f0
    units = _active_units(x, omegas, f0)

    descent = np.empty((N, n))
    for k in range(N):
        rows = units[k][np.linalg.norm(units[k], axis=1) > 0]
        g = _min_norm_hull_point(rows)
        norm = np.linalg.norm(g)
        descent[k] = -g / norm if norm > 1e-14 else 0.0
    toward = omegas - x[:, None, :]
    toward_norm = np.linalg.norm(toward, axis=2, keepdims=True)
    toward = np.divide(toward, toward_norm, out=np.zeros_like(toward), where=toward_norm > 0)
    sphere = unit_directions(n, p.directions)
    common = np.broadcast_to(sphere, (N, len(sphere), n))
    dirs = np.concatenate([common, descent[:, None, :], toward], axis=1)  # (N, D, n)
    D = dirs.shape[1]
    sd = step[:, None, None] * dirs

    def objective(u, v):
        return np.linalg.norm(u[:, :, None, :] - v, axis=3).max(axis=2)

    def reproject(points):
        return np.stack(
            [s.project(points[:, :, i].reshape(-1, n)).reshape(N, D, n)
             for i, s in enumerate(scene.sets)], axis=2
        )

    base_v = np.broadcast_to(omegas[:, None], (N, D, m, n))
    u_moved = x[:, None, :] + sd
    slopes = np.zeros(N)

    def account(u, v):
        du = np.linalg.norm(u - x[:, None, :], axis=2)
        dv = np.linalg.norm(v - omegas[:, None], axis=3).max(axis=2)
        cost = np.maximum(du, rho * dv)
        gain = np.maximum(f0[:, None] - objective(u, v), 0.0)
        ratio = np.divide(gain, cost, out=np.zeros_like(gain), where=cost > 0)
        return ratio.max(axis=1)

    slopes = np.maximum(slopes, account(u_moved, base_v))
    together = reproject(base_v + sd[:, :, None, :])
    slopes = np.maximum(slopes, account(u_moved, together))

    # v leads; u follows inside the span of the active residual directions
    shift = together - base_v
    active = np.linalg.norm(units, axis=2) > 0
    mean_shift = (shift * active[:, None, :, None]).sum(axis=2) / active.sum(axis=1)[:, None, None]
    proj = np.linalg.pinv(units) @ units  # (N, n, n)
    follow = x[:, None, :] + np.einsum("nij,ndj->ndi", proj, mean_shift)
    slopes = np.maximum(slopes, account(follow, together))
    return slopes


@log_function_call(logger)
def slope_zeta_hat(scene: Scene, p: EstimatorParams) -> ModulusEstimate:
    """Slope constant ζ̂: infimum over sampled (x, ω̂) of the local slope

    Admissible configurations satisfy ‖x − x̄‖ ≤ ρ and 0 < maxᵢ‖x − ωᵢ‖ < ρ; the lower
    bound on the max distance is bisection_tol·ρ.
    """
    rows: List[RhoRow] = []
    vacuous = 0
    for k, rho in enumerate(p.rho_schedule()):
        X, W = slope_configurations(scene, rho, p, salt=k)
        f0 = np.linalg.norm(X[:, None, :] - W, axis=2).max(axis=1)
        admissible = (
            (f0 > p.bisection_tol * rho) & (f0 < rho)
            & (np.linalg.norm(X - scene.xbar, axis=1) <= rho * (1 + 1e-12))
        )
        idx = np.flatnonzero(admissible)
        if idx.size:
            def chunk(sl, X=X, W=W, idx=idx, rho=rho):
                rows_ = idx[sl]
                return _config_slopes(scene, X[rows_], W[rows_], rho, p)

            ratio = float(map_rows(chunk, idx.size, p.workers).min())
        else:
            ratio = 1.0
            vacuous += 1
        rows.append(RhoRow(rho, min(max(ratio, 0.0), 1.0), len(X), int(len(X) - idx.size)))
        logger.debug(f"zeta_hat rho={rho:.4g} slope={ratio:.6g} configs={idx.size}")

    flags = [FLAG_VACUOUS] if vacuous == len(rows) else []
    estimate = estimate_from_rows("zeta_hat_slope", rows, p, POINT_ESTIMATE, flags, upper=1.0)
    logger.info(f"斜率 ζ̂ 估计值 = {estimate.value:.6g} 标记={estimate.flags}")
    return estimate


# -- classification --------------------------------------------------------------------


@dataclass
class Classification:
    """Semiregular / subregular / uniformly regular verdicts with their estimates"""

    semiregular: bool
    subregular: bool
    uniformly_regular: bool
    threshold: float
    estimates: Dict[str, ModulusEstimate]

    def to_dict(self) -> Dict:
        return {
            "semiregular": self.semiregular,
            "subregular": self.subregular,
            "uniformly_regular": self.uniformly_regular,
            "threshold": self.threshold,
            "estimates": {k: v.to_dict() for k, v in self.estimates.items()},
        }


def classify(scene: Scene, p: EstimatorParams,
             threshold: float = DEFAULT_THRESHOLD) -> Classification:
    """Each property holds iff its constant exceeds the threshold"""
    if not threshold > 0:
        raise PreconditionError("threshold must be > 0")
    estimates = {
        "theta": theta(scene, p),
        "zeta": zeta(scene, p),
        "theta_hat": theta_hat(scene, p),
    }
    return Classification(
        semiregular=estimates["theta"].value > threshold,
        subregular=estimates["zeta"].value > threshold,
        uniformly_regular=estimates["theta_hat"].value > threshold,
        threshold=threshold,
        estimates=estimates,
    )
