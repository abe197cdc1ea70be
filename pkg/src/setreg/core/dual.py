#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Normal cones and dual regularity constants

``normal_cone`` returns the Fréchet normal cone of a scene set at one of its points as
a finitely generated ``Cone`` (generators plus a lineality subspace).  On top of it:

* ``duality_map`` describes the duality mapping of the max-sum product norm at a tuple
  of vectors;
* ``uniform_dual_constant`` samples points of every set near x̄ and minimizes the norm
  of a sum of unit-total-mass normals (the dual uniform-regularity test);
* ``subreg_dual_certificate`` runs the sufficient dual subregularity test over sampled
  (ρ, x, ω̂) configurations and reports the smallest norm it found.

A normal of a union at a point shared by several branches is taken to be normal to
every branch, so its cone is the intersection of the branch cones.
"""

import math
from dataclasses import dataclass, field
from functools import reduce, singledispatch
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import minimize, nnls

from .config import EstimatorParams
from .exceptions import PreconditionError
from .geometry import (
    INVARIANT_TOL, MEMBERSHIP_TOL, Affine, Ball, Box, Halfspace, ParabolaEpi, Polyhedron,
    SetExpr, Translate, Union, min_norm_weights
)
from .moduli import slope_configurations
from .sampling import STREAM_DUAL, ball_points, rng_for, unit_directions
from .scene import Scene
from ..services.parallel import chunk_slices, ordered_map
from ..utils.logger import get_logger, log_function_call

logger = get_logger(__name__)

__all__ = [
    "Cone", "DualTuple", "DualityMap", "DualWitness", "DualReport",
    "normal_cone", "duality_map", "uniform_dual_constant", "subreg_dual_certificate",
]

FLAG_NO_NORMALS = "no nonzero normals"
FLAG_NO_CONFIGS = "no admissible configurations"
NOTE_SUFFICIENT_ONLY = (
    "the dual subregularity condition is sufficient only: FAIL does not prove that the "
    "collection is not subregular"
)

DIRECTION_DECIMALS = 9
CAP_STEPS = 9
CERTIFICATE_RESTARTS = 3
DESCENT_SWEEPS = 3
UNIFORM_RESTARTS = 8
MAX_WITNESSES = 3
PAIR_CHUNK = 512


def _unit_rows(vectors, dim: int) -> np.ndarray:
    arr = np.array(vectors, dtype=float).reshape(-1, dim)
    norms = np.linalg.norm(arr, axis=1)
    keep = norms > 1e-12
    return arr[keep] / norms[keep, None]


def _unique_rows(vectors: np.ndarray) -> np.ndarray:
    """Drop repeated rows (rounded), keeping first occurrences in order"""
    if len(vectors) == 0:
        return vectors
    _, first = np.unique(np.round(vectors, DIRECTION_DECIMALS), axis=0, return_index=True)
    return vectors[np.sort(first)]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cone:
    """{Σ λⱼ gⱼ + l : λ ≥ 0, l ∈ span(lineality)}

    ``generators`` are unit rows; ``lineality`` rows are an orthonormal basis of the
    largest subspace contained in the cone.
    """

    dim: int
    generators: np.ndarray
    lineality: np.ndarray

    @classmethod
    def build(cls, dim: int, generators=(), lineality=()) -> "Cone":
        gens = _unique_rows(_unit_rows(generators, dim))
        lin = np.array(lineality, dtype=float).reshape(-1, dim)
        lin = orth(lin.T).T if len(lin) else np.zeros((0, dim))
        if len(lin) and len(gens):
            # generators inside the lineality space add nothing
            inside = np.linalg.norm(gens - (gens @ lin.T) @ lin, axis=1) <= 1e-10
            gens = gens[~inside]
        return cls(dim, _frozen(gens.reshape(-1, dim)), _frozen(lin.reshape(-1, dim)))

    @classmethod
    def zero(cls, dim: int) -> "Cone":
        return cls.build(dim)

    @classmethod
    def ray(cls, direction) -> "Cone":
        direction = np.asarray(direction, dtype=float)
        return cls.build(direction.size, generators=[direction])

    @classmethod
    def subspace(cls, basis, dim: int) -> "Cone":
        return cls.build(dim, lineality=basis)

    @property
    def is_trivial(self) -> bool:
        return len(self.generators) == 0 and len(self.lineality) == 0

    @property
    def is_linear(self) -> bool:
        return len(self.generators) == 0 and len(self.lineality) > 0

    @property
    def kind(self) -> str:
        if self.is_trivial:
            return "zero"
        if self.is_linear:
            return "linear"
        if len(self.generators) == 1 and len(self.lineality) == 0:
            return "ray"
        return "finitely generated"

    def project(self, v) -> np.ndarray:
        """Nearest points of the cone to the rows of v (shape (N, dim) or (dim,))"""
        vs = np.asarray(v, dtype=float)
        single = vs.ndim == 1
        vs = vs.reshape(-1, self.dim)
        if self.is_trivial:
            out = np.zeros_like(vs)
        elif self.is_linear:
            out = (vs @ self.lineality.T) @ self.lineality
        elif self.kind == "ray":
            g = self.generators[0]
            out = np.maximum(vs @ g, 0.0)[:, None] * g
        else:
            M = np.vstack([self.generators, self.lineality, -self.lineality]).T
            out = np.empty_like(vs)
            for k, row in enumerate(vs):
                lam, _ = nnls(M, row)
                out[k] = M @ lam
        return out[0] if single else out

    def distance(self, v):
        vs = np.asarray(v, dtype=float)
        d = np.linalg.norm(vs - self.project(vs), axis=-1)
        return float(d) if np.ndim(d) == 0 else d

    def contains(self, v, tol: float = MEMBERSHIP_TOL):
        vs = np.asarray(v, dtype=float)
        scale = np.maximum(1.0, np.linalg.norm(vs, axis=-1))
        inside = self.distance(vs) <= tol * scale
        return bool(inside) if np.ndim(inside) == 0 else inside

    def unit_directions(self, sweep: Optional[np.ndarray] = None) -> np.ndarray:
        """Unit vectors of the cone: generators, ±lineality and the sweep directions inside"""
        blocks = [self.generators, self.lineality, -self.lineality]
        if sweep is not None and not self.is_trivial:
            blocks.append(sweep[self.contains(sweep)])
        return _unique_rows(np.vstack(blocks).reshape(-1, self.dim))

    def intersect(self, other: "Cone") -> "Cone":
        """Intersection of two cones (dimension at most 3)"""
        if self.dim != other.dim:
            raise PreconditionError("cones live in different spaces")
        if self.is_trivial or other.is_trivial:
            return Cone.zero(self.dim)
        lin = _subspace_intersection(self.lineality, other.lineality, self.dim)
        rays_a = np.vstack([self.generators, self.lineality, -self.lineality])
        rays_b = np.vstack([other.generators, other.lineality, -other.lineality])
        candidates = [rays_a, rays_b]
        if self.dim == 3:
            # extreme rays may come from crossing faces of the two cones
            faces_a = _face_normals(rays_a)
            faces_b = _face_normals(rays_b)
            if len(faces_a) and len(faces_b):
                cross = np.cross(faces_a[:, None, :], faces_b[None, :, :]).reshape(-1, 3)
                candidates += [cross, -cross]
        cand = _unit_rows(np.vstack(candidates), self.dim)
        keep = self.contains(cand) & other.contains(cand) if len(cand) else np.zeros(0, bool)
        return Cone.build(self.dim, cand[keep], lin)

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "generators": self.generators.tolist(),
            "lineality": self.lineality.tolist(),
        }


def _subspace_intersection(a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros((0, dim))
    eye = np.eye(dim)
    stacked = np.vstack([eye - a.T @ a, eye - b.T @ b])
    return null_space(stacked).T


def _face_normals(rays: np.ndarray) -> np.ndarray:
    normals = [np.cross(rays[i], rays[j])
               for i in range(len(rays)) for j in range(i + 1, len(rays))]
    return _unit_rows(normals, 3) if normals else np.zeros((0, 3))


@dataclass(frozen=True, eq=False)
class DualTuple:
    """Covectors (x₁*, …, x_m*) of shape (m, n)"""

    xstars: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.xstars, axis=1)

    @property
    def norm_sum(self) -> float:
        return float(self.norms.sum())

    @property
    def norm_of_sum(self) -> float:
        return float(np.linalg.norm(self.xstars.sum(axis=0)))

    def to_dict(self) -> Dict:
        return {"xstars": self.xstars.tolist(), "norm_sum": self.norm_sum}


# -- normal cones ---------------------------------------------------------------------------


def _active_tol(x: np.ndarray) -> float:
    return INVARIANT_TOL * max(1.0, float(np.linalg.norm(x)))


@singledispatch
def _cone_at(s: SetExpr, x: np.ndarray) -> Cone:
    raise PreconditionError(f"no normal cone rule for {type(s).__name__}")


@_cone_at.register
def _(s: Halfspace, x):
    if (float(x @ s.a) - s.b) / s._norm >= -_active_tol(x):
        return Cone.ray(s.a)
    return Cone.zero(s.dim)


@_cone_at.register
def _(s: Ball, x):
    if s.radius == 0:
        return Cone.subspace(np.eye(s.dim), s.dim)
    offset = x - s.center
    if abs(np.linalg.norm(offset) - s.radius) <= _active_tol(x):
        return Cone.ray(offset)
    return Cone.zero(s.dim)


@_cone_at.register
def _(s: Box, x):
    tol = _active_tol(x)
    eye = np.eye(s.dim)
    upper = np.isfinite(s.hi) & (x >= s.hi - tol)
    lower = np.isfinite(s.lo) & (x <= s.lo + tol)
    return Cone.build(s.dim, np.vstack([eye[upper], -eye[lower]]))


@_cone_at.register
def _(s: Affine, x):
    if len(s.basis) == 0:
        return Cone.subspace(np.eye(s.dim), s.dim)
    return Cone.subspace(null_space(s.basis).T, s.dim)


@_cone_at.register
def _(s: Polyhedron, x):
    active = s.A @ x - s.b >= -_active_tol(x)
    return Cone.build(s.dim, s.A[active])


@_cone_at.register
def _(s: ParabolaEpi, x):
    u, v = x
    if v - s.c * u * u <= _active_tol(x):
        return Cone.ray([2.0 * s.c * u, -1.0])
    return Cone.zero(2)


@_cone_at.register
def _(s: Union, x):
    tol = _active_tol(x)
    cones = [_cone_at(child, x) for child in s.children() if child.distance(x) <= tol]
    return reduce(Cone.intersect, cones)


@_cone_at.register
def _(s: Translate, x):
    return _cone_at(s.child, x - s.offset)


def normal_cone(s: SetExpr, x) -> Cone:
    """Fréchet normal cone of s at a point x of s

    Raises:
        PreconditionError: x is farther than 1e-9 from s
    """
    x = np.asarray(x, dtype=float)
    d = s.distance(x)
    if d > MEMBERSHIP_TOL:
        raise PreconditionError(f"point is not in the set (distance {d:.3g})")
    return _cone_at(s, x)


# -- duality mapping -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DualityMap:
    """Duality mapping of (Rⁿ)^m with the max norm at a nonzero tuple v̂"""

    vectors: np.ndarray
    attaining: Tuple[int, ...]
    norm: float
    canonical: DualTuple

    def contains(self, candidate, tol: float = MEMBERSHIP_TOL) -> bool:
        """Membership of a covector tuple: total mass 1, mass only on attaining indices,
        each nonzero xᵢ* aligned with vᵢ"""
        xs = candidate.xstars if isinstance(candidate, DualTuple) else np.asarray(candidate)
        xs = np.asarray(xs, dtype=float)
        if xs.shape != self.vectors.shape:
            return False
        norms = np.linalg.norm(xs, axis=1)
        if abs(norms.sum() - 1.0) > tol:
            return False
        for i, (xstar, weight) in enumerate(zip(xs, norms)):
            if weight <= tol:
                continue
            if i not in self.attaining:
                return False
            v = self.vectors[i]
            if np.linalg.norm(xstar - weight * v / np.linalg.norm(v)) > tol:
                return False
        return True

    def to_dict(self) -> Dict:
        return {
            "attaining": [i + 1 for i in self.attaining],
            "norm": self.norm,
            "canonical": self.canonical.to_dict(),
        }


def duality_map(vtuple) -> DualityMap:
    vectors = np.asarray(vtuple, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    norms = np.linalg.norm(vectors, axis=1)
    top = float(norms.max()) if norms.size else 0.0
    if not top > 0:
        raise PreconditionError("duality mapping of the zero tuple")
    attaining = tuple(int(i) for i in np.flatnonzero(norms >= top * (1 - 1e-12)))
    canonical = np.zeros_like(vectors)
    for i in attaining:
        canonical[i] = vectors[i] / norms[i] / len(attaining)
    return DualityMap(_frozen(vectors), attaining, top, DualTuple(_frozen(canonical)))


# -- reports ---------------------------------------------------------------------------------


@dataclass
class DualWitness:
    """A sampled tuple and the normals attaining its minimum"""

    omega: np.ndarray
    xstars: np.ndarray
    norm_of_sum: float
    x: Optional[np.ndarray] = None
    rho: Optional[float] = None
    epsilon: Optional[float] = None

    def to_dict(self) -> Dict:
        data = {
            "omega": np.asarray(self.omega).tolist(),
            "xstars": np.asarray(self.xstars).tolist(),
            "norm_of_sum": self.norm_of_sum,
        }
        if self.x is not None:
            data.update({"x": np.asarray(self.x).tolist(), "rho": self.rho,
                         "epsilon": self.epsilon})
        return data


@dataclass
class DualReport:
    constant_kind: str
    value: float
    delta: float
    alpha: Optional[float] = None
    passed: Optional[bool] = None
    witnesses: List[DualWitness] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    samples: int = 0
    epsilon: Optional[Tuple[float, float]] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "constant_kind": self.constant_kind,
            "value": self.value,
            "alpha": self.alpha,
            "delta": self.delta,
            "pass": self.passed,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "flags": list(self.flags),
            "samples": self.samples,
            "epsilon": list(self.epsilon) if self.epsilon else None,
            "notes": list(self.notes),
        }


# -- uniform dual constant ---------------------------------------------------------------


def _normal_pools(scene: Scene, delta: float,
                  p: EstimatorParams) -> Tuple[List[np.ndarray], List[np.ndarray], int]:
    """Per set: unit normal directions at sampled ωᵢ ∈ Ωᵢ ∩ B_δ(x̄) and their base points"""
    pts = np.vstack([ball_points(scene.xbar, f * delta, p, salt=k)
                     for k, f in enumerate(p.perturbation_fractions)])
    omegas = scene.projections(pts)
    sweep = unit_directions(scene.dim, p.directions)
    dirs_out, owners_out, sampled = [], [], 0
    for i, s in enumerate(scene.sets):
        cand = np.vstack([scene.xbar[None], omegas[:, i]])
        cand = cand[np.linalg.norm(cand - scene.xbar, axis=1) <= delta * (1 + 1e-12)]
        cand = _unique_rows(cand)
        sampled += len(cand)
        dirs, owners = [], []
        for w in cand:
            units = normal_cone(s, w).unit_directions(sweep)
            dirs.append(units)
            owners.append(np.repeat(w[None], len(units), axis=0))
        dirs_arr = np.vstack(dirs) if dirs else np.zeros((0, scene.dim))
        owners_arr = np.vstack(owners) if owners else np.zeros((0, scene.dim))
        if len(dirs_arr):
            _, first = np.unique(np.round(dirs_arr, DIRECTION_DECIMALS), axis=0,
                                 return_index=True)
            first = np.sort(first)
            dirs_arr, owners_arr = dirs_arr[first], owners_arr[first]
        dirs_out.append(dirs_arr)
        owners_out.append(owners_arr)
    return dirs_out, owners_out, sampled


def _best_pair(a: np.ndarray, b: np.ndarray, workers: int) -> Tuple[float, int, int, float]:
    """min over a ∈ A, b ∈ B, t ∈ [0, 1] of ‖t·a + (1 − t)·b‖"""

    def chunk(sl: slice):
        diff = a[sl, None, :] - b[None, :, :]
        dd = np.einsum("ijk,ijk->ij", diff, diff)
        num = -np.einsum("jk,ijk->ij", b, diff)
        t = np.clip(np.divide(num, dd, out=np.zeros_like(dd), where=dd > 0), 0.0, 1.0)
        sums = t[..., None] * a[sl, None, :] + (1 - t[..., None]) * b[None, :, :]
        norms = np.linalg.norm(sums, axis=2)
        k = int(np.argmin(norms))
        i, j = divmod(k, norms.shape[1])
        return float(norms[i, j]), sl.start + i, j, float(t[i, j])

    parts = ordered_map(chunk, chunk_slices(len(a), PAIR_CHUNK), workers)
    return min(parts, key=lambda r: r[0])


def _descend_selection(pools: Sequence[np.ndarray], start: List[int]) -> Tuple[float, List[int]]:
    """Coordinate descent over one direction per pool, hull weights solved exactly"""

    def value(sel):
        vecs = np.array([pool[j] for pool, j in zip(pools, sel)])
        return float(np.linalg.norm(min_norm_weights(vecs) @ vecs))

    sel = list(start)
    best = value(sel)
    for _ in range(DESCENT_SWEEPS):
        improved = False
        for i, pool in enumerate(pools):
            for j in range(len(pool)):
                if j == sel[i]:
                    continue
                trial = sel[:i] + [j] + sel[i + 1:]
                v = value(trial)
                if v < best - 1e-15:
                    best, sel, improved = v, trial, True
        if not improved:
            break
    return best, sel


@log_function_call(logger)
def uniform_dual_constant(scene: Scene, delta: float, p: EstimatorParams) -> DualReport:
    """Smallest ‖Σᵢ xᵢ*‖ over normals xᵢ* ∈ N_Ωᵢ(ωᵢ) at sampled ωᵢ near x̄, Σ‖xᵢ*‖ = 1

    Sets without a nonzero normal at any sample must carry xᵢ* = 0.  With no normals at
    all the constant is +∞ and flagged.
    """
    if not delta > 0:
        raise PreconditionError("delta must be > 0")
    dirs, owners, sampled = _normal_pools(scene, delta, p)
    active = [i for i in range(scene.m) if len(dirs[i])]
    report = DualReport("uniform", math.inf, float(delta), samples=sampled)
    xstars = np.zeros((scene.m, scene.dim))
    omega = np.repeat(scene.xbar[None], scene.m, axis=0)

    if not active:
        report.flags.append(FLAG_NO_NORMALS)
        logger.info("一致对偶常数: x̄ 附近没有非零法向量")
        return report
    if len(active) == 1:
        i = active[0]
        xstars[i], omega[i] = dirs[i][0], owners[i][0]
        report.value = 1.0
    elif len(active) == 2:
        i, j = active
        value, a, b, t = _best_pair(dirs[i], dirs[j], p.workers)
        xstars[i], xstars[j] = t * dirs[i][a], (1 - t) * dirs[j][b]
        omega[i], omega[j] = owners[i][a], owners[j][b]
        report.value = value
    else:
        pools = [dirs[i] for i in active]
        rng = rng_for(p, STREAM_DUAL)
        starts = [[0] * len(pools)] + [
            [int(rng.integers(len(pool))) for pool in pools] for _ in range(UNIFORM_RESTARTS)
        ]
        best, sel = min((_descend_selection(pools, s) for s in starts), key=lambda r: r[0])
        vecs = np.array([pool[j] for pool, j in zip(pools, sel)])
        lam = min_norm_weights(vecs)
        for k, (i, j) in enumerate(zip(active, sel)):
            xstars[i], omega[i] = lam[k] * vecs[k], owners[i][j]
        report.value = best

    report.witnesses.append(DualWitness(omega, xstars, float(report.value)))
    logger.info(f"一致对偶常数 = {report.value:.6g} (delta={delta:g})")
    return report


# -- subregularity certificate ------------------------------------------------------------


def _cap_directions(e: np.ndarray, angle: float, sweep: np.ndarray) -> np.ndarray:
    """Unit vectors within ``angle`` of the unit vector e, e first"""
    n = e.size
    if angle <= 0 or n == 1:
        return e[None]
    if n == 2:
        ts = np.linspace(-angle, angle, CAP_STEPS)
        ts = np.concatenate([[0.0], ts[ts != 0.0]])
        perp = np.array([-e[1], e[0]])
        return np.cos(ts)[:, None] * e + np.sin(ts)[:, None] * perp
    perp = sweep - (sweep @ e)[:, None] * e
    perp = _unique_rows(_unit_rows(perp, n))
    rings = [np.cos(t) * e + np.sin(t) * perp for t in (angle / 2, angle)]
    return np.vstack([e[None]] + rings)


def _capped_min_norm(vectors: np.ndarray, caps: np.ndarray) -> Tuple[float, np.ndarray]:
    """min ‖λ @ vectors‖ over Σλ = 1, 0 ≤ λᵢ ≤ capsᵢ; +inf when infeasible"""
    upper = np.minimum(caps, 1.0)
    total = upper.sum()
    if total < 1.0 - 1e-12:
        return math.inf, np.zeros(len(vectors))
    if np.all(caps >= 1.0):
        lam = min_norm_weights(vectors)
        return float(np.linalg.norm(lam @ vectors)), lam
    gram = vectors @ vectors.T
    result = minimize(
        lambda lam: float(lam @ gram @ lam), upper / total,
        jac=lambda lam: 2.0 * gram @ lam,
        bounds=[(0.0, float(u)) for u in upper],
        constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0}],
        method="SLSQP",
    )
    lam = np.clip(result.x, 0.0, upper)
    lam /= lam.sum()
    return float(np.linalg.norm(lam @ vectors)), lam


def _pair_capped(a: np.ndarray, ca: np.ndarray, b: np.ndarray,
                 cb: np.ndarray) -> Tuple[float, int, int, float]:
    """min ‖t·a + (1 − t)·b‖ with t ≤ cap_a and 1 − t ≤ cap_b"""
    diff = a[:, None, :] - b[None, :, :]
    dd = np.einsum("ijk,ijk->ij", diff, diff)
    num = -np.einsum("jk,ijk->ij", b, diff)
    lo = np.maximum(0.0, 1.0 - cb)[None, :]
    hi = np.minimum(1.0, ca)[:, None]
    t = np.divide(num, dd, out=np.zeros_like(dd), where=dd > 0)
    t = np.minimum(np.maximum(t, lo), hi)
    sums = t[..., None] * a[:, None, :] + (1 - t[..., None]) * b[None, :, :]
    norms = np.where(lo <= hi, np.linalg.norm(sums, axis=2), np.inf)
    k = int(np.argmin(norms))
    i, j = divmod(k, norms.shape[1])
    return float(norms[i, j]), i, j, float(t[i, j])


def _config_minimum(scene: Scene, x: np.ndarray, omegas: np.ndarray, rho: float,
                    epsilon: float, sweep: np.ndarray,
                    rng: np.random.Generator) -> Tuple[float, np.ndarray]:
    """Smallest ‖Σxᵢ*‖ over covectors meeting the support conditions at one configuration"""
    diff = x - omegas
    dist = np.linalg.norm(diff, axis=1)
    top = dist.max()
    active = np.flatnonzero(dist >= top - epsilon)
    pools, caps = [], []
    for i in active:
        cone = normal_cone(scene.sets[i], omegas[i])
        if dist[i] > epsilon:
            e = diff[i] / dist[i]
            angle = math.acos(min(1.0, max(-1.0, 1.0 - epsilon / dist[i])))
            cands = [_cap_directions(e, angle, sweep)]
            inside = cone.unit_directions(sweep)
            if len(inside):
                cands.append(inside[inside @ e >= math.cos(angle) - 1e-12])
            nearest = cone.project(e)
            if np.linalg.norm(nearest) > 1e-12:
                nearest = nearest / np.linalg.norm(nearest)
                if nearest @ e >= math.cos(angle) - 1e-12:
                    cands.append(nearest[None])
            pool = _unique_rows(np.vstack(cands))
        else:
            pool = _unique_rows(np.vstack([sweep, cone.unit_directions(sweep)]))
        d = cone.distance(pool)
        cap = np.divide(rho, d, out=np.full_like(d, np.inf), where=d > 1e-12)
        pools.append(pool)
        caps.append(cap)

    xstars = np.zeros_like(omegas)
    if len(active) == 1:
        feasible = np.flatnonzero(caps[0] >= 1.0)
        if not feasible.size:
            return math.inf, xstars
        xstars[active[0]] = pools[0][feasible[0]]
        return 1.0, xstars
    if len(active) == 2:
        value, a, b, t = _pair_capped(pools[0], caps[0], pools[1], caps[1])
        if math.isfinite(value):
            xstars[active[0]] = t * pools[0][a]
            xstars[active[1]] = (1 - t) * pools[1][b]
        return value, xstars

    def evaluate(sel):
        vecs = np.array([pool[j] for pool, j in zip(pools, sel)])
        return _capped_min_norm(vecs, np.array([c[j] for c, j in zip(caps, sel)]))

    best, best_sel = math.inf, None
    starts = [[0] * len(pools)] + [
        [int(rng.integers(len(pool))) for pool in pools] for _ in range(CERTIFICATE_RESTARTS)
    ]
    for sel in starts:
        value, _ = evaluate(sel)
        for _ in range(DESCENT_SWEEPS):
            improved = False
            for i, pool in enumerate(pools):
                for j in range(len(pool)):
                    trial = sel[:i] + [j] + sel[i + 1:]
                    v, _ = evaluate(trial)
                    if v < value - 1e-15:
                        value, sel, improved = v, trial, True
            if not improved:
                break
        if value < best:
            best, best_sel = value, sel
    if best_sel is not None and math.isfinite(best):
        _, lam = evaluate(best_sel)
        for k, (i, j) in enumerate(zip(active, best_sel)):
            xstars[i] = lam[k] * pools[k][j]
    return best, xstars


@log_function_call(logger)
def subreg_dual_certificate(scene: Scene, alpha: float, delta: float,
                            p: EstimatorParams) -> DualReport:
    """Sufficient dual test for subregularity

    For ρ < δ in the schedule, x ∈ B_ρ(x̄) and ωᵢ ∈ Ωᵢ ∩ B_ρ(x) with some ωᵢ ≠ x, the
    smallest ‖Σxᵢ*‖ is taken over covectors with Σ‖xᵢ*‖ = 1, xᵢ* = 0 off the (ε-fuzzy)
    set of farthest indices, xᵢ* within angle arccos(1 − ε/‖x − ωᵢ‖) of x − ωᵢ and
    d(xᵢ*, N_Ωᵢ(ωᵢ)) ≤ ρ.  The certificate passes iff every minimum exceeds alpha.
    ε is min(2·cell, 0.1·maxᵢ‖x − ωᵢ‖), cell being the ρ-scaled sample spacing.
    """
    if not alpha > 0 or not delta > 0:
        raise PreconditionError("alpha and delta must be > 0")
    sweep = unit_directions(scene.dim, p.directions)
    cell = p.ball_samples.cell_size / p.ball_samples.radius
    report = DualReport("subregularity certificate", math.inf, float(delta),
                        alpha=float(alpha), notes=[NOTE_SUFFICIENT_ONLY])
    candidates: List[DualWitness] = []
    eps_seen: List[float] = []

    for k, rho in enumerate(r for r in p.rho_schedule() if r < delta):
        X, W = slope_configurations(scene, rho, p, salt=k)
        dist = np.linalg.norm(X[:, None, :] - W, axis=2)
        f = dist.max(axis=1)
        admissible = (
            (f > p.bisection_tol * rho) & np.all(dist <= rho * (1 + 1e-12), axis=1)
            & (np.linalg.norm(X - scene.xbar, axis=1) <= rho * (1 + 1e-12))
        )
        idx = np.flatnonzero(admissible)
        report.samples += int(idx.size)
        if not idx.size:
            continue
        eps = np.minimum(2.0 * cell * rho, 0.1 * f[idx])
        eps_seen += [float(eps.min()), float(eps.max())]

        def chunk(sl, X=X, W=W, idx=idx, eps=eps, rho=rho, salt=k):
            rng = rng_for(p, STREAM_DUAL, salt * 1_000_003 + sl.start)
            best = (math.inf, None)
            for r in range(sl.start, sl.stop):
                row = idx[r]
                value, xs = _config_minimum(scene, X[row], W[row], rho, float(eps[r]),
                                            sweep, rng)
                if value < best[0]:
                    best = (value, DualWitness(W[row].copy(), xs, value, X[row].copy(),
                                               rho, float(eps[r])))
            return best

        for value, witness in ordered_map(chunk, chunk_slices(idx.size), p.workers):
            if witness is not None:
                candidates.append(witness)
        logger.debug(f"certificate rho={rho:.4g} configs={idx.size}")

    if not report.samples:
        report.passed = True
        report.flags.append(FLAG_NO_CONFIGS)
        logger.info("对偶证书: 没有可行配置, 空泛通过")
        return report

    candidates.sort(key=lambda w: w.norm_of_sum)
    report.witnesses = candidates[:MAX_WITNESSES]
    report.value = candidates[0].norm_of_sum if candidates else math.inf
    report.passed = bool(report.value > alpha)
    report.epsilon = (min(eps_seen), max(eps_seen))
    logger.info(
        f"对偶证书{'通过' if report.passed else '失败'}: "
        f"min ‖Σx*‖ = {report.value:.6g}, alpha={alpha:g}"
    )
    return report
