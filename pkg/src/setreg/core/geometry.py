#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Closed sets in R^n as expression trees of projectable primitives

Every primitive has an exact projection; distances are read off the projection so
that ``‖x − project(s, x)‖ = distance(s, x)`` holds to rounding.  All operations accept
a single point of shape ``(n,)`` or a batch of shape ``(N, n)``.

A grid oracle (``brute_distance``) gives an independent estimate of every distance and
is used to validate the exact computations.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, nnls

from .exceptions import (
    DimensionMismatchError, InfeasiblePolyhedronError, PreconditionError
)

MEMBERSHIP_TOL = 1e-9
INVARIANT_TOL = 1e-8

# half-width, in cells, of the window searched at each refinement level
REFINE_HALF_WIDTH = 4
REFINE_RETRIES = 2


def _as_points(x, dim: int) -> Tuple[np.ndarray, bool]:
    """Return ``(points (N, dim), single)`` for a point or a batch of points"""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimensionMismatchError(dim, pts.shape[-1] if pts.ndim else 0)
    return pts, single


def _frozen(values, ndim: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=float, ndmin=ndim)
    arr.setflags(write=False)
    return arr


class SetExpr:
    """A nonempty closed set in R^dim"""

    kind = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise PreconditionError(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)

    # -- public API -------------------------------------------------------------------

    def distance(self, x):
        pts, single = _as_points(x, self.dim)
        d = self._distance(pts)
        return float(d[0]) if single else d

    def project(self, x):
        pts, single = _as_points(x, self.dim)
        p = self._project(pts)
        return p[0] if single else p

    def contains(self, x, tol: float = MEMBERSHIP_TOL):
        if tol < 0:
            raise PreconditionError("tolerance must be nonnegative")
        d = self.distance(x)
        return bool(d <= tol) if np.ndim(d) == 0 else d <= tol

    def translated(self, offset) -> "Translate":
        return Translate(self, offset)

    def scaled(self, t: float, center=None) -> "SetExpr":
        """The image of the set under x ↦ center + t·(x − center), t > 0"""
        if not t > 0:
            raise PreconditionError("scale factor must be > 0")
        if center is None or not np.any(center):
            return self._scaled(float(t))
        center = np.asarray(center, dtype=float)
        return Translate(Translate(self, -center)._scaled(float(t)), center)

    def _scaled(self, t: float) -> "SetExpr":
        raise NotImplementedError

    @property
    def is_convex(self) -> bool:
        return True

    def children(self) -> Tuple["SetExpr", ...]:
        return ()

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- per-primitive kernels (batched) ----------------------------------------------

    def _project(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _distance(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - self._project(pts), axis=1)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class Halfspace(SetExpr):
    """{x : ⟨a, x⟩ ≤ b}"""

    kind = "halfspace"

    def __init__(self, a: Sequence[float], b: float):
        a = _frozen(a)
        super().__init__(a.size)
        norm = float(np.linalg.norm(a))
        if not norm > 0 or not np.all(np.isfinite(a)):
            raise PreconditionError("halfspace normal must be a finite nonzero vector")
        self.a = a
        self.b = float(b)
        self._norm = norm

    def _excess(self, pts):
        return np.maximum(pts @ self.a - self.b, 0.0)

    def _distance(self, pts):
        return self._excess(pts) / self._norm

    def _project(self, pts):
        step = self._excess(pts) / self._norm ** 2
        return pts - step[:, None] * self.a

    def _scaled(self, t):
        return Halfspace(self.a, t * self.b)

    def to_dict(self):
        return {"type": "halfspace", "a": self.a.tolist(), "b": self.b}


class Ball(SetExpr):
    """{x : ‖x − c‖ ≤ r}"""

    kind = "ball"

    def __init__(self, center: Sequence[float], radius: float):
        center = _frozen(center)
        super().__init__(center.size)
        if not radius >= 0:
            raise PreconditionError("ball radius must be >= 0")
        self.center = center
        self.radius = float(radius)

    def _distance(self, pts):
        return np.maximum(np.linalg.norm(pts - self.center, axis=1) - self.radius, 0.0)

    def _project(self, pts):
        diff = pts - self.center
        norms = np.linalg.norm(diff, axis=1)
        outside = norms > self.radius
        scale = np.ones_like(norms)
        scale[outside] = self.radius / norms[outside]
        return self.center + diff * scale[:, None]

    def _scaled(self, t):
        return Ball(t * self.center, t * self.radius)

    def to_dict(self):
        return {"type": "ball", "c": self.center.tolist(), "r": self.radius}


class Box(SetExpr):
    """Componentwise intervals [lo, hi]; infinite bounds encode unbounded directions"""

    kind = "box"

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo, hi = _frozen(lo), _frozen(hi)
        if lo.shape != hi.shape:
            raise PreconditionError("box bounds must have equal length")
        super().__init__(lo.size)
        if np.any(lo > hi) or np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise PreconditionError("box requires lo <= hi with lo < +inf and hi > -inf")
        self.lo = lo
        self.hi = hi

    def _project(self, pts):
        return np.clip(pts, self.lo, self.hi)

    def _scaled(self, t):
        return Box(t * self.lo, t * self.hi)

    def to_dict(self):
        return {"type": "box", "lo": [_bound(v) for v in self.lo],
                "hi": [_bound(v) for v in self.hi]}


def _bound(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


class Affine(SetExpr):
    """p + span(basis); the basis is orthonormalized at construction"""

    kind = "affine"

    def __init__(self, point: Sequence[float], basis: Sequence[Sequence[float]] = ()):
        point = _frozen(point)
        super().__init__(point.size)
        raw = np.array(basis, dtype=float).reshape(-1, self.dim)
        if raw.shape[0] and np.linalg.matrix_rank(raw) < raw.shape[0]:
            raise PreconditionError("affine basis vectors must be linearly independent")
        if raw.shape[0]:
            q, _ = np.linalg.qr(raw.T)
            q = q[:, :raw.shape[0]]
        else:
            q = np.zeros((self.dim, 0))
        q.setflags(write=False)
        self.point = point
        self.basis = q.T  # rows are orthonormal directions
        self.raw_basis = _frozen(raw, 2)

    def _project(self, pts):
        coords = (pts - self.point) @ self.basis.T
        return self.point + coords @ self.basis

    def _scaled(self, t):
        return Affine(t * self.point, self.raw_basis)

    def to_dict(self):
        return {"type": "affine", "p": self.point.tolist(),
                "basis": self.raw_basis.reshape(-1, self.dim).tolist()}


class Polyhedron(SetExpr):
    """Finite intersection of halfspaces, dimension at most 3

    Projection enumerates the affine hulls of faces: for every linearly independent
    subset of rows the point is projected onto ``{y : A_S y = b_S}`` and feasible
    candidates compete on distance.  The true projection lies in the relative interior
    of some face, so it is always among the candidates.
    """

    kind = "polyhedron"
    MAX_DIM = 3
    FEAS_TOL = 1e-9

    def __init__(self, rows: Sequence[Tuple[Sequence[float], float]]):
        if not rows:
            raise PreconditionError("polyhedron needs at least one row")
        A = np.array([r[0] for r in rows], dtype=float)
        b = np.array([r[1] for r in rows], dtype=float)
        super().__init__(A.shape[1])
        if self.dim > self.MAX_DIM:
            raise PreconditionError(
                f"polyhedra are supported up to dimension {self.MAX_DIM}, got {self.dim}"
            )
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise PreconditionError("polyhedron rows must have nonzero normals")
        self.raw_rows = [(list(map(float, a)), float(v)) for a, v in zip(A, b)]
        self.A = _frozen(A / norms[:, None], 2)
        self.b = _frozen(b / norms)
        self._check_feasible()
        self._faces = self._enumerate_faces()

    def _check_feasible(self) -> None:
        result = linprog(
            np.zeros(self.dim), A_ub=self.A, b_ub=self.b,
            bounds=[(None, None)] * self.dim, method="highs"
        )
        if result.status == 2:
            raise InfeasiblePolyhedronError("polyhedron rows describe an empty set")

    def _enumerate_faces(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        faces = []
        k = self.A.shape[0]
        for size in range(1, min(k, self.dim) + 1):
            for subset in itertools.combinations(range(k), size):
                rows = self.A[list(subset)]
                if np.linalg.matrix_rank(rows) < size:
                    continue
                gram_inv = np.linalg.inv(rows @ rows.T)
                faces.append((rows, self.b[list(subset)], gram_inv))
        return faces

    def _project(self, pts):
        slack = pts @ self.A.T - self.b
        inside = np.all(slack <= self.FEAS_TOL, axis=1)
        best = pts.copy()
        best_d = np.where(inside, 0.0, np.inf)
        todo = ~inside
        if not np.any(todo):
            return best
        sub = pts[todo]
        sub_best = np.zeros_like(sub)
        sub_d = np.full(sub.shape[0], np.inf)
        for rows, rhs, gram_inv in self._faces:
            cand = sub - ((sub @ rows.T - rhs) @ gram_inv) @ rows
            feasible = np.all(cand @ self.A.T - self.b <= self.FEAS_TOL, axis=1)
            d = np.where(feasible, np.linalg.norm(sub - cand, axis=1), np.inf)
            better = d < sub_d
            sub_d[better] = d[better]
            sub_best[better] = cand[better]
        best[todo] = sub_best
        best_d[todo] = sub_d
        return best

    def _scaled(self, t):
        return Polyhedron([(a, t * v) for a, v in self.raw_rows])

    def to_dict(self):
        return {"type": "polyhedron", "rows": [{"a": a, "b": v} for a, v in self.raw_rows]}


class ParabolaEpi(SetExpr):
    """{(u, v) : v ≥ c·u²} in the plane"""

    kind = "parabola_epi"
    NEWTON_STEPS = 3

    def __init__(self, c: float):
        super().__init__(2)
        if not c > 0:
            raise PreconditionError("parabola coefficient must be > 0")
        self.c = float(c)

    def _roots(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Real roots of 2c²u³ + (1 − 2cq)u − p = 0, NaN-padded to three columns"""
        c = self.c
        P = (1.0 - 2.0 * c * q) / (2.0 * c * c)
        Q = -p / (2.0 * c * c)
        disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
        roots = np.full((p.size, 3), np.nan)

        one = disc >= 0
        if np.any(one):
            s = np.sqrt(disc[one])
            roots[one, 0] = np.cbrt(-Q[one] / 2.0 + s) + np.cbrt(-Q[one] / 2.0 - s)

        three = ~one  # P < 0 here
        if np.any(three):
            Pt, Qt = P[three], Q[three]
            m = 2.0 * np.sqrt(-Pt / 3.0)
            arg = np.clip(3.0 * Qt / (Pt * m), -1.0, 1.0)
            phi = np.arccos(arg) / 3.0
            for k in range(3):
                roots[three, k] = m * np.cos(phi - 2.0 * np.pi * k / 3.0)

        # Newton polish on the original cubic
        lin = 1.0 - 2.0 * c * q
        for _ in range(self.NEWTON_STEPS):
            h = 2.0 * c * c * roots ** 3 + lin[:, None] * roots - p[:, None]
            dh = 6.0 * c * c * roots ** 2 + lin[:, None]
            ok = np.abs(dh) > 1e-14
            roots = np.where(ok, roots - np.divide(h, dh, where=ok, out=np.zeros_like(h)),
                             roots)
        return roots

    def _project(self, pts):
        p, q = pts[:, 0], pts[:, 1]
        out = pts.copy()
        outside = q < self.c * p * p
        if not np.any(outside):
            return out
        po, qo = p[outside], q[outside]
        roots = self._roots(po, qo)
        d2 = (roots - po[:, None]) ** 2 + (self.c * roots ** 2 - qo[:, None]) ** 2
        d2 = np.where(np.isnan(d2), np.inf, d2)
        best = d2.min(axis=1)
        # ties go to the root with the largest first coordinate
        tied = d2 <= best[:, None] + 1e-12 * (1.0 + best[:, None])
        u = np.max(np.where(tied, roots, -np.inf), axis=1)
        out[outside, 0] = u
        out[outside, 1] = self.c * u * u
        return out

    def _scaled(self, t):
        return ParabolaEpi(self.c / t)

    def to_dict(self):
        return {"type": "parabola_epi", "c": self.c}


class Union(SetExpr):
    """Finite union; distance is the minimum over children"""

    kind = "union"

    def __init__(self, children: Sequence[SetExpr]):
        children = tuple(children)
        if len(children) < 2:
            raise PreconditionError("union needs at least two children")
        super().__init__(children[0].dim)
        for child in children:
            if child.dim != self.dim:
                raise DimensionMismatchError(self.dim, child.dim)
        self._children = children

    def children(self):
        return self._children

    @property
    def is_convex(self) -> bool:
        return False

    def child_distances(self, pts: np.ndarray) -> np.ndarray:
        return np.stack([child._distance(pts) for child in self._children])

    def _distance(self, pts):
        return self.child_distances(pts).min(axis=0)

    def _project(self, pts):
        dists = self.child_distances(pts)
        # argmin returns the lowest index on ties
        winner = np.argmin(dists, axis=0)
        out = np.empty_like(pts)
        for i, child in enumerate(self._children):
            mask = winner == i
            if np.any(mask):
                out[mask] = child._project(pts[mask])
        return out

    def _scaled(self, t):
        return Union([c._scaled(t) for c in self._children])

    def to_dict(self):
        return {"type": "union", "children": [c.to_dict() for c in self._children]}


class Translate(SetExpr):
    """child + offset"""

    kind = "translate"

    def __init__(self, child: SetExpr, offset: Sequence[float]):
        offset = _frozen(offset)
        super().__init__(child.dim)
        if offset.size != child.dim:
            raise DimensionMismatchError(child.dim, offset.size)
        self.child = child
        self.offset = offset

    def children(self):
        return (self.child,)

    @property
    def is_convex(self) -> bool:
        return self.child.is_convex

    def _distance(self, pts):
        return self.child._distance(pts - self.offset)

    def _project(self, pts):
        return self.child._project(pts - self.offset) + self.offset

    def _scaled(self, t):
        return Translate(self.child._scaled(t), t * self.offset)

    def to_dict(self):
        return {"type": "translate", "child": self.child.to_dict(),
                "offset": self.offset.tolist()}


# -- operation-style entry points ---------------------------------------------------


def distance(s: SetExpr, x):
    """Exact Euclidean distance from x to s"""
    return s.distance(x)


def project(s: SetExpr, x):
    """A nearest point of s to x (lowest-index child on union ties)"""
    return s.project(x)


def membership(s: SetExpr, x, tol: float = MEMBERSHIP_TOL):
    """True iff distance(s, x) ≤ tol"""
    return s.contains(x, tol)


# -- grid oracle ----------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Cubic sample lattice of half-width ``radius`` with refinement levels"""

    radius: float
    points_per_axis: int
    refinement_levels: int = 0

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError("grid radius must be > 0")
        if self.points_per_axis < 3:
            raise PreconditionError("grid needs at least 3 points per axis")
        if self.refinement_levels < 0:
            raise PreconditionError("refinement levels must be >= 0")

    @property
    def cell_size(self) -> float:
        return 2.0 * self.radius / (self.points_per_axis - 1)

    def cell_diagonal(self, dim: int, level: int = 0) -> float:
        return self.cell_size / 2 ** level * math.sqrt(dim)

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec(self.radius * factor, self.points_per_axis, self.refinement_levels)

    def lattice(self, dim: int) -> np.ndarray:
        """Offsets of the level-0 lattice, shape (points_per_axis**dim, dim)"""
        axis = np.linspace(-self.radius, self.radius, self.points_per_axis)
        return np.array(list(itertools.product(axis, repeat=dim)))

    def total_samples(self, dim: int) -> int:
        window = (2 * REFINE_HALF_WIDTH + 1) ** dim
        return self.points_per_axis ** dim + self.refinement_levels * window


def refine_stencil(dim: int) -> np.ndarray:
    steps = np.arange(-REFINE_HALF_WIDTH, REFINE_HALF_WIDTH + 1, dtype=float)
    return np.array(list(itertools.product(steps, repeat=dim)))


def min_norm_weights(vectors: np.ndarray) -> np.ndarray:
    """Simplex weights λ of the minimum-norm point λ @ vectors of conv(vectors)

    Two vectors are solved in closed form; more go through a nonnegative least-squares
    problem with the normalization row weighted heavily.
    """
    vectors = np.asarray(vectors, dtype=float)
    k = len(vectors)
    if k == 0:
        raise PreconditionError("convex hull of an empty set")
    if k == 1:
        return np.ones(1)
    if k == 2:
        a, b = vectors
        diff = a - b
        dd = float(diff @ diff)
        lam = 0.0 if dd == 0 else min(max(-float(b @ diff) / dd, 0.0), 1.0)
        return np.array([lam, 1.0 - lam])
    weight = 1e3
    A = np.vstack([vectors.T, weight * np.ones((1, k))])
    rhs = np.concatenate([np.zeros(vectors.shape[1]), [weight]])
    lam, _ = nnls(A, rhs)
    return lam / lam.sum()


@dataclass(frozen=True)
class BruteEstimate:
    """Result of the grid oracle; ``found`` is False for the unbounded-below sentinel"""

    value: float
    found: bool
    samples: int
    cell_diagonal: float

    @property
    def unbounded_below(self) -> bool:
        return not self.found


def grid_nearest_member(
    centers: np.ndarray,
    residual: Callable[[np.ndarray], np.ndarray],
    grid: GridSpec,
    radii: np.ndarray = None,
    norm: Callable[[np.ndarray], np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Batched grid search for the member nearest to each center

    Args:
        centers: query points, shape (T, n)
        residual: ``residual(samples, rows)`` maps sample points of shape (R, K, n)
            belonging to query rows ``rows`` to residuals of shape (R, K);
            a sample is a member when its residual is at most the cell diagonal of the
            current level
        grid: lattice; ``grid.radius`` is overridden per query by ``radii``
        radii: optional per-query lattice half-widths, shape (T,)
        norm: distance of offsets of shape (..., n), Euclidean by default

    Returns:
        (distances, found): distances are +inf where no member was found
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if norm is None:
        def norm(v):
            return np.linalg.norm(v, axis=-1)
    T, n = centers.shape
    if radii is None:
        radii = np.full(T, grid.radius)
    unit = grid.lattice(n) / grid.radius
    cell = 2.0 * radii / (grid.points_per_axis - 1)

    samples = centers[:, None, :] + radii[:, None, None] * unit[None]
    tol = cell * math.sqrt(n)
    res = residual(samples, np.arange(T))
    dist = norm(samples - centers[:, None, :])
    dist = np.where(res <= tol[:, None], dist, np.inf)
    best = np.argmin(dist, axis=1)
    values = dist[np.arange(T), best]
    found = np.isfinite(values)
    incumbent = samples[np.arange(T), best]

    stencil = refine_stencil(n)
    for level in range(1, grid.refinement_levels + 1):
        active = np.flatnonzero(found)
        if active.size == 0:
            break
        h = cell[active] / 2 ** level
        level_tol = h * math.sqrt(n)
        anchor = incumbent[active].copy()
        pending = np.ones(active.size, dtype=bool)
        for _ in range(REFINE_RETRIES + 1):
            sel = np.flatnonzero(pending)
            if sel.size == 0:
                break
            rows = active[sel]
            pts = anchor[sel, None, :] + h[sel, None, None] * stencil[None]
            res = residual(pts, rows)
            d = norm(pts - centers[rows, None, :])
            d = np.where(res <= level_tol[sel, None], d, np.inf)
            idx = np.argmin(d, axis=1)
            level_best = d[np.arange(sel.size), idx]
            hit = np.isfinite(level_best)
            values[rows[hit]] = level_best[hit]
            incumbent[rows[hit]] = pts[np.flatnonzero(hit), idx[hit]]
            pending[sel[hit]] = False
            # missed windows slide toward the lowest residual before the next try
            miss = np.flatnonzero(~hit)
            anchor[sel[miss]] = pts[miss, np.argmin(res[miss], axis=1)]
        # a near miss at this resolution is not a member
        lost = active[pending]
        found[lost] = False
        values[lost] = np.inf
    return values, found


def brute_distance(s: SetExpr, x, g: GridSpec) -> BruteEstimate:
    """Grid-oracle distance from x to s, independent of the exact projections"""
    pts, _ = _as_points(x, s.dim)

    def residual(samples, rows):
        flat = samples.reshape(-1, s.dim)
        return s._distance(flat).reshape(samples.shape[:2])

    values, found = grid_nearest_member(pts[:1], residual, g)
    return BruteEstimate(
        value=float(values[0]),
        found=bool(found[0]),
        samples=g.total_samples(s.dim),
        cell_diagonal=g.cell_diagonal(s.dim, g.refinement_levels),
    )
