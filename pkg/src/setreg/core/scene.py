#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Scenes: a collection of closed sets with a common reference point

A scene file is a UTF-8 JSON document::

    {"dim": 2, "xbar": [0, 0],
     "sets": [{"type": "affine", "p": [0, 0], "basis": [[1, 0]]}, ...],
     "intersection": {...}, "labels": ["Ω₁", "Ω₂"]}

Primitive tags are ``halfspace|ball|box|affine|polyhedron|parabola_epi|union|translate``;
box bounds accept the strings ``"inf"`` and ``"-inf"``.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    DimensionMismatchError, NotInIntersectionError, PreconditionError, SceneParseError
)
from .geometry import (
    INVARIANT_TOL, Affine, Ball, Box, GridSpec, Halfspace, ParabolaEpi, Polyhedron,
    SetExpr, Translate, Union, grid_nearest_member
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

XBAR_TOL = 1e-12
PRIMITIVE_TAGS = (
    "halfspace", "ball", "box", "affine", "polyhedron", "parabola_epi", "union", "translate"
)

# test lattice for the declared-intersection consistency check
_INTERSECTION_CHECK_GRID = GridSpec(1.0, 7)


@dataclass(frozen=True, eq=False)
class Scene:
    """Sets Ω₁, …, Ω_m in R^dim, a common point x̄ and an optional exact intersection"""

    dim: int
    sets: Tuple[SetExpr, ...]
    xbar: np.ndarray
    intersection: Optional[SetExpr] = None
    labels: Tuple[str, ...] = ()
    name: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        sets = tuple(self.sets)
        xbar = np.array(self.xbar, dtype=float).reshape(-1)
        xbar.setflags(write=False)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "xbar", xbar)
        object.__setattr__(self, "labels", tuple(self.labels))

        if len(sets) < 2:
            raise PreconditionError("a scene needs at least two sets")
        if xbar.size != self.dim:
            raise DimensionMismatchError(self.dim, xbar.size)
        for s in sets:
            if s.dim != self.dim:
                raise DimensionMismatchError(self.dim, s.dim)
        for i, s in enumerate(sets):
            d = s.distance(xbar)
            if d > XBAR_TOL:
                raise NotInIntersectionError(i + 1, d)
        if self.labels and len(self.labels) != len(sets):
            raise PreconditionError("labels must name every set")
        if self.intersection is not None:
            self._check_intersection()

    def _check_intersection(self) -> None:
        inter = self.intersection
        if inter.dim != self.dim:
            raise DimensionMismatchError(self.dim, inter.dim)
        d = inter.distance(self.xbar)
        if d > XBAR_TOL:
            raise PreconditionError(f"x̄ is not in the declared intersection (distance {d:.3e})")
        lattice_pts = inter.project(self.xbar + _INTERSECTION_CHECK_GRID.lattice(self.dim))
        worst = self.max_residual(lattice_pts).max()
        if worst > INVARIANT_TOL:
            raise PreconditionError(
                f"declared intersection leaves the sets (residual {worst:.3e})"
            )

    # -- basic quantities -------------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def is_convex(self) -> bool:
        return all(s.is_convex for s in self.sets)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"Ω{i + 1}"

    def residuals(self, x) -> np.ndarray:
        """Distances d(x, Ωᵢ), shape (N, m)"""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return np.stack([s.distance(pts) for s in self.sets], axis=1)

    def max_residual(self, x) -> np.ndarray:
        """maxᵢ d(x, Ωᵢ), shape (N,)"""
        return self.residuals(x).max(axis=1)

    def projections(self, x) -> np.ndarray:
        """Nearest points of every set, shape (N, m, n)"""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return np.stack([s.project(pts) for s in self.sets], axis=1)

    # -- intersection distances -------------------------------------------------------

    def intersection_distance(self, x, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
        """d(x, ∩Ωᵢ) for a batch of points

        Exact through the declared intersection when present, otherwise the grid
        oracle on the conjunction of memberships.  ``grid.radius`` is absolute.

        Returns:
            (distances, found)
        """
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if self.intersection is not None:
            return self.intersection.distance(pts), np.ones(len(pts), dtype=bool)
        offsets = np.zeros((len(pts), self.m, self.dim))
        return self._brute_translated(pts, offsets, grid, np.full(len(pts), grid.radius))

    def translated_intersection_distance(
        self, x, offsets, grid: GridSpec, radii=None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """d(x, ∩(Ωᵢ − offsetᵢ)) for a batch of points and offset tuples

        Args:
            x: points, shape (T, n)
            offsets: perturbation tuples, shape (T, m, n)
            grid: oracle lattice; ``radii`` overrides its radius per row
            radii: optional per-row lattice half-widths, shape (T,)

        Returns:
            (distances, found); distances are +inf where the oracle found no member
        """
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        offsets = np.asarray(offsets, dtype=float).reshape(len(pts), self.m, self.dim)
        if radii is None:
            radii = np.full(len(pts), grid.radius)
        radii = np.asarray(radii, dtype=float)
        values = np.empty(len(pts))
        found = np.ones(len(pts), dtype=bool)

        # ∩(Ωᵢ − t) = ∩Ωᵢ − t when every offset is the same vector
        equal = np.zeros(len(pts), dtype=bool)
        if self.intersection is not None:
            spread = np.abs(offsets - offsets[:, :1]).max(axis=(1, 2))
            equal = spread == 0.0
        if np.any(equal):
            values[equal] = self.intersection.distance(pts[equal] + offsets[equal, 0])
        rest = ~equal
        if np.any(rest):
            values[rest], found[rest] = self._brute_translated(
                pts[rest], offsets[rest], grid, radii[rest]
            )
        return values, found

    def shifted_max_residual(self, samples: np.ndarray, shifts: np.ndarray) -> np.ndarray:
        """maxᵢ d(sample + shiftᵢ, Ωᵢ) for samples (R, K, n) and shift tuples (R, m, n)"""
        R, K, n = samples.shape
        worst = np.zeros((R, K))
        for i, s in enumerate(self.sets):
            moved = samples + shifts[:, i][:, None, :]
            worst = np.maximum(worst, s.distance(moved.reshape(-1, n)).reshape(R, K))
        return worst

    def _brute_translated(self, pts, offsets, grid, radii):
        def residual(samples, rows):
            return self.shifted_max_residual(samples, offsets[rows])

        return grid_nearest_member(pts, residual, grid, radii)

    # -- derived scenes ---------------------------------------------------------------

    def translated(self, t) -> "Scene":
        """Every set, x̄ and the intersection moved by t"""
        t = np.asarray(t, dtype=float)
        return Scene(
            dim=self.dim,
            sets=tuple(Translate(s, t) for s in self.sets),
            xbar=self.xbar + t,
            intersection=None if self.intersection is None else Translate(self.intersection, t),
            labels=self.labels,
            name=self.name,
        )

    def scaled(self, t: float) -> "Scene":
        """Every set scaled by t > 0 about x̄"""
        return Scene(
            dim=self.dim,
            sets=tuple(s.scaled(t, self.xbar) for s in self.sets),
            xbar=self.xbar,
            intersection=None if self.intersection is None
            else self.intersection.scaled(t, self.xbar),
            labels=self.labels,
            name=self.name,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "dim": self.dim,
            "xbar": self.xbar.tolist(),
            "sets": [s.to_dict() for s in self.sets],
        }
        if self.intersection is not None:
            data["intersection"] = self.intersection.to_dict()
        if self.labels:
            data["labels"] = list(self.labels)
        return data


# -- parsing ------------------------------------------------------------------------


def _require(node: Dict[str, Any], key: str, where: str):
    if key not in node:
        raise SceneParseError(f"{where}: missing field '{key}'")
    return node[key]


def _vector(value, where: str) -> np.ndarray:
    try:
        arr = np.array([float(v) for v in value], dtype=float)
    except (TypeError, ValueError) as e:
        raise SceneParseError(f"{where}: expected a list of numbers ({e})") from e
    return arr


def parse_set(node: Any, where: str = "set") -> SetExpr:
    """Build a SetExpr from one tagged JSON object"""
    if not isinstance(node, dict):
        raise SceneParseError(f"{where}: expected an object")
    tag = node.get("type")
    if tag not in PRIMITIVE_TAGS:
        raise SceneParseError(f"{where}: unknown type {tag!r}")

    if tag == "halfspace":
        return Halfspace(_vector(_require(node, "a", where), where),
                         float(_require(node, "b", where)))
    if tag == "ball":
        return Ball(_vector(_require(node, "c", where), where), float(_require(node, "r", where)))
    if tag == "box":
        return Box(_vector(_require(node, "lo", where), where),
                   _vector(_require(node, "hi", where), where))
    if tag == "affine":
        basis = node.get("basis", [])
        if not isinstance(basis, list):
            raise SceneParseError(f"{where}: basis must be a list of vectors")
        return Affine(_vector(_require(node, "p", where), where),
                      [_vector(v, where) for v in basis])
    if tag == "polyhedron":
        rows = _require(node, "rows", where)
        if not isinstance(rows, list):
            raise SceneParseError(f"{where}: rows must be a list")
        parsed = []
        for k, row in enumerate(rows):
            if not isinstance(row, dict):
                raise SceneParseError(f"{where}.rows[{k}]: expected an object")
            parsed.append((_vector(_require(row, "a", where), where),
                           float(_require(row, "b", where))))
        return Polyhedron(parsed)
    if tag == "parabola_epi":
        return ParabolaEpi(float(_require(node, "c", where)))
    if tag == "union":
        children = _require(node, "children", where)
        if not isinstance(children, list):
            raise SceneParseError(f"{where}: children must be a list")
        return Union([parse_set(c, f"{where}.children[{k}]") for k, c in enumerate(children)])
    # translate
    return Translate(parse_set(_require(node, "child", where), f"{where}.child"),
                     _vector(_require(node, "offset", where), where))


def scene_from_dict(data: Any, name: str = "") -> Scene:
    """Validated Scene from a decoded scene document

    Schema problems, bad primitive parameters and dimension errors become
    ``SceneParseError``; an infeasible polyhedron and an x̄ outside a set keep their
    own exception types.
    """
    if not isinstance(data, dict):
        raise SceneParseError("scene document must be a JSON object")
    try:
        dim = int(_require(data, "dim", "scene"))
        xbar = _vector(_require(data, "xbar", "scene"), "xbar")
        raw_sets = _require(data, "sets", "scene")
        if not isinstance(raw_sets, list):
            raise SceneParseError("scene: sets must be a list")
        sets = [parse_set(node, f"sets[{k}]") for k, node in enumerate(raw_sets)]
        inter = data.get("intersection")
        intersection = parse_set(inter, "intersection") if inter is not None else None
        labels = data.get("labels") or ()
        return Scene(dim=dim, sets=tuple(sets), xbar=xbar, intersection=intersection,
                     labels=tuple(str(v) for v in labels), name=name,
                     metadata={k: v for k, v in data.items()
                               if k not in ("dim", "xbar", "sets", "intersection", "labels")})
    except (PreconditionError, DimensionMismatchError) as e:
        raise SceneParseError(str(e)) from e
    except (TypeError, ValueError) as e:
        raise SceneParseError(f"malformed value: {e}") from e


def parse_scene(text: str, name: str = "") -> Scene:
    """Parse a scene document from JSON text"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneParseError(f"invalid JSON: {e}") from e
    return scene_from_dict(data, name=name)


def load_scene(path) -> Scene:
    """Read and parse a scene file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SceneParseError("file not found", str(path)) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SceneParseError(f"cannot read file: {e}", str(path)) from e
    try:
        scene = parse_scene(text, name=path.stem)
    except SceneParseError as e:
        if e.path is None:
            raise SceneParseError(e.detail, str(path)) from e
        raise
    logger.debug(f"场景加载成功: {path} (m={scene.m}, dim={scene.dim})")
    return scene


def make_scene(sets: Sequence[SetExpr], xbar, intersection: Optional[SetExpr] = None,
               labels: Sequence[str] = (), name: str = "") -> Scene:
    """Scene from already-built sets; the dimension is read off x̄"""
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    return Scene(dim=xbar.size, sets=tuple(sets), xbar=xbar, intersection=intersection,
                 labels=tuple(labels), name=name)
