#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Deterministic samplers for balls, spheres and perturbation tuples

Canonical samples (axis and diagonal directions, polar radii, a Cartesian lattice)
are always present.  Seeded random samples are appended as extra points and never
displace canonical ones, so degenerate configurations that sit on an axis are always
visited.  Every random stream is derived from ``(seed, stream id)`` and therefore does
not depend on worker count or call order.
"""

import itertools
import math
from typing import List

import numpy as np

from .config import EstimatorParams

# stream ids for np.random.default_rng([seed, stream])
STREAM_BALL = 1
STREAM_TUPLES = 2
STREAM_SLOPE = 3
STREAM_DUAL = 4
STREAM_SCENES = 5


def rng_for(params: EstimatorParams, stream: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([params.seed, stream, salt])


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Unit vectors containing every ±axis and diagonal direction

    In the plane ``count`` is rounded up to a multiple of 8 and the directions are
    equally spaced angles.  In higher dimensions the canonical set is followed by a
    Fibonacci sphere of ``count`` points.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        k = 8 * max(1, math.ceil(count / 8))
        angles = 2.0 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(angles), np.sin(angles)])

    canonical: List[np.ndarray] = []
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=dim):
        v = np.array(signs)
        if np.any(v):
            canonical.append(v / np.linalg.norm(v))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    extra = []
    if dim == 3:
        for i in range(count):
            z = 1.0 - 2.0 * (i + 0.5) / count
            r = math.sqrt(max(0.0, 1.0 - z * z))
            extra.append(np.array([r * math.cos(golden * i), r * math.sin(golden * i), z]))
    return np.array(canonical + extra)


def unit_ball_pattern(dim: int, params: EstimatorParams) -> np.ndarray:
    """Canonical points of the closed unit ball: center, polar rings and lattice"""
    dirs = unit_directions(dim, params.directions)
    levels = np.arange(1, params.radial_levels + 1) / params.radial_levels
    rings = (levels[:, None, None] * dirs[None]).reshape(-1, dim)
    lattice = params.ball_samples.lattice(dim) / params.ball_samples.radius
    lattice = lattice[np.linalg.norm(lattice, axis=1) <= 1.0 + 1e-12]
    return np.vstack([np.zeros((1, dim)), rings, lattice])


def random_ball(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform samples of the unit ball"""
    if count <= 0:
        return np.zeros((0, dim))
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(count) ** (1.0 / dim)
    return g * r[:, None]


def random_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def ball_points(center, radius: float, params: EstimatorParams, salt: int = 0) -> np.ndarray:
    """Canonical ball samples around center plus seeded extras"""
    center = np.asarray(center, dtype=float)
    dim = center.size
    pattern = unit_ball_pattern(dim, params)
    extras = random_ball(rng_for(params, STREAM_BALL, salt), params.jitter_samples, dim)
    return center + radius * np.vstack([pattern, extras])


def perturbation_tuples(dim: int, m: int, params: EstimatorParams,
                        cross: bool = False, salt: int = 0) -> np.ndarray:
    """Unit-direction tuples of shape (T, m, dim)

    Families: all-equal ``(d, …, d)``, pairwise-opposed ``(d, −d, d, …)``, for
    ``cross=True`` every ordered pair of canonical directions (m = 2 only), and
    ``perturbation_samples`` seeded random tuples.
    """
    dirs = unit_directions(dim, params.directions)
    signs = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(m)])
    equal = np.repeat(dirs[:, None, :], m, axis=1)
    opposed = equal * signs[None, :, None]
    blocks = [equal, opposed]
    if cross and m == 2:
        i, j = np.meshgrid(np.arange(len(dirs)), np.arange(len(dirs)), indexing="ij")
        keep = (i != j).ravel()
        pairs = np.stack([dirs[i.ravel()], dirs[j.ravel()]], axis=1)[keep]
        # opposed pairs are already present
        not_opposed = np.linalg.norm(pairs[:, 0] + pairs[:, 1], axis=1) > 1e-12
        blocks.append(pairs[not_opposed])
    rng = rng_for(params, STREAM_TUPLES, salt)
    if params.perturbation_samples > 0:
        rand = random_directions(rng, params.perturbation_samples * m, dim)
        blocks.append(rand.reshape(params.perturbation_samples, m, dim))
    return np.concatenate(blocks, axis=0)


def pairwise_midpoints(projections: np.ndarray) -> np.ndarray:
    """Midpoints of the nearest points of every pair of sets

    Args:
        projections: shape (N, m, n), nearest point of each set per sample

    Returns:
        shape (N·m(m−1)/2, n)
    """
    n_sets = projections.shape[1]
    mids = [(projections[:, i] + projections[:, j]) / 2.0
            for i, j in itertools.combinations(range(n_sets), 2)]
    return np.concatenate(mids, axis=0) if mids else np.zeros((0, projections.shape[2]))
