#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
确定性采样测试
"""

import numpy as np

from setreg.core.config import EstimatorParams
from setreg.core.sampling import (
    ball_points, pairwise_midpoints, perturbation_tuples, unit_directions,
)


def test_plane_directions_contain_axes_and_diagonals():
    dirs = unit_directions(2, 10)
    assert len(dirs) == 16
    for target in ([1, 0], [0, 1], [-1, 0], [0, -1], [np.sqrt(0.5), np.sqrt(0.5)]):
        assert np.min(np.linalg.norm(dirs - target, axis=1)) < 1e-12


def test_space_directions_are_unit():
    dirs = unit_directions(3, 20)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert len(dirs) == 26 + 20


def test_ball_points_inside_ball_and_seeded(fast_params):
    """同一种子得到相同采样"""
    a = ball_points([1.0, -1.0], 0.5, fast_params)
    b = ball_points([1.0, -1.0], 0.5, fast_params)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.linalg.norm(a - [1.0, -1.0], axis=1) <= 0.5 + 1e-12)
    np.testing.assert_array_equal(a[0], [1.0, -1.0])


def test_ball_points_depend_on_seed(fast_params):
    other = fast_params.with_overrides(seed=7)
    a = ball_points([0.0, 0.0], 1.0, fast_params)
    b = ball_points([0.0, 0.0], 1.0, other)
    assert a.shape == b.shape
    assert not np.array_equal(a, b)


def test_perturbation_tuple_families():
    p = EstimatorParams(directions=8, perturbation_samples=3)
    tuples = perturbation_tuples(2, 2, p)
    assert tuples.shape == (8 + 8 + 3, 2, 2)
    np.testing.assert_allclose(tuples[0, 0], tuples[0, 1])
    np.testing.assert_allclose(tuples[8, 0], -tuples[8, 1])


def test_cross_tuples_skip_duplicates():
    p = EstimatorParams(directions=8, perturbation_samples=0)
    tuples = perturbation_tuples(2, 2, p, cross=True)
    # equal + opposed + ordered pairs that are neither equal nor opposed
    assert tuples.shape == (8 + 8 + 8 * 6, 2, 2)


def test_pairwise_midpoints():
    proj = np.array([[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]])
    mids = pairwise_midpoints(proj)
    np.testing.assert_allclose(mids, [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
