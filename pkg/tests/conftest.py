#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试公共夹具: 缩减的估计参数与内置场景
"""

import pytest

from setreg.core.config import EstimatorParams
from setreg.core.geometry import GridSpec
from setreg.services.scenes import bundled_mapping, bundled_scene

# 缩小采样规模, 保持测试快速
FAST = EstimatorParams(
    rho_max=0.2,
    rho_factor=0.5,
    rho_min=0.025,
    directions=8,
    radial_levels=3,
    perturbation_samples=4,
    jitter_samples=4,
    ball_samples=GridSpec(1.0, 9, 6),
    oracle_grid=GridSpec(4.0, 17, 6),
)


@pytest.fixture
def fast_params() -> EstimatorParams:
    return FAST


@pytest.fixture
def scene():
    """按名称加载内置场景"""
    return bundled_scene


@pytest.fixture
def mapping():
    return bundled_mapping
