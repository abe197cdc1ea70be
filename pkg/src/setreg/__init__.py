#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
setreg - regularity constants of collections of sets

Numerical estimates of the semiregularity, subregularity and uniform regularity
constants of finitely many closed sets at a common point, their dual
characterizations, the bridges to set-valued mappings and a cyclic-projection harness.
"""

__version__ = "1.0.0"
__author__ = "setreg developers"
__description__ = "Regularity constants of collections of sets: estimators and dual certificates"

from .core.config import ConfigManager, EstimatorParams, RunConfig
from .core.scene import Scene, load_scene, make_scene, parse_scene
from .core.moduli import classify, slope_zeta_hat, theta, theta_hat, zeta
from .core.dual import normal_cone, subreg_dual_certificate, uniform_dual_constant
from .core.mappings import verify_product_bridge, verify_graph_bridge
from .core.projections import cyclic_project, rate_vs_zeta
from .utils.logger import setup_logging

__all__ = [
    'ConfigManager',
    'EstimatorParams',
    'RunConfig',
    'Scene',
    'load_scene',
    'make_scene',
    'parse_scene',
    'classify',
    'theta',
    'zeta',
    'theta_hat',
    'slope_zeta_hat',
    'normal_cone',
    'uniform_dual_constant',
    'subreg_dual_certificate',
    'verify_product_bridge',
    'verify_graph_bridge',
    'cyclic_project',
    'rate_vs_zeta',
    'setup_logging',
]
