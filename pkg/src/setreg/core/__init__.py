#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Core components for setreg: sets, scenes, estimators and dual certificates
"""

from .exceptions import *
from .config import ConfigManager, EstimatorParams, RunConfig
from .scene import Scene

__all__ = [
    'ConfigManager',
    'EstimatorParams',
    'RunConfig',
    'Scene',
    # Exceptions
    'SetRegError',
    'InputError',
    'SceneParseError',
    'DimensionMismatchError',
    'NotInIntersectionError',
    'InfeasiblePolyhedronError',
    'PreconditionError',
    'ConfigurationError',
    'EstimatorDiagnostic',
    'CheckFailure',
]
