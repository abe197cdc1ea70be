#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Utility modules for setreg
"""

from .logger import setup_logging, get_logger

__all__ = [
    'setup_logging',
    'get_logger'
]
