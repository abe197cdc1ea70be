#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Services for setreg: worker pool, artifact writers, bundled inputs and the regression suite
"""

from .parallel import default_workers, map_rows, ordered_map

__all__ = [
    'default_workers',
    'map_rows',
    'ordered_map'
]
