#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Worker pool for sample evaluation

Work is cut into chunks of a fixed size that does not depend on the worker count, and
results come back in submission order.  Combined with order-independent reductions
(min/max) this makes every estimate bit-identical for any number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np
import psutil

from ..utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

CHUNK_ROWS = 256


def default_workers() -> int:
    """Physical core count, falling back to 1"""
    try:
        return max(1, psutil.cpu_count(logical=False) or 1)
    except (RuntimeError, OSError):
        return 1


def chunk_slices(n: int, size: int = CHUNK_ROWS) -> List[slice]:
    """Consecutive slices covering range(n)"""
    return [slice(start, min(start + size, n)) for start in range(0, n, size)]


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """map(fn, items) evaluated by up to ``workers`` threads, results in input order"""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def map_rows(fn: Callable[[slice], np.ndarray], n: int, workers: int = 1,
             size: int = CHUNK_ROWS) -> np.ndarray:
    """Evaluate ``fn`` on fixed row chunks of range(n) and concatenate along axis 0"""
    if n == 0:
        return np.zeros(0)
    parts = ordered_map(fn, chunk_slices(n, size), workers)
    return np.concatenate(parts, axis=0)

