"""Deterministic parallel-for.

Work items are mapped in a thread pool (the compiled kernels release the
GIL) and results come back in submission order, so any reduction done by
the caller sees the same operand order for every worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunks(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    """Split ``seq`` into consecutive pieces of at most ``size`` items."""
    size = max(1, size)
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def ksum(values: Iterable[float]) -> float:
    """Order-independent, correctly rounded float sum."""
    return math.fsum(values)
