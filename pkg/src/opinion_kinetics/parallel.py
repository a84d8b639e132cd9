"""Deterministic worker-pool helpers.

OPK_THREADS caps the worker count; results never depend on it because every
work item owns its own random substream and assembly is by item index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get("OPK_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(8, os.cpu_count() or 1)
    return n


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map preserving input order; runs serially when one worker suffices."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
