"""Order-preserving thread fan-out shared by sweeps and Monte Carlo shards."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
U = TypeVar("U")


def thread_count(max_workers: int | None = None) -> int:
    """Explicit argument, else ``QSC_THREADS``, else 1."""
    if max_workers is not None:
        return max(1, int(max_workers))
    env = os.environ.get("QSC_THREADS")
    return max(1, int(env)) if env else 1


def ordered_map(fn: Callable[[T], U], items: Iterable[T], max_workers: int | None = None) -> list[U]:
    items = list(items)
    n = thread_count(max_workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
