"""Order-preserving parallel map for parameter sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "PACSLOSS_THREADS"


def num_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None


def pmap(fn, items):
    """``[fn(x) for x in items]``, spread over ``PACSLOSS_THREADS`` threads.

    Results keep input order, so output is identical for any thread count.
    """
    items = list(items)
    workers = min(num_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
