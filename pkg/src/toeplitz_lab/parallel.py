"""Worker pool for embarrassingly parallel grid sweeps.

``TOEPLITZ_LAB_THREADS`` caps the number of threads (default: the CPU
count, at most 8).  Results are returned in input order, so outputs never
depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    env = os.environ.get("TOEPLITZ_LAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"TOEPLITZ_LAB_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def pmap(fn, items):
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
