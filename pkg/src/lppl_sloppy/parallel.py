"""Thread fan-out for independent fits.

The compiled optimizer releases the GIL, so plain threads scale.  Results are
always returned in input order, whatever the completion order.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "LPPL_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def map_ordered(fn, items, threads: int | None = None) -> list:
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
