"""Order-preserving thread-pool map.

Work units across the package are deterministic given their index (sweeps use
per-point physics, trace synthesis derives a private RNG stream per unit), so
results are identical for any worker count; the pool only changes wall time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Like ``list(map(fn, items))``, optionally on a thread pool.

    Results are returned in input order regardless of completion order.
    ``threads=None`` uses the machine parallelism; ``threads<=1`` stays
    serial (and keeps tracebacks simple).
    """
    items = list(items)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
