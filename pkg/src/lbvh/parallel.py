"""Chunked execution of nogil kernels on a thread pool.

Work items are split into contiguous ranges; each range is handed to one
worker, mirroring a range-per-thread batch model. Chunk boundaries never
affect results because every kernel writes only to per-item slots.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

__all__ = ["run_chunked"]

# below this many items the pool overhead dominates any speedup
_MIN_PARALLEL_ITEMS = 2048


def run_chunked(fn: Callable[[int, int], None], n_items: int, threads: int) -> None:
    """Invoke ``fn(start, end)`` over [0, n_items) in contiguous chunks.

    With ``threads <= 1`` (or a small workload) the call is made inline.
    Several chunks per worker are used so uneven per-item cost still
    balances.
    """
    if n_items <= 0:
        return
    if threads is None or threads <= 1 or n_items < _MIN_PARALLEL_ITEMS:
        fn(0, n_items)
        return
    n_chunks = min(threads * 4, max(1, n_items // 256))
    edges = np.linspace(0, n_items, n_chunks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(fn, int(s), int(e))
            for s, e in zip(edges[:-1], edges[1:])
            if e > s
        ]
        for fut in futures:
            fut.result()
