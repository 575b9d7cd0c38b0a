"""Row-chunked data parallelism for raster loops.

Chunk boundaries depend only on the number of rows, never on the thread
count, so results are identical for any ``threads`` value.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

ROWS_PER_CHUNK = 32
_default_threads = 1


def set_default_threads(n: int) -> None:
    global _default_threads
    _default_threads = max(1, int(n))


def row_chunks(n_rows: int, rows_per_chunk: int = ROWS_PER_CHUNK) -> list[tuple[int, int]]:
    return [(r, min(n_rows, r + rows_per_chunk)) for r in range(0, n_rows, rows_per_chunk)]


def map_rows(fn: Callable[[int, int], T], n_rows: int, threads: int | None = None) -> list[T]:
    """Evaluate ``fn(start, stop)`` over disjoint row ranges, in order."""
    chunks = row_chunks(n_rows)
    threads = _default_threads if threads is None else max(1, int(threads))
    if threads == 1 or len(chunks) == 1:
        return [fn(a, b) for a, b in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), chunks))
