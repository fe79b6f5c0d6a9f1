"""Order-stable fan-out of per-stream work across processes.

Results are keyed by stream index and concatenated in index order, so the
output is the same array no matter how many workers ran or which finished
first.  Worker functions must be module-level (they cross a process
boundary) and must take (args, start, stop) and return one ndarray of
length stop - start.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

WorkerFn = Callable[[tuple, int, int], np.ndarray]


def chunk_bounds(total: int, chunk_size: int) -> list[tuple[int, int]]:
    """Split range(total) into consecutive [start, stop) chunks."""
    if total < 0:
        raise ValueError("total must be non-negative")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(s, min(s + chunk_size, total)) for s in range(0, total, chunk_size)]


def map_stream_chunks(
    worker: WorkerFn,
    args: tuple,
    total: int,
    workers: int = 1,
    chunk_size: int | None = None,
) -> np.ndarray:
    """Run worker over range(total) in chunks, concatenated in stream order."""
    if workers < 1:
        raise ValueError("workers must be positive")
    if total == 0:
        return np.empty(0)
    if workers == 1:
        return np.asarray(worker(args, 0, total))
    if chunk_size is None:
        chunk_size = max(16, -(-total // (workers * 8)))
    bounds = chunk_bounds(total, chunk_size)
    parts: dict[int, np.ndarray] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(worker, args, s, e): s for s, e in bounds}
        for future, start in futures.items():
            parts[start] = np.asarray(future.result())
    return np.concatenate([parts[s] for s, _ in bounds])
