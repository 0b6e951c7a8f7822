"""Replica-parallel map with results independent of the worker count."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from mesocorr.errors import ValidationError

DEFAULT_CHUNK = 256


def chunk_bounds(total: int, chunk: int = DEFAULT_CHUNK) -> list:
    return [(s, min(total, s + chunk)) for s in range(0, total, chunk)]


def map_replicas(fn, total: int, threads: int = 1, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Concatenate ``fn(start, stop)`` over fixed replica chunks, in replica order.

    Each replica draws from its own stream, so neither the chunk layout nor the
    number of threads can change the output.
    """
    if int(threads) != threads or threads < 1:
        raise ValidationError("threads must be a positive integer")
    if int(total) != total or total < 1:
        raise ValidationError("replica count must be a positive integer")
    bounds = chunk_bounds(int(total), int(chunk))
    if threads == 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    return np.concatenate(parts, axis=0)
