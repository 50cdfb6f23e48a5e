"""Deterministic fan-out for batch runs.

Shard boundaries depend only on the input range and shard count, and
results are merged in shard order, so the assembled output is identical
whether the shards run in one process or eight.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

from .errors import DomainError

T = TypeVar("T")
R = TypeVar("R")


def shard_ranges(lo: int, hi: int, pieces: int) -> list[tuple[int, int]]:
    """Split [lo, hi] into at most `pieces` contiguous inclusive ranges of
    near-equal size, in ascending order."""
    if hi < lo:
        raise DomainError("empty range")
    if pieces < 1:
        raise DomainError("pieces must be >= 1")
    total = hi - lo + 1
    pieces = min(pieces, total)
    base, extra = divmod(total, pieces)
    out = []
    start = lo
    for i in range(pieces):
        size = base + (1 if i < extra else 0)
        out.append((start, start + size - 1))
        start += size
    return out


def run_sharded(fn: Callable[[T], R], shards: Sequence[T],
                workers: int) -> list[R]:
    """Apply fn to every shard, in-order results.

    workers <= 1 runs inline; otherwise a process pool computes the
    shards and the results come back in submission order either way.
    """
    if workers <= 1 or len(shards) <= 1:
        return [fn(s) for s in shards]
    with ProcessPoolExecutor(max_workers=min(workers, len(shards))) as pool:
        return list(pool.map(fn, shards))
