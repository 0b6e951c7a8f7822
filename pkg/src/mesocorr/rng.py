"""Reproducible per-replica random streams.

Every replica owns a generator keyed by ``(seed, stream_id)`` through
:class:`numpy.random.SeedSequence` spawn keys, so a replica draws the same
numbers no matter which worker or chunk evaluates it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value) & _MASK64)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> "RngStream":
        """Stream for replica ``index`` of an experiment seeded by ``self``.

        The replica id is mixed into the stream id so that nested use
        (experiment -> replica) never collides with the parent stream.
        """
        mixed = (self.stream_id * 0x9E3779B97F4A7C15 + int(index) + 1) & _MASK64
        return RngStream(self.seed, mixed)


def replica_generators(seed: int, start: int, stop: int) -> list[np.random.Generator]:
    """Generators for replicas ``start <= r < stop`` of an experiment."""
    return [RngStream(seed, r).generator() for r in range(start, stop)]
