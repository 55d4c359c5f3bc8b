"""Seeded random number streams.

A :class:`RandomStream` is identified by ``(seed, stream_id)`` and always
produces the same draw sequence for the same identity, across runs and
platforms (PCG64 seeded through ``numpy.random.SeedSequence``). Parallel
units of work (simulation replicates, validation splits) must each own a
distinct substream; substreams are derived with spawn keys so they never
overlap.
"""

from __future__ import annotations

import numpy as np


class RandomStream:
    """Deterministic random stream backed by a numpy PCG64 generator.

    Parameters
    ----------
    seed : int
        Study-level seed (any 64-bit integer).
    stream_id : int
        Replicate-level stream selector. Same ``(seed, stream_id)`` means a
        bit-identical draw sequence.
    """

    def __init__(self, seed: int, stream_id: int = 0, _key: tuple[int, ...] | None = None):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._key = _key if _key is not None else (self.stream_id,)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self._key)
        self._generator = np.random.Generator(np.random.PCG64(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream; children with distinct indexes never collide."""
        return RandomStream(self.seed, self.stream_id, _key=self._key + (int(index),))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}, key={self._key})"
