"""Seeded, addressable random streams.

Every trial owns a ``RngHandle``. A handle is a value: the same
``(seed, stream_id, path)`` always yields the same draw sequence, and no
generator state is shared between handles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngHandle:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= value <= _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def stream(self, stream_id: int) -> "RngHandle":
        """Same seed, a different independent stream (one per trial)."""
        return RngHandle(self.seed, stream_id, self.path)

    def child(self, key: int) -> "RngHandle":
        """Sub-stream for a distinct purpose inside one trial (placement, noise, ...)."""
        return RngHandle(self.seed, self.stream_id, self.path + (int(key),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))
