"""Counter-based random streams.

A handle ``(seed, stream_id)`` names an independent stream; each stream is cut
into numbered blocks so that work split across processes draws exactly the
same numbers as a serial run.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

SEED_ENV = "GENRMT_SEED"
DEFAULT_SEED = 20240101

_U64 = (1 << 64) - 1


def default_seed() -> int:
    """Seed from ``$GENRMT_SEED`` if set, else a fixed constant."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        value = int(raw, 0)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc
    if not 0 <= value <= _U64:
        raise ValueError(f"{SEED_ENV} must fit in 64 unsigned bits")
    return value


@dataclass(frozen=True)
class RngHandle:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self, block: int = 0) -> np.random.Generator:
        """Generator for block ``block`` of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, block))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, index: int) -> "RngHandle":
        """A distinct stream derived from this one (e.g. per suite entry)."""
        mixed = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, _U64, index))
        return RngHandle(self.seed, int(mixed.generate_state(1, np.uint64)[0]))


def block_sizes(count: int, block: int) -> list[int]:
    """Split ``count`` draws into fixed-size blocks (last one possibly short)."""
    if count < 0 or block < 1:
        raise ValueError("count must be >= 0 and block >= 1")
    full, rest = divmod(count, block)
    return [block] * full + ([rest] if rest else [])
