from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """
    Names one reproducible stream of random numbers.

    A stream is a value, not a generator: every call to generator() starts the
    same counter-based Philox sequence from the beginning, so a given
    (seed, stream_id, substream) always reproduces the same draws regardless of
    how many threads are used. Independent work obtains its own stream through
    child().

    Attributes:
        seed (int): 64-bit experiment seed.
        stream_id (int): Non-negative stream index within the experiment.
        substream (Tuple[int, ...]): Path of child indices below stream_id.
    """
    seed: int
    stream_id: int = 0
    substream: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.stream_id < 0 or any(k < 0 for k in self.substream):
            raise ValueError("Stream indices must be non-negative.")

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.substream + (int(index),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.seed % 2**64, spawn_key=(self.stream_id,) + self.substream
        )
        return np.random.Generator(np.random.Philox(seq))
