"""
Counter-based random streams.

Every draw in the library is a pure function of (seed, iteration, substream,
position in the stream). A run owns one RandomStreams; each (iteration, substream)
pair opens a fresh Philox generator whose counter starts at a disjoint offset, so
results do not depend on the order in which streams are consumed.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np

from ..errors import InvalidParameterError

# Substream ids
EXTRAPOLATION = 1
UPDATE = 2
SINGLE = 1


@lru_cache(maxsize=4096)
def _philox_key(seed: int) -> Tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


class RandomStreams:
    """Factory of independent Philox streams keyed by a run seed"""

    def __init__(self, seed: int):
        if int(seed) < 0:
            raise InvalidParameterError(f"seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self._key = np.array(_philox_key(self.seed), dtype=np.uint64)

    def at(self, iteration: int, substream: int = SINGLE) -> np.random.Generator:
        """Generator for one (iteration, substream) cell"""
        if iteration < 0 or substream < 0:
            raise InvalidParameterError("iteration and substream must be nonnegative")
        # Low 128 counter bits advance with draws; the high words select the cell.
        counter = (int(substream) << 128) | (int(iteration) << 192)
        return np.random.Generator(np.random.Philox(key=self._key, counter=counter))

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed})"
