"""Seeded random number generator for reproducible simulations."""

import math
from typing import Sequence

import numpy as np

BIT_GENERATOR = "PCG64"


class SeededRNG:
    """Wrapper around a numpy PCG64 generator so every stochastic routine shares one seed contract."""

    def __init__(self, seed: int):
        self._seed = int(seed)
        self._rng = np.random.Generator(np.random.PCG64(self._seed))

    @property
    def seed(self) -> int:
        return self._seed

    def random(self) -> float:
        return float(self._rng.random())

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high]`` (both inclusive)."""
        return int(self._rng.integers(low, high + 1))

    def choice(self, seq: Sequence):
        return seq[self.integers(0, len(seq) - 1)]

    def exponential(self, rate: float) -> float:
        """Waiting time of an exponential clock, by inverse transform."""
        u = self.random()
        return -math.log1p(-u) / rate

    def weighted_index(self, cumulative: np.ndarray) -> int:
        """Picks index i with probability proportional to the i-th increment of ``cumulative``."""
        target = self.random() * cumulative[-1]
        index = int(np.searchsorted(cumulative, target, side='right'))
        return min(index, len(cumulative) - 1)
