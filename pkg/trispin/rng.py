"""Seeded random streams for reproducible sampling.

Every stream is a numpy PCG64 generator keyed by (seed, *keys) through a
SeedSequence spawn key, so a stream never depends on how many other streams were
drawn before it.
"""
from typing import List

import numpy as np


class SeededRNG:
    """Factory of independent, reproducible numpy generators"""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self._seed = int(seed)

    @property
    def seed(self) -> int:
        return self._seed

    def stream(self, *keys: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self._seed, spawn_key=tuple(int(k) for k in keys))
        return np.random.Generator(np.random.PCG64(sequence))

    def fork(self, *keys: int, count: int) -> List[np.random.Generator]:
        """`count` child streams keyed (*keys, 0) .. (*keys, count - 1)"""
        return [self.stream(*keys, k) for k in range(count)]


def cumulative_weights(weights: np.ndarray) -> np.ndarray:
    """
    Row-wise CDF with every entry from the last positive weight onward pinned to
    1.0, so a uniform draw in [0, 1) never lands on a trailing zero-weight category.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    cdf = np.cumsum(weights, axis=1)
    columns = np.arange(weights.shape[1])
    last_positive = np.array([np.flatnonzero(row > 0)[-1] for row in weights])
    cdf[columns[None, :] >= last_positive[:, None]] = 1.0
    return cdf


def sample_categorical(generator: np.random.Generator, weights: np.ndarray, size: int) -> np.ndarray:
    """Inverse-CDF draws; zero-weight categories are never returned"""
    cdf = cumulative_weights(weights)[0]
    return np.searchsorted(cdf, generator.random(size), side="right")
