"""Shared degenerate noise stand-ins for exact-arithmetic tests."""

import numpy as np

from tamperid.noise import NoiseModel


class ZeroNoise(NoiseModel):
    """Noiseless law: point mass at zero with a step CDF."""

    def cdf(self, x):
        return 0.0 if x < 0 else 1.0

    def pdf(self, x):
        return 0.0

    def mean(self):
        return 0.0

    def sample(self, rng, size):
        return np.zeros(size)


class ConstantNoise(ZeroNoise):
    """Point mass at a fixed level."""

    def __init__(self, level):
        self.level = level

    def mean(self):
        return self.level

    def sample(self, rng, size):
        return np.full(size, self.level)
