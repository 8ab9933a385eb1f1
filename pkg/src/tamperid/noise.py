"""Noise distribution models: CDF, density, mean, and density lower bounds.

Every estimator consumes the noise CDF inside its innovation term, so CDF
accuracy directly bounds estimator bias.  The Gaussian CDF is evaluated via
the complementary error function, which keeps full relative accuracy in both
tails.

Models are immutable after construction and safe to share across concurrent
simulation replicas.  The interface is per-step (the estimators re-query the
model on every update), so a schedule of models can be swapped in between
steps if a time-varying law is ever needed; all shipped experiments use a
single stationary model.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class DensityFloorError(ValueError):
    """Raised when the density infimum over the requested interval is not positive."""


class NoiseModel:
    """Abstract absolutely-continuous noise law with known CDF and density.

    Subclasses must have a finite first absolute moment; laws with undefined
    mean are rejected at construction by not being representable here.
    """

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` i.i.d. variates using the supplied generator."""
        raise NotImplementedError

    def density_inf(self, radius: float) -> float:
        """Infimum of the density over the closed interval [-radius, radius].

        Generic fallback: dense grid scan.  Unimodal subclasses override with
        the closed form (the infimum sits at the interval endpoint farthest
        from the mode).  Raises DensityFloorError if the computed infimum is
        not strictly positive.
        """
        if not math.isfinite(radius) or radius < 0.0:
            raise ValueError(f"radius must be finite and >= 0, got {radius}")
        xs = np.linspace(-radius, radius, 20001)
        val = min(self.pdf(float(x)) for x in xs)
        if val <= 0.0:
            raise DensityFloorError(
                f"density infimum over [-{radius}, {radius}] is {val}; "
                "a positive lower bound is required"
            )
        return val


class GaussianNoise(NoiseModel):
    """Gaussian law N(mean, variance), variance > 0."""

    __slots__ = ("_mean", "_variance", "_sd")

    def __init__(self, mean: float = 0.0, variance: float = 1.0):
        if not (variance > 0.0) or not math.isfinite(variance):
            raise ValueError(f"variance must be positive and finite, got {variance}")
        if not math.isfinite(mean):
            raise ValueError(f"mean must be finite, got {mean}")
        self._mean = float(mean)
        self._variance = float(variance)
        self._sd = math.sqrt(self._variance)

    @property
    def variance(self) -> float:
        return self._variance

    def cdf(self, x: float) -> float:
        z = (x - self._mean) / self._sd
        return 0.5 * math.erfc(-z / _SQRT2)

    def pdf(self, x: float) -> float:
        z = (x - self._mean) / self._sd
        return _INV_SQRT_2PI * math.exp(-0.5 * z * z) / self._sd

    def mean(self) -> float:
        return self._mean

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self._mean, self._sd, size)

    def density_inf(self, radius: float) -> float:
        if not math.isfinite(radius) or radius < 0.0:
            raise ValueError(f"radius must be finite and >= 0, got {radius}")
        # Unimodal and symmetric about the mean: the infimum over [-r, r] is
        # attained at the endpoint farthest from the mean.
        far = max(abs(-radius - self._mean), abs(radius - self._mean))
        val = self.pdf(self._mean + far)
        if val <= 0.0:
            raise DensityFloorError(
                f"Gaussian density underflows at distance {far}; "
                "the requested interval violates the positive-floor requirement"
            )
        return val

    def __repr__(self) -> str:
        return f"GaussianNoise(mean={self._mean}, variance={self._variance})"


def make_noise(kind: str, mean: float, variance: float) -> NoiseModel:
    """Build a noise model from config fields (noise.kind/mean/variance)."""
    if kind.lower() == "gaussian":
        return GaussianNoise(mean, variance)
    raise ValueError(f"unknown noise kind {kind!r}; supported: gaussian")
