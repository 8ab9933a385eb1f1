"""Simulated plant, binary threshold sensor, bit-flip channel, and input sources.

The plant, the channel, and the input generator each own an independent,
seed-derived random stream: changing the flip rates does not perturb the
noise sample path, so runs can be compared pairwise across attack levels.
Streams are drawn in blocks for speed; block buffering consumes the
underlying generator in exactly the same order as one-at-a-time draws, so
trajectories are bit-identical for a given seed regardless of buffer size.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .noise import NoiseModel

_BLOCK = 8192

DEGENERACY_TOL = 1e-9


class IdentifiabilityError(ValueError):
    """Flip rates with p + q = 1 make the observation law independent of the parameter."""


class FirPlant:
    """Finite-impulse-response plant: output = <regressor, theta> + noise."""

    def __init__(self, theta, noise: NoiseModel, rng_seed):
        self.theta = np.asarray(theta, dtype=float)
        if self.theta.ndim != 1 or self.theta.size < 1:
            raise ValueError("theta must be a nonempty 1-d vector")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")
        self.noise = noise
        self._rng = np.random.default_rng(rng_seed)
        self._buf: list[float] = []
        self._pos = 0
        self._theta_list = [float(v) for v in self.theta]

    @property
    def dim(self) -> int:
        return self.theta.size

    def _next_noise(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.noise.sample(self._rng, _BLOCK).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v

    def step(self, phi) -> float:
        """Advance one step: return the scalar output for regressor phi."""
        if len(phi) != len(self._theta_list):
            raise ValueError(f"regressor has dim {len(phi)}, plant expects {len(self._theta_list)}")
        acc = 0.0
        for t, f in zip(self._theta_list, phi):
            acc += t * f
        return acc + self._next_noise()


class BinarySensor:
    """Threshold sensor: emits 1 when the output is at or below the threshold."""

    __slots__ = ("threshold",)

    def __init__(self, threshold: float):
        if not math.isfinite(threshold):
            raise ValueError("threshold must be finite")
        self.threshold = float(threshold)

    def sense(self, y: float) -> int:
        return 1 if y <= self.threshold else 0


class TamperChannel:
    """Memoryless bit-flip channel: 1->0 with rate p_flip, 0->1 with rate q_flip.

    Construction rejects p_flip + q_flip = 1 (within DEGENERACY_TOL): at that
    point the law of the received bit no longer depends on the transmitted
    system output, and no estimator can recover the parameter.
    """

    def __init__(self, p_flip: float, q_flip: float, rng_seed):
        if not (0.0 <= p_flip < 1.0) or not (0.0 <= q_flip < 1.0):
            raise ValueError(f"flip rates must lie in [0, 1), got ({p_flip}, {q_flip})")
        if abs(p_flip + q_flip - 1.0) <= DEGENERACY_TOL:
            raise IdentifiabilityError(
                f"channel.p + channel.q = {p_flip + q_flip} is degenerate (= 1)"
            )
        self.p_flip = float(p_flip)
        self.q_flip = float(q_flip)
        self._rng = np.random.default_rng(rng_seed)
        self._buf: list[float] = []
        self._pos = 0

    def _next_uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(_BLOCK).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v

    def tamper(self, sent: int) -> int:
        """Pass one bit through the channel, consuming one uniform draw."""
        u = self._next_uniform()
        if sent == 1:
            return 0 if u < self.p_flip else 1
        return 1 if u < self.q_flip else 0


def tampered_zero_prob(channel: TamperChannel, model: NoiseModel, margin: float) -> float:
    """Exact conditional probability of receiving 0 given the prediction margin.

    `margin` is threshold minus the noise-free output.  Serves as the
    analytic oracle the Monte Carlo channel tests are checked against.
    """
    p, q = channel.p_flip, channel.q_flip
    return (p + q - 1.0) * model.cdf(margin) + 1.0 - q


class FirInputSource:
    """Scalar i.i.d. input stream shaping FIR window regressors [u_k, ..., u_{k-p+1}].

    The input law is Gaussian with standard deviation sd_scale * k^(-sd_decay)
    at step k (sd_decay = 0 gives a stationary stream).  `bound_m` is the
    norm bound the emitted regressors are expected to satisfy; violations are
    counted and reported as a warning at the end of a run, never a crash.
    """

    def __init__(self, dim: int, sd_scale: float, sd_decay: float, bound_m: float, rng_seed):
        if dim < 1:
            raise ValueError("regressor dimension must be >= 1")
        if sd_scale <= 0:
            raise ValueError("input sd must be positive")
        if bound_m <= 0:
            raise ValueError("bound_m must be positive")
        self.dim = dim
        self.sd_scale = float(sd_scale)
        self.sd_decay = float(sd_decay)
        self.bound_m = float(bound_m)
        self._rng = np.random.default_rng(rng_seed)
        self._buf: list[float] = []
        self._pos = 0
        self._window = [0.0] * dim  # u_{k}, u_{k-1}, ...
        self.bound_violations = 0
        self._k = 0

    def _next_std_normal(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.normal(0.0, 1.0, _BLOCK).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v

    def next_regressor(self) -> list[float]:
        """Emit the regressor for the next step."""
        self._k += 1
        sd = self.sd_scale
        if self.sd_decay != 0.0:
            sd *= self._k ** -self.sd_decay
        u = sd * self._next_std_normal()
        w = self._window
        w.pop()
        w.insert(0, u)
        norm_sq = 0.0
        for v in w:
            norm_sq += v * v
        if norm_sq > self.bound_m * self.bound_m:
            self.bound_violations += 1
        return list(w)

    def warn_if_violations(self) -> None:
        if self.bound_violations:
            warnings.warn(
                f"regressor norm exceeded the configured bound {self.bound_m} "
                f"on {self.bound_violations} steps",
                RuntimeWarning,
                stacklevel=2,
            )
