"""Certainty-equivalence tracking controller for FIR regressors.

Given the current parameter estimate, the next input is chosen so that the
one-step predictor matches the reference:

    <estimate, [u_k, u_{k-1}, ..., u_{k-p+1}]> + E[noise] = reference_{k+1}

solved for u_k.  Two guards absorb degeneracy: the leading-coefficient
divisor is floored away from zero, and the emitted input is clamped.  With
the clamp active the regressor norm is bounded by sqrt(p) * clamp, which is
also the bound the identification side assumes.  Guard activations are
counted for reporting; past the transient they are expected to be rare.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .noise import NoiseModel


class Reference:
    """Bounded reference signal."""

    def value(self, k: int) -> float:
        raise NotImplementedError

    def bound(self) -> float:
        raise NotImplementedError


class SinusoidReference(Reference):
    def __init__(self, amplitude: float, period: float):
        if not math.isfinite(amplitude):
            raise ValueError("amplitude must be finite")
        if period <= 0:
            raise ValueError("period must be positive")
        self.amplitude = float(amplitude)
        self.period = float(period)

    def value(self, k: int) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * k / self.period)

    def bound(self) -> float:
        return abs(self.amplitude)


class ConstantReference(Reference):
    def __init__(self, level: float):
        if not math.isfinite(level):
            raise ValueError("level must be finite")
        self.level = float(level)

    def value(self, k: int) -> float:
        return self.level

    def bound(self) -> float:
        return abs(self.level)


def make_reference(kind: str, amplitude: float = 0.0, period: float = 1.0) -> Reference:
    if kind == "sinusoid":
        return SinusoidReference(amplitude, period)
    if kind == "constant":
        return ConstantReference(amplitude)
    raise ValueError(f"unknown reference kind {kind!r}; supported: sinusoid, constant")


class TrackingController:
    """Holds the input history and realizes the control law with guards."""

    def __init__(
        self,
        dim: int,
        input_clamp: float = 50.0,
        theta1_floor: float = 1e-3,
        initial_inputs=None,
    ):
        if dim < 1:
            raise ValueError("regressor dimension must be >= 1")
        if input_clamp <= 0 or theta1_floor <= 0:
            raise ValueError("guards must be positive")
        self.dim = dim
        self.input_clamp = float(input_clamp)
        self.theta1_floor = float(theta1_floor)
        past = [0.0] * (dim - 1) if initial_inputs is None else [float(v) for v in initial_inputs]
        if len(past) != dim - 1:
            raise ValueError(f"need {dim - 1} initial inputs, got {len(past)}")
        # most recent first: u_{k-1}, u_{k-2}, ...
        self._history = deque(past, maxlen=max(dim - 1, 1))
        self.floor_activations = 0
        self.clamp_activations = 0

    def control(self, theta_hat, noise: NoiseModel, y_star_next: float) -> tuple[float, list]:
        """Choose the next input and return it with the realized regressor."""
        th = np.asarray(theta_hat, dtype=float)
        if th.size != self.dim:
            raise ValueError("estimate dimension mismatch")
        acc = y_star_next - noise.mean()
        for i, u_past in enumerate(self._history):
            if i + 1 >= self.dim:
                break
            acc -= th[i + 1] * u_past
        lead = th[0]
        if abs(lead) < self.theta1_floor:
            lead = math.copysign(self.theta1_floor, lead if lead != 0.0 else 1.0)
            self.floor_activations += 1
        u = acc / lead
        if abs(u) > self.input_clamp:
            u = math.copysign(self.input_clamp, u)
            self.clamp_activations += 1
        phi = [u] + [self._history[i] for i in range(self.dim - 1)]
        if self.dim > 1:
            self._history.appendleft(u)
        return u, phi

    def regressor_bound(self) -> float:
        """Norm bound the clamp guarantees for every emitted regressor."""
        return math.sqrt(self.dim) * self.input_clamp


def tracking_cost(ys, y_stars) -> float:
    """Time-averaged squared tracking error of outputs against references."""
    ys = np.asarray(ys, dtype=float)
    y_stars = np.asarray(y_stars, dtype=float)
    if ys.shape != y_stars.shape or ys.ndim != 1 or ys.size < 1:
        raise ValueError("sequences must be 1-d, nonempty, and of equal length")
    d = ys - y_stars
    return float(d @ d) / ys.size
