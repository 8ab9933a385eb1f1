"""Second-order recursive projected estimator with rank-one gain updates.

Per step, with signed gain floor beta_k and gain matrix P_k:

    a_k        = 1 / (1 + beta_k^2 phi^T P_k phi)
    innovation = (1 - (p+q)) F(C - est.phi) + q - s          (unscaled, |.| <= 1)
    P_{k+1}    = P_k - beta_k^2 a_k (P_k phi)(P_k phi)^T
    estimate  <- project_{P_{k+1}^{-1}}(estimate + a_k beta_k P_k phi innovation)

A shadow inverse is maintained by the rank-one identity
P_{k+1}^{-1} = P_k^{-1} + beta_k^2 phi phi^T, and the log-determinant of the
inverse accumulates log(1 + beta_k^2 phi^T P_k phi) per the determinant
lemma.  The shadow inverse is the numerically trustworthy side (a sum of
positive terms); periodic cross-checks resync P from it if the rank-one
downdates ever drift.

The gain floor is beta_k = sign(1-(p+q)) * min(|beta_{k-1}|,
|1-(p+q)| * f_floor) with f_floor the density infimum over a configured
interval, capped at 1 initially.  With live flip-rate estimates the monotone
clamp only engages after a burn-in: early estimates are noisy, and a single
transient pass near p+q = 1 would otherwise latch the floor at zero
permanently.
"""

from __future__ import annotations

import math

import numpy as np

from .attack import AttackModel, EstimatedAttack
from .noise import NoiseModel
from .projection import ConstraintSet, project_weighted


class NumericalBreakdown(RuntimeError):
    """Gain matrix lost positive definiteness beyond repair."""


class NewtonEstimator:
    """Projected quasi-Newton identifier for tampered binary observations.

    density_radius bounds the interval over which the noise density is
    lower-bounded to form the gain floor.  When None it defaults to
    norm_bound(set) * bound_m + threshold, the worst-case prediction-margin
    radius; experiment presets override it with the realized margin scale,
    since the worst-case interval makes the floor vanish numerically.
    """

    def __init__(
        self,
        theta0,
        cset: ConstraintSet,
        noise: NoiseModel,
        threshold: float,
        attack: AttackModel,
        p1_scale: float = 1.0,
        bound_m: float | None = None,
        density_radius: float | None = None,
        beta_burn_in: int = 100,
        check_stride: int = 1000,
    ):
        theta0 = np.asarray(theta0, dtype=float)
        if theta0.size != cset.dim:
            raise ValueError("theta0 dimension does not match the constraint set")
        if not cset.contains(theta0):
            raise ValueError("theta0 must lie in the constraint set")
        if p1_scale <= 0:
            raise ValueError("p1_scale must be positive")
        n = theta0.size
        self.theta_hat = theta0.copy()
        self.cset = cset
        self.noise = noise
        self.threshold = float(threshold)
        self.attack = attack
        self.P = np.eye(n) * p1_scale
        self.P_inv = np.eye(n) / p1_scale
        self.logdet_P_inv = -n * math.log(p1_scale)
        if density_radius is None:
            if bound_m is None:
                raise ValueError("either density_radius or bound_m is required")
            density_radius = cset.norm_bound() * bound_m + abs(self.threshold)
        self.density_radius = float(density_radius)
        self._f_floor = noise.density_inf(self.density_radius)
        self.beta_burn_in = int(beta_burn_in)
        self.check_stride = int(check_stride)
        self.step_index = 1
        self.resync_count = 0
        p, q = attack.rates()
        self._beta_abs = min(1.0, abs(1.0 - (p + q)) * self._f_floor)
        self.beta = math.copysign(self._beta_abs, 1.0 - (p + q)) if p + q != 1.0 else 0.0

    def beta_step(self, p: float, q: float) -> float:
        """Advance the gain-floor recursion for the given flip rates."""
        one_pq = 1.0 - (p + q)
        cand = abs(one_pq) * self._f_floor
        estimated = isinstance(self.attack, EstimatedAttack)
        if estimated and self.step_index <= self.beta_burn_in:
            beta_abs = min(1.0, cand)
        elif cand == 0.0:
            # degenerate live estimates: zero-gain step, floor not absorbed
            beta_abs = self._beta_abs
        else:
            beta_abs = min(self._beta_abs, cand)
            self._beta_abs = beta_abs
        if one_pq == 0.0:
            return 0.0
        return math.copysign(beta_abs, one_pq)

    def gain_scalar(self, phi) -> float:
        phi = np.asarray(phi, dtype=float)
        quad = float(phi @ self.P @ phi)
        return 1.0 / (1.0 + self.beta * self.beta * quad)

    def innovation(self, phi, s_received: int, p: float, q: float) -> float:
        """Unscaled innovation: predicted bit probability minus received bit."""
        one_pq = 1.0 - (p + q)
        margin = self.threshold - float(np.dot(self.theta_hat, phi))
        return one_pq * self.noise.cdf(margin) + q - s_received

    def update(self, phi, s_received: int) -> None:
        """Consume one (regressor, received bit) pair and advance one step."""
        phi = np.asarray(phi, dtype=float)
        if phi.size != self.theta_hat.size:
            raise ValueError("regressor dimension mismatch")
        p, q = self.attack.rates()
        beta = self.beta_step(p, q)
        self.beta = beta
        P_phi = self.P @ phi
        quad = float(phi @ P_phi)
        b2 = beta * beta
        a = 1.0 / (1.0 + b2 * quad)
        if beta != 0.0:
            innov = self.innovation(phi, s_received, p, q)
            theta = self.theta_hat + (a * beta * innov) * P_phi
            self.P -= (b2 * a) * np.outer(P_phi, P_phi)
            self.P_inv += b2 * np.outer(phi, phi)
            self.logdet_P_inv += math.log1p(b2 * quad)
            if self.cset.contains(theta):
                self.theta_hat = theta
            else:
                self.theta_hat = project_weighted(self.cset, self.P_inv, theta)
        self.step_index += 1
        if self.step_index % self.check_stride == 0:
            self._consistency_check()

    def eigen_extremes(self) -> tuple[float, float]:
        """(smallest, largest) eigenvalue of the inverse gain matrix."""
        ev = np.linalg.eigvalsh(self.P_inv)
        return float(ev[0]), float(ev[-1])

    def _consistency_check(self) -> None:
        if not np.all(np.isfinite(self.P_inv)):
            raise NumericalBreakdown(
                f"inverse gain matrix became non-finite at step {self.step_index}"
            )
        n = self.theta_hat.size
        resid = float(np.abs(self.P @ self.P_inv - np.eye(n)).max())
        ev_min = float(np.linalg.eigvalsh(self.P)[0])
        if resid > 1e-8 or ev_min <= 0.0:
            # the accumulated inverse is the trustworthy side; rebuild P from it
            try:
                self.P = np.linalg.inv(self.P_inv)
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown(
                    f"inverse gain matrix singular at step {self.step_index}"
                ) from exc
            self.resync_count += 1
        sign, direct = np.linalg.slogdet(self.P_inv)
        if sign <= 0.0:
            raise NumericalBreakdown(
                f"inverse gain matrix lost positive definiteness at step {self.step_index}"
            )
        if abs(direct - self.logdet_P_inv) > 1e-6:
            self.logdet_P_inv = float(direct)
            self.resync_count += 1
