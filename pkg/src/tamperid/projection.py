"""Projections onto convex compact parameter sets, in plain and weighted norms.

Two set shapes are supported, a coordinate box and a Euclidean ball; both are
compact and convex by construction and expose their norm bound
sup-over-the-set of the Euclidean norm in closed form.

The weighted projection minimizes (x - w)^T Q (x - w) over the set for a
symmetric positive definite Q.  For boxes this is solved by an active-set
iteration on the KKT system; for balls by bisection on the scalar Lagrange
multiplier.  Parameter dimensions in the shipped experiments are tiny
(2..10), so exactness is favored over speed, and a membership fast path
skips the solver entirely for interior points.
"""

from __future__ import annotations

import math

import numpy as np

_SYM_TOL = 1e-12
_KKT_TOL = 1e-10
_MAX_ACTIVE_SET_ITERS = 100


class ProjectionError(RuntimeError):
    """Inner solver failed to converge within its iteration cap."""


class Box:
    """Axis-aligned box {x : lower <= x <= upper} (componentwise)."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower/upper must be 1-d vectors of equal length")
        if not np.all(self.lower <= self.upper):
            raise ValueError("box is empty: lower > upper in some component")
        self._lo = [float(v) for v in self.lower]
        self._hi = [float(v) for v in self.upper]

    @property
    def dim(self) -> int:
        return self.lower.size

    def norm_bound(self) -> float:
        """sup of the Euclidean norm over the set (attained at a corner)."""
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corner))

    def contains(self, x) -> bool:
        for v, lo, hi in zip(x, self._lo, self._hi):
            if v < lo or v > hi:
                return False
        return True

    def clip_in_place(self, x: list) -> None:
        """Euclidean projection of a plain-list point, written back in place."""
        lo = self._lo
        hi = self._hi
        for i in range(len(x)):
            v = x[i]
            if v < lo[i]:
                x[i] = lo[i]
            elif v > hi[i]:
                x[i] = hi[i]

    def project(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def project_weighted(self, Q, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.contains(x):
            return x.copy()
        Q = _check_weight(Q, x.size)
        return _box_weighted(self.lower, self.upper, Q, x)

    def __repr__(self) -> str:
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}, radius > 0."""

    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        if self.center.ndim != 1:
            raise ValueError("center must be a 1-d vector")
        if not (radius > 0.0):
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    @property
    def dim(self) -> int:
        return self.center.size

    def norm_bound(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def contains(self, x) -> bool:
        d = np.asarray(x, dtype=float) - self.center
        return float(d @ d) <= self.radius * self.radius

    def clip_in_place(self, x: list) -> None:
        d2 = 0.0
        for v, c in zip(x, self.center):
            d2 += (v - c) * (v - c)
        if d2 <= self.radius * self.radius:
            return
        scale = self.radius / math.sqrt(d2)
        for i in range(len(x)):
            x[i] = self.center[i] + scale * (x[i] - self.center[i])

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = x - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return x.copy()
        return self.center + (self.radius / n) * d

    def project_weighted(self, Q, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.contains(x):
            return x.copy()
        Q = _check_weight(Q, x.size)
        return _ball_weighted(self.center, self.radius, Q, x)

    def __repr__(self) -> str:
        return f"Ball({self.center.tolist()}, {self.radius})"


ConstraintSet = Box | Ball


def project_euclidean(cset: ConstraintSet, x) -> np.ndarray:
    """Closest point of the set in the Euclidean norm; identity inside the set."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != cset.dim:
        raise ValueError(f"point has dim {x.shape}, set expects {cset.dim}")
    return cset.project(x)


def project_weighted(cset: ConstraintSet, Q, x) -> np.ndarray:
    """Unique minimizer of (x - w)^T Q (x - w) over the set, Q SPD."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != cset.dim:
        raise ValueError(f"point has dim {x.shape}, set expects {cset.dim}")
    return cset.project_weighted(Q, x)


def _check_weight(Q, n: int) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (n, n):
        raise ValueError(f"weight matrix must be {n}x{n}, got {Q.shape}")
    if not np.all(np.abs(Q - Q.T) <= _SYM_TOL * (1.0 + np.abs(Q).max())):
        raise ValueError("weight matrix must be symmetric")
    if np.linalg.eigvalsh(Q)[0] <= 0.0:
        raise ValueError("weight matrix must be positive definite")
    return Q


def _box_weighted(lower, upper, Q, x) -> np.ndarray:
    """Active-set solve of min (x-w)^T Q (x-w) s.t. lower <= w <= upper.

    Alternates between solving the free subsystem exactly and re-deriving the
    active set from bound violations and multiplier signs, until the KKT
    residual drops below tolerance.
    """
    n = x.size
    w = np.clip(x, lower, upper)
    lower_active = w <= lower
    upper_active = w >= upper
    for _ in range(_MAX_ACTIVE_SET_ITERS):
        free = ~(lower_active | upper_active)
        w_new = np.where(lower_active, lower, np.where(upper_active, upper, w))
        if free.any():
            # gradient of the objective is 2 Q (w - x); zero it on free coords
            rhs = Q[np.ix_(free, free)] @ x[free] - Q[np.ix_(free, ~free)] @ (
                w_new[~free] - x[~free]
            )
            w_new[free] = np.linalg.solve(Q[np.ix_(free, free)], rhs)
        clipped = np.clip(w_new, lower, upper)
        grad = Q @ (clipped - x)
        # KKT residual: free coords need zero gradient, active bounds need the
        # right multiplier sign (>= 0 at lower, <= 0 at upper)
        res = 0.0
        for i in range(n):
            at_lo = clipped[i] <= lower[i] + 1e-14 * (1 + abs(lower[i]))
            at_hi = clipped[i] >= upper[i] - 1e-14 * (1 + abs(upper[i]))
            if at_lo and not at_hi:
                res = max(res, -grad[i])
            elif at_hi and not at_lo:
                res = max(res, grad[i])
            elif not (at_lo or at_hi):
                res = max(res, abs(grad[i]))
        if res <= _KKT_TOL * max(1.0, float(np.abs(Q).max())):
            return clipped
        # next active set: violated bounds plus sign-consistent current ones
        lower_active = (w_new <= lower) & (Q @ (np.clip(w_new, lower, upper) - x) >= 0)
        upper_active = (w_new >= upper) & (Q @ (np.clip(w_new, lower, upper) - x) <= 0)
        lower_active |= w_new < lower
        upper_active |= w_new > upper
        w = clipped
    raise ProjectionError("weighted box projection did not converge")


def _ball_weighted(center, radius, Q, x) -> np.ndarray:
    """Dual bisection for min (x-w)^T Q (w...) s.t. ||w - center|| <= radius.

    Stationarity gives w(lam) = center + (Q + lam I)^{-1} Q (x - center); the
    multiplier lam >= 0 is the root of ||w(lam) - center|| = radius, and the
    norm is strictly decreasing in lam.
    """
    d = x - center

    def boundary_point(lam: float) -> np.ndarray:
        n = Q.shape[0]
        return np.linalg.solve(Q + lam * np.eye(n), Q @ d)

    lo = 0.0
    if float(np.linalg.norm(boundary_point(0.0))) <= radius:
        # x projects onto the boundary only when outside; lam = 0 feasible
        return center + boundary_point(0.0)
    hi = float(np.linalg.eigvalsh(Q)[-1]) * max(1.0, float(np.linalg.norm(d)) / radius)
    while float(np.linalg.norm(boundary_point(hi))) > radius:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(np.linalg.norm(boundary_point(mid))) > radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return center + boundary_point(hi)
