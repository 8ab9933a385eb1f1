"""How an estimator learns the channel flip rates: fixed and known, or read
live from a defense state fed by probe bits."""

from __future__ import annotations

from .defense import DefenseState
from .system import DEGENERACY_TOL, IdentifiabilityError


class KnownAttack:
    """Flip rates supplied up front; rejects the non-identifiable sum."""

    __slots__ = ("p", "q")

    def __init__(self, p: float, q: float):
        if not (0.0 <= p < 1.0) or not (0.0 <= q < 1.0):
            raise ValueError(f"flip rates must lie in [0, 1), got ({p}, {q})")
        if abs(p + q - 1.0) <= DEGENERACY_TOL:
            raise IdentifiabilityError(f"p + q = {p + q} is degenerate (= 1)")
        self.p = float(p)
        self.q = float(q)

    def rates(self) -> tuple[float, float]:
        return self.p, self.q


class EstimatedAttack:
    """Flip rates read from a live defense state at every update.

    The running estimates may transiently sum to exactly 1; estimators treat
    that step as carrying zero innovation rather than failing, since the
    estimates leave the degenerate point as more probes arrive.
    """

    __slots__ = ("defense",)

    def __init__(self, defense: DefenseState):
        self.defense = defense

    def rates(self) -> tuple[float, float]:
        return self.defense.p_hat, self.defense.q_hat


AttackModel = KnownAttack | EstimatedAttack
