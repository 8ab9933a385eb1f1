"""Periodic probe insertion: known bits interleaved into the channel to
estimate the flip rates by sample frequencies.

Within each period of length T, a fixed set of slots transmits a known 0 and
a disjoint set transmits a known 1, each immediately after that step's data
bit.  Received probe bits update running counters from which the flip-rate
estimates are recomputed; data bits never touch the estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ProbeAction(Enum):
    NONE = 0
    SEND_ZERO = 1
    SEND_ONE = 2


@dataclass(frozen=True)
class InsertionSchedule:
    """Period T with disjoint nonempty probe-slot sets inside [1..T]."""

    period: int
    slots_zero: frozenset[int]
    slots_one: frozenset[int]

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be >= 1")
        z, o = self.slots_zero, self.slots_one
        if not z or not o:
            raise ValueError("both probe slot sets must be nonempty")
        if z & o:
            raise ValueError(f"probe slot sets overlap: {sorted(z & o)}")
        bad = [s for s in z | o if not (1 <= s <= self.period)]
        if bad:
            raise ValueError(f"slot indices outside [1..{self.period}]: {sorted(bad)}")

    def plan(self, k: int) -> ProbeAction:
        """Probe action for step k >= 1 (slot index wraps with the period)."""
        if k < 1:
            raise ValueError("step index must be >= 1")
        slot = ((k - 1) % self.period) + 1
        if slot in self.slots_zero:
            return ProbeAction.SEND_ZERO
        if slot in self.slots_one:
            return ProbeAction.SEND_ONE
        return ProbeAction.NONE


@dataclass
class DefenseState:
    """Running probe counters and the flip-rate estimates they imply.

    Before the first probe of a kind arrives, the corresponding estimate is
    0, so estimators consuming it are well defined from the first step; the
    `warmed_up` flag marks when both kinds have data, letting harnesses trim
    the transient from rate plots.
    """

    count_zero_probes: int = 0
    sum_zero_received: int = 0
    count_one_probes: int = 0
    sum_one_flipped: int = 0
    p_hat: float = 0.0
    q_hat: float = 0.0

    def ingest_probe(self, sent: int, received: int) -> None:
        """Record one probe transmission and refresh the matching estimate."""
        if sent not in (0, 1):
            raise ValueError(f"sent bit must be 0 or 1, got {sent}")
        if sent == 0:
            self.count_zero_probes += 1
            self.sum_zero_received += received
            self.q_hat = self.sum_zero_received / self.count_zero_probes
        else:
            self.count_one_probes += 1
            self.sum_one_flipped += 1 - received
            self.p_hat = self.sum_one_flipped / self.count_one_probes

    @property
    def warmed_up(self) -> bool:
        return self.count_zero_probes > 0 and self.count_one_probes > 0

    def rates(self) -> tuple[float, float]:
        return self.p_hat, self.q_hat


def lil_envelope(k: int) -> float:
    """sqrt(log log k / k): the iterated-logarithm rate used to monitor the
    flip-rate estimation error as a function of the probe count."""
    if k < 3:
        raise ValueError("envelope defined for k >= 3")
    return math.sqrt(math.log(math.log(k)) / k)
