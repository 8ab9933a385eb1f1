"""Recursive identification of binary-sensed FIR systems over bit-flipping
channels, with periodic-probe flip-rate estimation and adaptive tracking."""

__version__ = "0.1.0"

from .attack import EstimatedAttack, KnownAttack
from .control import TrackingController, make_reference, tracking_cost
from .defense import DefenseState, InsertionSchedule, ProbeAction, lil_envelope
from .gradient import GradientEstimator, gain_threshold
from .newton import NewtonEstimator, NumericalBreakdown
from .noise import DensityFloorError, GaussianNoise, NoiseModel, make_noise
from .projection import Ball, Box, project_euclidean, project_weighted
from .system import (
    BinarySensor,
    FirInputSource,
    FirPlant,
    IdentifiabilityError,
    TamperChannel,
    tampered_zero_prob,
)

__all__ = [
    "BinarySensor",
    "Ball",
    "Box",
    "DefenseState",
    "DensityFloorError",
    "EstimatedAttack",
    "FirInputSource",
    "FirPlant",
    "GaussianNoise",
    "GradientEstimator",
    "IdentifiabilityError",
    "InsertionSchedule",
    "KnownAttack",
    "NewtonEstimator",
    "NoiseModel",
    "NumericalBreakdown",
    "ProbeAction",
    "TamperChannel",
    "TrackingController",
    "gain_threshold",
    "lil_envelope",
    "make_noise",
    "make_reference",
    "project_euclidean",
    "project_weighted",
    "tampered_zero_prob",
    "tracking_cost",
    "__version__",
]
