"""Flat key=value experiment configuration: parsing, validation, typing.

The on-disk format is line-oriented `section.key=value` text ('#' starts a
comment), trivially diffable and echoed verbatim into run manifests.  Vector
values are comma-separated scalars; slot sets are comma-separated integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .defense import InsertionSchedule
from .noise import make_noise
from .projection import Ball, Box, ConstraintSet
from .system import DEGENERACY_TOL

ALGORITHMS = ("GRP-KP", "GRP-UP", "NRP-KP", "NRP-UP")


class ConfigError(ValueError):
    """Invalid configuration; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


# registry of every recognized key and how to parse its value
def _f(s: str) -> float:
    return float(s)


def _i(s: str) -> int:
    return int(s)


def _s(s: str) -> str:
    return s


def _b(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _vec(s: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in s.split(",") if tok.strip() != "")


def _iset(s: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in s.split(",") if tok.strip() != "")


KNOWN_KEYS: dict[str, object] = {
    "algorithm": _s,
    "horizon": _i,
    "replicas": _i,
    "metrics_stride": _i,
    "seeds.base": _i,
    "plant.theta": _vec,
    "sensor.C": _f,
    "noise.kind": _s,
    "noise.mean": _f,
    "noise.variance": _f,
    "channel.p": _f,
    "channel.q": _f,
    "input.kind": _s,
    "input.variance": _f,
    "input.variance_decay": _f,
    "input.bound_M": _f,
    "theta_set.shape": _s,
    "theta_set.lower": _vec,
    "theta_set.upper": _vec,
    "theta_set.center": _vec,
    "theta_set.radius": _f,
    "grad.beta": _f,
    "grad.gamma": _f,
    "grad.theta0": _vec,
    "grad.f_inf_radius": _f,
    "grad.excitation_h": _i,
    "grad.excitation_delta": _f,
    "newton.P1_scale": _f,
    "newton.theta0": _vec,
    "newton.eig_stride": _i,
    "newton.beta_radius": _f,
    "newton.beta_burn_in": _i,
    "newton.check_stride": _i,
    "defense.T": _i,
    "defense.slots_zero": _iset,
    "defense.slots_one": _iset,
    "control.enabled": _b,
    "control.reference.kind": _s,
    "control.reference.amplitude": _f,
    "control.reference.period": _f,
    "control.theta1_floor": _f,
    "control.input_clamp": _f,
    "control.u0_std": _f,
    "envelope.kind": _s,
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat config text into a raw string-valued mapping."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {line.rstrip()!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def apply_overrides(raw: dict[str, str], overrides) -> dict[str, str]:
    """Apply repeatable key=value overrides, rejecting unknown keys."""
    merged = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must be key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown config key")
        merged[key] = value.strip()
    return merged


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully typed experiment description; picklable for parallel replicas."""

    label: str
    algorithm: str
    horizon: int
    replicas: int
    metrics_stride: int
    base_seed: int
    theta: tuple[float, ...]
    threshold_c: float
    noise_kind: str
    noise_mean: float
    noise_variance: float
    channel_p: float
    channel_q: float
    input_variance: float
    input_variance_decay: float
    input_bound_m: float
    set_shape: str
    set_lower: tuple[float, ...]
    set_upper: tuple[float, ...]
    set_center: tuple[float, ...]
    set_radius: float
    grad_beta: float
    grad_gamma: float
    grad_theta0: tuple[float, ...]
    grad_f_inf_radius: float | None
    grad_excitation_h: int
    grad_excitation_delta: float
    newton_p1_scale: float
    newton_theta0: tuple[float, ...]
    newton_eig_stride: int
    newton_beta_radius: float | None
    newton_beta_burn_in: int
    newton_check_stride: int
    defense_period: int
    defense_slots_zero: tuple[int, ...]
    defense_slots_one: tuple[int, ...]
    control_enabled: bool
    reference_kind: str
    reference_amplitude: float
    reference_period: float
    theta1_floor: float
    input_clamp: float
    u0_std: float
    envelope_kind: str
    raw: dict[str, str] = field(compare=False, repr=False, default_factory=dict)

    # ---- derived builders -------------------------------------------------
    def make_noise(self):
        return make_noise(self.noise_kind, self.noise_mean, self.noise_variance)

    def make_set(self) -> ConstraintSet:
        if self.set_shape == "box":
            return Box(self.set_lower, self.set_upper)
        return Ball(self.set_center, self.set_radius)

    def make_schedule(self) -> InsertionSchedule:
        return InsertionSchedule(
            self.defense_period,
            frozenset(self.defense_slots_zero),
            frozenset(self.defense_slots_one),
        )

    @property
    def dim(self) -> int:
        return len(self.theta)

    @property
    def is_gradient(self) -> bool:
        return self.algorithm.startswith("GRP")

    @property
    def attack_known(self) -> bool:
        return self.algorithm.endswith("KP")

    def estimator_theta0(self) -> tuple[float, ...]:
        return self.grad_theta0 if self.is_gradient else self.newton_theta0


_DEFAULTS = {
    "metrics_stride": "10",
    "noise.kind": "gaussian",
    "noise.mean": "0",
    "noise.variance": "1",
    "input.kind": "fir_window",
    "input.variance": "1",
    "input.variance_decay": "0",
    "input.bound_M": "10",
    "theta_set.shape": "box",
    "grad.beta": "1",
    "grad.gamma": "1",
    "grad.excitation_h": "2",
    "grad.excitation_delta": "1",
    "newton.P1_scale": "1",
    "newton.eig_stride": "100",
    "newton.beta_burn_in": "100",
    "newton.check_stride": "1000",
    "defense.T": "20",
    "defense.slots_zero": "1,3,5,7,9",
    "defense.slots_one": "2,4,6,8,10",
    "control.enabled": "false",
    "control.reference.kind": "constant",
    "control.reference.amplitude": "0",
    "control.reference.period": "1",
    "control.theta1_floor": "1e-3",
    "control.input_clamp": "50",
    "control.u0_std": "1",
    "envelope.kind": "auto",
}


def _get(raw: dict[str, str], key: str, required: bool = False):
    if key in raw:
        try:
            return KNOWN_KEYS[key](raw[key])
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, f"bad value {raw[key]!r}: {exc}") from None
    if key in _DEFAULTS:
        return KNOWN_KEYS[key](_DEFAULTS[key])
    if required:
        raise ConfigError(key, "required key missing")
    return None


def build_config(raw: dict[str, str], label: str = "run") -> ExperimentConfig:
    """Validate a raw mapping and construct the typed config.

    Raises ConfigError naming the offending key on the first violation found.
    """
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown config key")

    algorithm = _get(raw, "algorithm", required=True)
    if algorithm not in ALGORITHMS:
        raise ConfigError("algorithm", f"must be one of {ALGORITHMS}, got {algorithm!r}")
    horizon = _get(raw, "horizon", required=True)
    if horizon < 1:
        raise ConfigError("horizon", f"must be >= 1, got {horizon}")
    replicas = _get(raw, "replicas", required=True)
    if replicas < 1:
        raise ConfigError("replicas", f"must be >= 1, got {replicas}")
    stride = _get(raw, "metrics_stride")
    if stride < 1:
        raise ConfigError("metrics_stride", f"must be >= 1, got {stride}")
    base_seed = _get(raw, "seeds.base", required=True)

    theta = _get(raw, "plant.theta", required=True)
    if len(theta) < 1 or not all(math.isfinite(v) for v in theta):
        raise ConfigError("plant.theta", "must be a nonempty finite vector")
    threshold_c = _get(raw, "sensor.C", required=True)
    if not math.isfinite(threshold_c):
        raise ConfigError("sensor.C", "must be finite")

    noise_kind = _get(raw, "noise.kind")
    noise_mean = _get(raw, "noise.mean")
    noise_variance = _get(raw, "noise.variance")
    if noise_variance <= 0:
        raise ConfigError("noise.variance", f"must be > 0, got {noise_variance}")
    if noise_kind.lower() != "gaussian":
        raise ConfigError("noise.kind", f"unsupported kind {noise_kind!r}")

    p = _get(raw, "channel.p", required=True)
    q = _get(raw, "channel.q", required=True)
    for key, v in (("channel.p", p), ("channel.q", q)):
        if not (0.0 <= v < 1.0):
            raise ConfigError(key, f"must lie in [0, 1), got {v}")
    if abs(p + q - 1.0) <= DEGENERACY_TOL:
        raise ConfigError(
            "channel.p+channel.q", f"sum {p + q} violates identifiability (p + q != 1)"
        )

    input_kind = _get(raw, "input.kind")
    if input_kind != "fir_window":
        raise ConfigError("input.kind", f"unsupported kind {input_kind!r}")
    input_variance = _get(raw, "input.variance")
    if input_variance <= 0:
        raise ConfigError("input.variance", "must be > 0")
    input_decay = _get(raw, "input.variance_decay")
    bound_m = _get(raw, "input.bound_M")
    if bound_m <= 0:
        raise ConfigError("input.bound_M", "must be > 0")

    shape = _get(raw, "theta_set.shape")
    dim = len(theta)
    lower = upper = center = ()
    radius = 0.0
    if shape == "box":
        lower = _get(raw, "theta_set.lower", required=True)
        upper = _get(raw, "theta_set.upper", required=True)
        if len(lower) != dim or len(upper) != dim:
            raise ConfigError("theta_set.lower", f"must have dimension {dim}")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ConfigError("theta_set.lower", "box is empty (lower > upper)")
    elif shape == "ball":
        center = _get(raw, "theta_set.center", required=True)
        radius = _get(raw, "theta_set.radius", required=True)
        if len(center) != dim:
            raise ConfigError("theta_set.center", f"must have dimension {dim}")
        if radius <= 0:
            raise ConfigError("theta_set.radius", "must be > 0")
    else:
        raise ConfigError("theta_set.shape", f"must be box or ball, got {shape!r}")

    grad_beta = _get(raw, "grad.beta")
    grad_gamma = _get(raw, "grad.gamma")
    if not (0.5 < grad_gamma <= 1.0):
        raise ConfigError("grad.gamma", f"must lie in (1/2, 1], got {grad_gamma}")
    if grad_beta <= 0:
        raise ConfigError("grad.beta", "must be > 0")
    grad_theta0 = _get(raw, "grad.theta0") or theta_zero_default(dim)
    newton_theta0 = _get(raw, "newton.theta0") or theta_zero_default(dim)
    for key, t0 in (("grad.theta0", grad_theta0), ("newton.theta0", newton_theta0)):
        if len(t0) != dim:
            raise ConfigError(key, f"must have dimension {dim}")

    defense_period = _get(raw, "defense.T")
    slots_zero = _get(raw, "defense.slots_zero")
    slots_one = _get(raw, "defense.slots_one")
    if algorithm.endswith("UP"):
        try:
            InsertionSchedule(defense_period, frozenset(slots_zero), frozenset(slots_one))
        except ValueError as exc:
            raise ConfigError("defense.slots_zero", str(exc)) from None

    control_enabled = _get(raw, "control.enabled")
    reference_kind = _get(raw, "control.reference.kind")
    if control_enabled and reference_kind not in ("sinusoid", "constant"):
        raise ConfigError("control.reference.kind", f"unsupported kind {reference_kind!r}")
    reference_period = _get(raw, "control.reference.period")
    if control_enabled and reference_kind == "sinusoid" and reference_period <= 0:
        raise ConfigError("control.reference.period", "must be > 0")

    envelope_kind = _get(raw, "envelope.kind")
    if envelope_kind not in ("auto", "power_rate", "log_over_power", "regret_rate", "lil_rate"):
        raise ConfigError("envelope.kind", f"unknown envelope kind {envelope_kind!r}")

    return ExperimentConfig(
        label=label,
        algorithm=algorithm,
        horizon=horizon,
        replicas=replicas,
        metrics_stride=stride,
        base_seed=base_seed,
        theta=tuple(theta),
        threshold_c=threshold_c,
        noise_kind=noise_kind,
        noise_mean=noise_mean,
        noise_variance=noise_variance,
        channel_p=p,
        channel_q=q,
        input_variance=input_variance,
        input_variance_decay=input_decay,
        input_bound_m=bound_m,
        set_shape=shape,
        set_lower=tuple(lower),
        set_upper=tuple(upper),
        set_center=tuple(center),
        set_radius=radius,
        grad_beta=grad_beta,
        grad_gamma=grad_gamma,
        grad_theta0=tuple(grad_theta0),
        grad_f_inf_radius=_get(raw, "grad.f_inf_radius"),
        grad_excitation_h=_get(raw, "grad.excitation_h"),
        grad_excitation_delta=_get(raw, "grad.excitation_delta"),
        newton_p1_scale=_get(raw, "newton.P1_scale"),
        newton_theta0=tuple(newton_theta0),
        newton_eig_stride=_get(raw, "newton.eig_stride"),
        newton_beta_radius=_get(raw, "newton.beta_radius"),
        newton_beta_burn_in=_get(raw, "newton.beta_burn_in"),
        newton_check_stride=_get(raw, "newton.check_stride"),
        defense_period=defense_period,
        defense_slots_zero=tuple(slots_zero),
        defense_slots_one=tuple(slots_one),
        control_enabled=control_enabled,
        reference_kind=reference_kind,
        reference_amplitude=_get(raw, "control.reference.amplitude"),
        reference_period=reference_period,
        theta1_floor=_get(raw, "control.theta1_floor"),
        input_clamp=_get(raw, "control.input_clamp"),
        u0_std=_get(raw, "control.u0_std"),
        envelope_kind=envelope_kind,
        raw=dict(raw),
    )


def theta_zero_default(dim: int) -> tuple[float, ...]:
    return tuple(0.0 for _ in range(dim))
