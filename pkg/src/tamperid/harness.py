"""Experiment runner: wires input source / controller, plant, sensor, channel,
probe defense, and estimator; runs seeded Monte Carlo replicas; aggregates
per-step metrics and writes CSV + manifest.

Replicas are mutually independent and deterministic given
(base_seed, replica_index); aggregation is a streaming reduction in replica
order, so sequential and parallel execution produce identical output.  Traces
are thinned: every step is recorded up to step 1000, then every
`metrics_stride`-th step ahead (the final step always included).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .attack import EstimatedAttack, KnownAttack
from .config import ExperimentConfig
from .control import TrackingController, make_reference
from .defense import DefenseState, ProbeAction
from .gradient import GradientEstimator, gain_threshold
from .newton import NewtonEstimator
from .noise import DensityFloorError
from .system import BinarySensor, FirInputSource, FirPlant, TamperChannel

FULL_RESOLUTION_STEPS = 1000

CSV_HEADER = (
    "k,mean_sq_error,sd_sq_error,mean_rate_stat,mean_regret,"
    "mean_logdet,mean_p_hat,mean_q_hat,mean_J,envelope_value"
)

_NAN = float("nan")


@dataclass(slots=True)
class StepRecord:
    """Metrics snapshot for one recorded simulation step."""

    k: int
    phi: tuple
    y: float
    s0: int
    s: int
    theta_hat: tuple
    sq_error: float
    rate_stat: float
    regret_cum: float
    p_hat: float
    q_hat: float
    logdet_pinv: float
    beta: float
    eig_min: float
    eig_max: float
    u: float
    y_star: float
    j_running: float


@dataclass(slots=True)
class RunSummary:
    """Per-replica bookkeeping surfaced into the manifest."""

    bound_violations: int = 0
    clamp_activations: int = 0
    floor_activations: int = 0
    resync_count: int = 0


_METRICS = (
    "sq_error",
    "rate_stat",
    "regret_cum",
    "p_hat",
    "q_hat",
    "logdet_pinv",
    "beta",
    "eig_min",
    "eig_max",
    "u",
    "y_star",
    "j_running",
    "y",
)


@dataclass
class AggregateSeries:
    """Per-step mean and standard deviation of each metric across replicas."""

    ks: np.ndarray
    replicas: int
    mean: dict[str, np.ndarray]
    sd: dict[str, np.ndarray]
    mean_theta: np.ndarray  # shape (len(ks), dim)
    envelope: np.ndarray = field(default=None)
    envelope_c: float = _NAN

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of grid steps inside [lo, hi]."""
        return (self.ks >= lo) & (self.ks <= hi)


def record_grid(horizon: int, stride: int) -> list[int]:
    """Recorded step indices: full resolution early, thinned afterward."""
    if horizon <= 0:
        return []
    ks = list(range(1, min(horizon, FULL_RESOLUTION_STEPS) + 1))
    if horizon > FULL_RESOLUTION_STEPS:
        ks.extend(range(FULL_RESOLUTION_STEPS + stride, horizon + 1, stride))
        if ks[-1] != horizon:
            ks.append(horizon)
    return ks


def run_replica(cfg: ExperimentConfig, replica_index: int) -> list[StepRecord]:
    """Simulate one replica; deterministic given (cfg.base_seed, replica_index)."""
    records, _ = _run_replica(cfg, replica_index)
    return records


def _streams(cfg: ExperimentConfig, replica_index: int):
    root = np.random.SeedSequence(entropy=cfg.base_seed, spawn_key=(replica_index,))
    return root.spawn(4)  # input, plant, channel, controller-init


def _run_replica(cfg: ExperimentConfig, replica_index: int) -> tuple[list[StepRecord], RunSummary]:
    horizon = cfg.horizon
    records: list[StepRecord] = []
    summary = RunSummary()
    if horizon <= 0:
        return records, summary

    seed_input, seed_plant, seed_channel, seed_ctrl = _streams(cfg, replica_index)
    noise = cfg.make_noise()
    cset = cfg.make_set()
    plant = FirPlant(cfg.theta, noise, seed_plant)
    sensor = BinarySensor(cfg.threshold_c)
    channel = TamperChannel(cfg.channel_p, cfg.channel_q, seed_channel)

    if cfg.attack_known:
        defense = None
        schedule = None
        attack = KnownAttack(cfg.channel_p, cfg.channel_q)
    else:
        defense = DefenseState()
        schedule = cfg.make_schedule()
        attack = EstimatedAttack(defense)

    controller = None
    reference = None
    source = None
    if cfg.control_enabled:
        ctrl_rng = np.random.default_rng(seed_ctrl)
        init_inputs = (cfg.u0_std * ctrl_rng.normal(size=cfg.dim - 1)).tolist()
        controller = TrackingController(
            cfg.dim, cfg.input_clamp, cfg.theta1_floor, initial_inputs=init_inputs
        )
        reference = make_reference(
            cfg.reference_kind, cfg.reference_amplitude, cfg.reference_period
        )
    else:
        source = FirInputSource(
            cfg.dim,
            math.sqrt(cfg.input_variance),
            cfg.input_variance_decay,
            cfg.input_bound_m,
            seed_input,
        )

    if cfg.is_gradient:
        est = GradientEstimator(
            cfg.grad_theta0,
            cset,
            noise,
            cfg.threshold_c,
            attack,
            cfg.grad_beta,
            cfg.grad_gamma,
        )
        grad_theta = est._theta  # mutated in place by update(); hot-path view
        newton = None
    else:
        est = None
        newton = NewtonEstimator(
            cfg.newton_theta0,
            cset,
            noise,
            cfg.threshold_c,
            attack,
            p1_scale=cfg.newton_p1_scale,
            bound_m=cfg.input_bound_m,
            density_radius=cfg.newton_beta_radius,
            beta_burn_in=cfg.newton_beta_burn_in,
            check_stride=cfg.newton_check_stride,
        )

    theta_true = [float(v) for v in cfg.theta]
    dim = cfg.dim
    gamma = cfg.grad_gamma
    is_grad = cfg.is_gradient
    is_gamma_one = abs(gamma - 1.0) < 1e-12
    grid = record_grid(horizon, cfg.metrics_stride)
    grid_pos = 0
    next_record = grid[0]

    regret_cum = 0.0
    j_sum = 0.0
    eig_min = eig_max = _NAN
    eig_stride = cfg.newton_eig_stride

    for k in range(1, horizon + 1):
        if controller is not None:
            y_star = reference.value(k + 1)
            th_for_ctrl = grad_theta if is_grad else newton.theta_hat
            u, phi = controller.control(th_for_ctrl, noise, y_star)
        else:
            y_star = _NAN
            u = _NAN
            phi = source.next_regressor()

        y = plant.step(phi)
        s0 = sensor.sense(y)
        s = channel.tamper(s0)

        if defense is not None:
            action = schedule.plan(k)
            if action is ProbeAction.SEND_ZERO:
                defense.ingest_probe(0, channel.tamper(0))
            elif action is ProbeAction.SEND_ONE:
                defense.ingest_probe(1, channel.tamper(1))

        if is_grad:
            resid = 0.0
            for i in range(dim):
                resid += (theta_true[i] - grad_theta[i]) * phi[i]
            regret_cum += resid * resid
            est.update(phi, s)
            sq = 0.0
            for i in range(dim):
                d = theta_true[i] - grad_theta[i]
                sq += d * d
        else:
            th = newton.theta_hat
            resid = 0.0
            for i in range(dim):
                resid += (theta_true[i] - th[i]) * phi[i]
            regret_cum += resid * resid
            newton.update(phi, s)
            th = newton.theta_hat
            sq = 0.0
            for i in range(dim):
                d = theta_true[i] - th[i]
                sq += d * d
            if k % eig_stride == 0:
                eig_min, eig_max = newton.eigen_extremes()

        if controller is not None:
            e = y - y_star
            j_sum += e * e

        if k == next_record:
            if is_grad:
                theta_snapshot = tuple(grad_theta)
                logdet = _NAN
                beta = _NAN
            else:
                theta_snapshot = tuple(newton.theta_hat)
                logdet = newton.logdet_P_inv
                beta = newton.beta
            if k >= 2:
                if is_grad:
                    rate = k * sq / math.log(k) if is_gamma_one else (k**gamma) * sq
                else:
                    rate = sq * k**0.75 / math.log(k)
            else:
                rate = _NAN
            records.append(
                StepRecord(
                    k=k,
                    phi=tuple(phi),
                    y=y,
                    s0=s0,
                    s=s,
                    theta_hat=theta_snapshot,
                    sq_error=sq,
                    rate_stat=rate,
                    regret_cum=regret_cum,
                    p_hat=defense.p_hat if defense is not None else _NAN,
                    q_hat=defense.q_hat if defense is not None else _NAN,
                    logdet_pinv=logdet,
                    beta=beta,
                    eig_min=eig_min,
                    eig_max=eig_max,
                    u=u,
                    y_star=y_star,
                    j_running=j_sum / k if controller is not None else _NAN,
                )
            )
            grid_pos += 1
            next_record = grid[grid_pos] if grid_pos < len(grid) else 0

    if source is not None:
        summary.bound_violations = source.bound_violations
    if controller is not None:
        summary.clamp_activations = controller.clamp_activations
        summary.floor_activations = controller.floor_activations
    if newton is not None:
        summary.resync_count = newton.resync_count
    return records, summary


class _Accumulator:
    """Streaming per-grid-point mean/sd over replicas, in replica order."""

    def __init__(self, ks: list[int], dim: int):
        n = len(ks)
        self.ks = np.asarray(ks, dtype=float)
        self.count = 0
        self.sums = {m: np.zeros(n) for m in _METRICS}
        self.sumsq = {m: np.zeros(n) for m in _METRICS}
        self.theta_sum = np.zeros((n, dim))

    def add(self, records: list[StepRecord]) -> None:
        if len(records) != len(self.ks):
            raise ValueError("replica produced an unexpected record grid")
        self.count += 1
        cols = {m: np.fromiter((getattr(r, m) for r in records), dtype=float) for m in _METRICS}
        for m in _METRICS:
            self.sums[m] += cols[m]
            self.sumsq[m] += cols[m] ** 2
        self.theta_sum += np.asarray([r.theta_hat for r in records], dtype=float)

    def finish(self) -> AggregateSeries:
        n = self.count
        mean = {m: self.sums[m] / n for m in _METRICS}
        sd = {}
        for m in _METRICS:
            if n > 1:
                var = (self.sumsq[m] - n * mean[m] ** 2) / (n - 1)
                sd[m] = np.sqrt(np.maximum(var, 0.0))
            else:
                sd[m] = np.zeros_like(mean[m])
        return AggregateSeries(
            ks=self.ks, replicas=n, mean=mean, sd=sd, mean_theta=self.theta_sum / n
        )


def envelope_series(kind: str, params: dict, ks, metric) -> tuple[np.ndarray, float]:
    """Evaluate a named rate envelope on the grid and fit its constant.

    The constant is the max of metric/raw over the calibration window
    [max(ks)/10, max(ks)], so the fitted envelope dominates the metric there
    by construction.  Returns (fitted values, constant).
    """
    ks = np.asarray(ks, dtype=float)
    metric = np.asarray(metric, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "power_rate":
            raw = ks ** -float(params["gamma"])
        elif kind == "log_over_power":
            raw = np.where(ks >= 2, np.log(np.maximum(ks, 2)) / ks**0.75, np.nan)
        elif kind == "lil_rate":
            raw = np.where(ks >= 3, np.sqrt(np.log(np.log(np.maximum(ks, 3))) / ks), np.nan)
        elif kind == "regret_rate":
            beta = np.asarray(params["beta"], dtype=float)
            logdet = np.asarray(params["logdet"], dtype=float)
            raw = logdet / beta**2
        else:
            raise ValueError(f"unknown envelope kind {kind!r}")
        n = ks.max()
        win = (ks >= n / 10) & (ks <= n)
        ratio = metric[win] / raw[win]
    ratio = ratio[np.isfinite(ratio)]
    c = float(ratio.max()) if ratio.size else _NAN
    return c * raw, c


def _envelope_target(cfg: ExperimentConfig, agg: AggregateSeries) -> tuple[str, dict, np.ndarray]:
    kind = cfg.envelope_kind
    if kind == "auto":
        if cfg.control_enabled:
            kind = "lil_rate"
        elif cfg.is_gradient:
            kind = "power_rate"
        else:
            kind = "log_over_power"
    params: dict = {"gamma": cfg.grad_gamma}
    if kind == "regret_rate":
        params["beta"] = agg.mean["beta"]
        params["logdet"] = agg.mean["logdet_pinv"]
        metric = agg.mean["regret_cum"]
    elif kind == "lil_rate":
        metric = np.abs(agg.mean["j_running"] - cfg.noise_variance)
    else:
        metric = agg.mean["sq_error"]
    return kind, params, metric


def _worker(args) -> tuple[list[StepRecord], RunSummary]:
    cfg, idx = args
    return _run_replica(cfg, idx)


def run_experiment(
    cfg: ExperimentConfig, out_dir: str | None = None, threads: int | None = None
) -> tuple[AggregateSeries, dict]:
    """Run all replicas, aggregate, and optionally persist CSV + manifest."""
    t0 = time.perf_counter()
    if threads is None:
        threads = int(os.environ.get("TAMPERID_THREADS", "1") or "1")
    acc = _Accumulator(record_grid(cfg.horizon, cfg.metrics_stride), cfg.dim)
    totals = RunSummary()
    jobs = [(cfg, r) for r in range(cfg.replicas)]
    if threads > 1 and cfg.replicas > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for records, summary in pool.map(_worker, jobs):
                acc.add(records)
                _merge(totals, summary)
    else:
        for job in jobs:
            records, summary = _worker(job)
            acc.add(records)
            _merge(totals, summary)
    agg = acc.finish()

    kind, params, metric = _envelope_target(cfg, agg)
    agg.envelope, agg.envelope_c = envelope_series(kind, params, agg.ks, metric)

    manifest = {
        "run.label": cfg.label,
        "run.version": __version__,
        "run.algorithm": cfg.algorithm,
        "run.replicas": str(cfg.replicas),
        "run.envelope_kind": kind,
        "run.envelope_c": repr(agg.envelope_c),
        "run.bound_violations_total": str(totals.bound_violations),
        "run.clamp_activations_total": str(totals.clamp_activations),
        "run.floor_activations_total": str(totals.floor_activations),
        "run.resync_total": str(totals.resync_count),
    }
    if cfg.control_enabled:
        steps = cfg.horizon * cfg.replicas
        manifest["run.guarded_step_fraction"] = repr(
            (totals.clamp_activations + totals.floor_activations) / steps
        )
    if cfg.is_gradient:
        manifest["run.grad_gain_threshold"] = repr(_threshold_log(cfg))
        manifest["run.grad_beta"] = repr(cfg.grad_beta)
    for key in sorted(cfg.raw):
        manifest[f"config.{key}"] = cfg.raw[key]
    manifest["run.wall_time_s"] = f"{time.perf_counter() - t0:.3f}"

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, f"{cfg.label}.csv"), agg)
        write_manifest(os.path.join(out_dir, f"{cfg.label}.manifest.txt"), manifest)
    return agg, manifest


def _threshold_log(cfg: ExperimentConfig) -> float:
    """Gain level the unit-step rate argument wants exceeded, for the manifest."""
    noise = cfg.make_noise()
    radius = cfg.grad_f_inf_radius
    if radius is None:
        radius = cfg.threshold_c + cfg.input_bound_m * cfg.make_set().norm_bound()
    try:
        return gain_threshold(
            noise,
            cfg.threshold_c,
            radius,
            cfg.channel_p,
            cfg.channel_q,
            cfg.grad_excitation_delta,
        )
    except DensityFloorError:
        return float("inf")


def _merge(totals: RunSummary, one: RunSummary) -> None:
    totals.bound_violations += one.bound_violations
    totals.clamp_activations += one.clamp_activations
    totals.floor_activations += one.floor_activations
    totals.resync_count += one.resync_count


def write_csv(path: str, agg: AggregateSeries) -> None:
    """Persist the aggregate as the fixed-schema CSV (header + one row per step)."""
    env = agg.envelope if agg.envelope is not None else np.full(agg.ks.shape, _NAN)
    lines = [CSV_HEADER]
    for i, k in enumerate(agg.ks):
        lines.append(
            ",".join(
                (
                    str(int(k)),
                    repr(float(agg.mean["sq_error"][i])),
                    repr(float(agg.sd["sq_error"][i])),
                    repr(float(agg.mean["rate_stat"][i])),
                    repr(float(agg.mean["regret_cum"][i])),
                    repr(float(agg.mean["logdet_pinv"][i])),
                    repr(float(agg.mean["p_hat"][i])),
                    repr(float(agg.mean["q_hat"][i])),
                    repr(float(agg.mean["j_running"][i])),
                    repr(float(env[i])),
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(path: str, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in manifest.items():
            fh.write(f"{key}={value}\n")
