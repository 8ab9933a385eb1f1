"""Plant, sensor, channel: exact examples, Monte Carlo frequencies, determinism."""

import numpy as np
import pytest

from _stubs import ConstantNoise, ZeroNoise
from tamperid.noise import GaussianNoise
from tamperid.system import (
    BinarySensor,
    FirInputSource,
    FirPlant,
    IdentifiabilityError,
    TamperChannel,
    tampered_zero_prob,
)

CDF_MINUS_1 = 0.15865525393145705


def test_plant_noiseless_dot_products():
    plant = FirPlant([3.0, -1.0], ZeroNoise(), 1)
    assert plant.step([1.0, 1.0]) == pytest.approx(2.0, abs=0)
    assert plant.step([1.0, 2.0]) == pytest.approx(1.0, abs=0)
    zero = FirPlant([0.0, 0.0], ConstantNoise(0.7), 1)
    assert zero.step([5.0, -9.0]) == pytest.approx(0.7, abs=0)


def test_plant_dimension_mismatch():
    plant = FirPlant([1.0, 2.0], ZeroNoise(), 1)
    with pytest.raises(ValueError):
        plant.step([1.0])


def test_sensor_threshold_boundary():
    s = BinarySensor(1.0)
    assert s.sense(1.0) == 1
    assert s.sense(1.0001) == 0
    assert s.sense(-3.0) == 1


def test_channel_identity_and_reseed_determinism():
    ch = TamperChannel(0.0, 0.0, 42)
    assert all(ch.tamper(1) == 1 for _ in range(100))
    assert all(ch.tamper(0) == 0 for _ in range(100))
    a = TamperChannel(0.37, 0.21, 9)
    b = TamperChannel(0.37, 0.21, 9)
    bits_a = [a.tamper(i % 2) for i in range(10000)]
    bits_b = [b.tamper(i % 2) for i in range(10000)]
    assert bits_a == bits_b


def test_channel_rejects_degenerate_sum():
    with pytest.raises(IdentifiabilityError):
        TamperChannel(0.5, 0.5, 1)
    with pytest.raises(IdentifiabilityError):
        TamperChannel(0.3, 0.7, 1)
    with pytest.raises(ValueError):
        TamperChannel(1.0, 0.0, 1)


def test_channel_empirical_flip_frequencies_3sigma():
    n = 100000
    for p, q in ((0.2, 0.3), (0.8, 0.9), (0.05, 0.6)):
        ch = TamperChannel(p, q, 1234)
        flips_1 = sum(1 - ch.tamper(1) for _ in range(n))
        flips_0 = sum(ch.tamper(0) for _ in range(n))
        for rate, count in ((p, flips_1), (q, flips_0)):
            sd = (rate * (1 - rate) / n) ** 0.5 if 0 < rate < 1 else 1e-9
            assert abs(count / n - rate) <= max(3 * sd, 1e-6), (p, q, rate)


def test_tampered_zero_prob_examples():
    g = GaussianNoise(0.0, 1.0)
    ident = TamperChannel(0.0, 0.0, 1)
    assert tampered_zero_prob(ident, g, 0.0) == pytest.approx(0.5, abs=1e-12)
    ch = TamperChannel(0.2, 0.3, 1)
    expected = (0.5 - 1.0) * CDF_MINUS_1 + 0.7
    assert tampered_zero_prob(ch, g, -1.0) == pytest.approx(expected, abs=1e-9)
    assert tampered_zero_prob(ch, g, -1.0) == pytest.approx(0.62067237, abs=1e-7)


def test_empirical_zero_frequency_matches_analytic():
    # one full plant->sensor->channel pipeline against the closed form
    g = GaussianNoise(0.0, 1.0)
    theta = [3.0, -1.0]
    phi = [0.4, 0.9]
    c = 1.0
    margin = c - (theta[0] * phi[0] + theta[1] * phi[1])
    ch = TamperChannel(0.2, 0.3, 77)
    plant = FirPlant(theta, g, 78)
    sensor = BinarySensor(c)
    n = 100000
    zeros = 0
    for _ in range(n):
        s0 = sensor.sense(plant.step(phi))
        zeros += 1 - ch.tamper(s0)
    target = tampered_zero_prob(ch, g, margin)
    sd = (target * (1 - target) / n) ** 0.5
    assert abs(zeros / n - target) <= 3 * sd


def test_input_source_moments_decay_and_bound_warning():
    src = FirInputSource(2, 1.0, 0.0, bound_m=10.0, rng_seed=5)
    us = [src.next_regressor()[0] for _ in range(50000)]
    assert np.mean(us) == pytest.approx(0.0, abs=0.02)
    assert np.var(us) == pytest.approx(1.0, abs=0.03)
    assert src.bound_violations == 0

    decaying = FirInputSource(2, 1.0, 0.125, bound_m=10.0, rng_seed=5)
    for _ in range(9999):
        decaying.next_regressor()
    late = [decaying.next_regressor()[0] for _ in range(20000)]
    # variance at step k is k^(-1/4); expect the mean variance over the window
    ks = np.arange(10000, 30000, dtype=float)
    assert np.var(late) == pytest.approx(np.mean(ks ** -0.25), rel=0.05)

    tight = FirInputSource(2, 1.0, 0.0, bound_m=0.5, rng_seed=6)
    for _ in range(100):
        tight.next_regressor()
    assert tight.bound_violations > 0
    with pytest.warns(RuntimeWarning):
        tight.warn_if_violations()


def test_regressor_window_shifts():
    src = FirInputSource(3, 1.0, 0.0, bound_m=100.0, rng_seed=1)
    r1 = src.next_regressor()
    r2 = src.next_regressor()
    assert r2[1] == r1[0] and r2[2] == r1[1]
