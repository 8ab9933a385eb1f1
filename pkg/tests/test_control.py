"""Tracking controller: control law arithmetic, guards, cost function."""

import math

import numpy as np
import pytest

from _stubs import ZeroNoise
from tamperid.control import TrackingController, make_reference, tracking_cost
from tamperid.noise import GaussianNoise
from tamperid.system import FirPlant


def test_reference_values():
    sin = make_reference("sinusoid", 4.0, 18000.0)
    assert sin.value(0) == pytest.approx(0.0, abs=1e-12)
    assert sin.value(4500) == pytest.approx(4.0, rel=1e-12)
    assert sin.value(9000) == pytest.approx(0.0, abs=1e-9)
    const = make_reference("constant", 2.5)
    assert const.value(0) == 2.5
    assert const.value(10**6) == 2.5
    with pytest.raises(ValueError):
        make_reference("ramp", 1.0)


def test_control_scalar_case():
    ctrl = TrackingController(1)
    u, phi = ctrl.control([2.0], GaussianNoise(0, 1), 6.0)
    assert u == pytest.approx(3.0)
    assert phi == [3.0]


def test_control_two_tap_case():
    ctrl = TrackingController(2, initial_inputs=[2.0])
    u, phi = ctrl.control([3.0, -1.0], GaussianNoise(0, 1), 4.0)
    assert u == pytest.approx(2.0)  # (4 + 2) / 3
    assert phi == [2.0, 2.0]


def test_control_nonzero_noise_mean_enters_law():
    ctrl = TrackingController(1)
    u, _ = ctrl.control([2.0], GaussianNoise(0.5, 1.0), 6.0)
    assert u == pytest.approx((6.0 - 0.5) / 2.0)


def test_certainty_equivalence_identity():
    rng = np.random.default_rng(3)
    ctrl = TrackingController(3, input_clamp=1e9, initial_inputs=[0.3, -0.2])
    noise = GaussianNoise(0.25, 1.0)
    for k in range(200):
        th = rng.uniform(0.5, 3.0, 3) * np.sign(rng.normal(size=3))
        th[0] = abs(th[0]) + 0.5
        y_star = 4.0 * math.sin(k / 31.0)
        u, phi = ctrl.control(th, noise, y_star)
        assert float(np.dot(th, phi)) + noise.mean() == pytest.approx(y_star, abs=1e-10)


def test_floor_guard_and_clamp():
    ctrl = TrackingController(1, input_clamp=50.0, theta1_floor=1e-3)
    u, _ = ctrl.control([1e-9], GaussianNoise(0, 1), 6.0)
    assert u == 50.0  # divisor floored to 1e-3, then clamped
    assert ctrl.floor_activations == 1
    assert ctrl.clamp_activations == 1
    u, _ = ctrl.control([-1e-9], GaussianNoise(0, 1), 6.0)
    assert u == -50.0


def test_regressor_bound_under_clamp():
    ctrl = TrackingController(2, input_clamp=2.0, initial_inputs=[0.0])
    rng = np.random.default_rng(9)
    for _ in range(500):
        th = rng.uniform(-6, 6, 2)
        th[0] = th[0] if abs(th[0]) > 1e-6 else 1.0
        _, phi = ctrl.control(th, GaussianNoise(0, 1), float(rng.uniform(-4, 4)))
        assert np.linalg.norm(phi) <= ctrl.regressor_bound() + 1e-12
    assert ctrl.regressor_bound() == pytest.approx(math.sqrt(2) * 2.0)


def test_tracking_cost_examples():
    ys = [1.0, 2.0, 3.0]
    assert tracking_cost(ys, ys) == 0.0
    assert tracking_cost([2.0, 3.0, 4.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tracking_cost([1.0], [1.0, 2.0])


def test_noiseless_plant_with_true_parameter_tracks_exactly():
    theta = [3.0, -1.0]
    plant = FirPlant(theta, ZeroNoise(), 0)
    ctrl = TrackingController(2, initial_inputs=[0.0])
    noise = ZeroNoise()
    ys, stars = [], []
    for k in range(1, 300):
        y_star = 4.0 * math.sin(2 * math.pi * k / 100.0)
        u, phi = ctrl.control(theta, noise, y_star)
        ys.append(plant.step(phi))
        stars.append(y_star)
    assert tracking_cost(ys, stars) == pytest.approx(0.0, abs=1e-20)


def test_initial_inputs_length_checked():
    with pytest.raises(ValueError):
        TrackingController(3, initial_inputs=[1.0])
    with pytest.raises(ValueError):
        TrackingController(2, input_clamp=0.0)
