"""Projections: frozen examples, grid-refinement oracle, operator properties.

The oracle is a multi-resolution grid search, independent of the KKT-based
solvers it checks: it scans a coarse lattice over the feasible set and
refines around the incumbent until the lattice pitch drops below 1e-4.
"""

import numpy as np
import pytest

from tamperid.projection import Ball, Box, project_euclidean, project_weighted


def grid_oracle_box(lower, upper, Q, x, levels=14, pts=21, window=5):
    """Dense-grid minimizer of the weighted distance over a box.

    Refines around the incumbent with a window of several lattice pitches:
    on an ill-conditioned quadratic the coarse argmin can sit a few pitches
    from the true minimizer along the flat valley, so a one-pitch window can
    lose the basin while barely moving the objective.
    """
    lo = np.asarray(lower, float).copy()
    hi = np.asarray(upper, float).copy()
    n = lo.size
    best = None
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        d = mesh - x
        vals = np.einsum("ij,jk,ik->i", d, Q, d)
        best = mesh[int(np.argmin(vals))]
        pitch = (hi - lo) / (pts - 1)
        lo = np.maximum(np.asarray(lower, float), best - window * pitch)
        hi = np.minimum(np.asarray(upper, float), best + window * pitch)
    return best


def objective(Q, x, w):
    d = np.asarray(w) - x
    return float(d @ Q @ d)


def test_euclidean_box_examples():
    box = Box([-6, -6], [6, 6])
    assert np.allclose(project_euclidean(box, [1, 1]), [1, 1])
    assert np.allclose(project_euclidean(box, [9, -7]), [6, -6])


def test_euclidean_ball_examples():
    ball = Ball([0, 0], 2.0)
    assert np.allclose(project_euclidean(ball, [3, 4]), [1.2, 1.6])
    inside = np.array([0.3, -0.4])
    assert np.array_equal(project_euclidean(ball, inside), inside)


def test_weighted_identity_matches_euclidean():
    rng = np.random.default_rng(3)
    box = Box([-2, -1, -3], [1, 2, 0.5])
    ball = Ball([0.5, -0.5, 0.0], 1.7)
    eye = np.eye(3)
    for _ in range(200):
        x = rng.normal(0, 3, 3)
        for cset in (box, ball):
            assert np.allclose(
                project_weighted(cset, eye, x), project_euclidean(cset, x), atol=1e-9
            )


def test_weighted_box_frozen_examples():
    box = Box([-1, -1], [1, 1])
    got = project_weighted(box, np.diag([1.0, 100.0]), [2.0, 2.0])
    assert np.allclose(got, [1, 1], atol=1e-10)
    Q = np.array([[2.0, 1.0], [1.0, 2.0]])
    got = project_weighted(box, Q, [3.0, 0.0])
    oracle = grid_oracle_box([-1, -1], [1, 1], Q, np.array([3.0, 0.0]))
    assert np.linalg.norm(got - oracle) <= 2e-3
    assert np.allclose(got, [1, 1], atol=1e-9)


def test_weighted_box_against_grid_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        lo = rng.uniform(-2, 0, n)
        hi = lo + rng.uniform(0.5, 2.5, n)
        A = rng.normal(0, 1, (n, n))
        Q = A @ A.T + 0.3 * np.eye(n)
        x = rng.uniform(-4, 4, n)
        box = Box(lo, hi)
        got = project_weighted(box, Q, x)
        oracle = grid_oracle_box(lo, hi, Q, x)
        assert objective(Q, x, got) <= objective(Q, x, oracle) + 1e-6
        assert np.linalg.norm(got - oracle) <= 2e-3


def test_weighted_ball_against_sampled_oracle():
    rng = np.random.default_rng(13)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        center = rng.normal(0, 1, n)
        radius = float(rng.uniform(0.4, 2.0))
        A = rng.normal(0, 1, (n, n))
        Q = A @ A.T + 0.3 * np.eye(n)
        x = center + rng.normal(0, 3, n)
        ball = Ball(center, radius)
        got = project_weighted(ball, Q, x)
        assert np.linalg.norm(got - center) <= radius + 1e-9
        # feasibility plus first-order optimality against random directions
        base = objective(Q, x, got)
        for _ in range(200):
            d = rng.normal(0, 1, n)
            cand = got + 1e-4 * d
            if np.linalg.norm(cand - center) <= radius:
                assert objective(Q, x, cand) >= base - 1e-9


def test_variational_inequality_spot_checks():
    rng = np.random.default_rng(17)
    box = Box([-1, -1.5], [1.2, 0.8])
    A = rng.normal(0, 1, (2, 2))
    Q = A @ A.T + 0.5 * np.eye(2)
    x = np.array([2.5, -3.0])
    w_star = project_weighted(box, Q, x)
    for _ in range(500):
        w = rng.uniform([-1, -1.5], [1.2, 0.8])
        assert float((x - w_star) @ Q @ (w - w_star)) <= 1e-8


def test_non_expansive_and_idempotent():
    rng = np.random.default_rng(23)
    box = Box([-1, -2], [2, 1])
    ball = Ball([0.3, 0.1], 1.2)
    A = rng.normal(0, 1, (2, 2))
    Q = A @ A.T + 0.4 * np.eye(2)
    for cset in (box, ball):
        for _ in range(2000):
            x = rng.normal(0, 4, 2)
            y = rng.normal(0, 4, 2)
            px = project_euclidean(cset, x)
            py = project_euclidean(cset, y)
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
            assert np.allclose(project_euclidean(cset, px), px, atol=1e-12)
        for _ in range(300):
            x = rng.normal(0, 4, 2)
            y = rng.normal(0, 4, 2)
            px = project_weighted(cset, Q, x)
            py = project_weighted(cset, Q, y)
            # the weighted operator contracts its own norm
            dq = float((px - py) @ Q @ (px - py)) ** 0.5
            assert dq <= float((x - y) @ Q @ (x - y)) ** 0.5 + 1e-10
            assert np.allclose(project_weighted(cset, Q, px), px, atol=1e-9)


def test_weighted_projection_can_expand_euclidean_distance():
    # regression pin for a verified counterexample: the weighted operator is
    # non-expansive in its own norm but not in the Euclidean norm
    Q = np.array([[3.57502305, -0.20327862], [-0.20327862, 1.63945721]])
    box = Box([-1.5, -1.0], [1.0, 2.0])
    x = np.array([-4.01706132, -1.01106963])
    y = np.array([-4.4862607, 1.49915582])
    px = project_weighted(box, Q, x)
    py = project_weighted(box, Q, y)
    assert np.linalg.norm(px - py) > np.linalg.norm(x - y) + 1e-3
    dq = float((px - py) @ Q @ (px - py)) ** 0.5
    assert dq <= float((x - y) @ Q @ (x - y)) ** 0.5


def test_norm_bounds():
    assert Box([-6, -6], [6, 6]).norm_bound() == pytest.approx(np.sqrt(72))
    assert Box([-1, 2], [1, 5]).norm_bound() == pytest.approx(np.sqrt(1 + 25))
    assert Ball([3, 4], 2.0).norm_bound() == pytest.approx(7.0)


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        Box([1, 0], [0, 1])
    with pytest.raises(ValueError):
        Ball([0, 0], 0.0)
    box = Box([-1, -1], [1, 1])
    with pytest.raises(ValueError):
        project_euclidean(box, [1, 2, 3])
    with pytest.raises(ValueError):
        project_weighted(box, np.array([[1.0, 0.0], [0.5, 1.0]]), [2, 2])  # asymmetric
    with pytest.raises(ValueError):
        project_weighted(box, np.array([[1.0, 0.0], [0.0, -2.0]]), [2, 2])  # indefinite
