"""Tests for perturbation sampling, the geometric adaptive scaler, and the
action-space noise baselines."""

import numpy as np
import pytest

from paramnoise.noise import (
    AdaptiveNoiseScaler,
    OUProcess,
    adapt_sigma,
    epsilon_greedy_select,
    gaussian_action_noise,
    linear_anneal,
    perturb,
    spawn_streams,
)


# [DERIVED] Monte-Carlo oracle: perturbation offsets are N(0, sigma^2) i.i.d.
def test_perturb_statistics():
    rng = np.random.default_rng(0)
    theta = np.linspace(-1, 1, 2000)
    sigma = 0.3
    draws = np.stack([perturb(theta, sigma, rng) - theta for _ in range(200)])
    flat = draws.ravel()  # 400k samples
    se_mean = sigma / np.sqrt(flat.size)
    assert abs(flat.mean()) < 4 * se_mean
    assert abs(flat.std() - sigma) < 0.01 * sigma
    # independence across resamples: distinct draws differ
    assert not np.allclose(draws[0], draws[1])


# [TRIVIAL] the base vector is never mutated and sigma=0 is the identity.
def test_perturb_pure_and_zero_sigma():
    rng = np.random.default_rng(1)
    theta = np.ones(10)
    out = perturb(theta, 0.5, rng)
    assert np.array_equal(theta, np.ones(10))
    assert out is not theta
    assert np.array_equal(perturb(theta, 0.0, rng), theta)


# [TRIVIAL] mask restricts noise to the selected coordinates.
def test_perturb_mask():
    rng = np.random.default_rng(2)
    theta = np.zeros(8)
    mask = np.array([True, False] * 4)
    out = perturb(theta, 1.0, rng, mask=mask)
    assert np.all(out[~mask] == 0.0)
    assert np.all(out[mask] != 0.0)


# [PAPER] geometric update: increase when d <= delta, decrease otherwise,
# including the worked values 0.1*1.01 = 0.101 and 0.1/1.01 = 0.0990099...
def test_adapt_sigma_directions():
    assert adapt_sigma(0.1, 1.01, 0.05, 0.03) == pytest.approx(0.101, abs=1e-15)
    assert adapt_sigma(0.1, 1.01, 0.05, 0.2) == pytest.approx(0.1 / 1.01,
                                                              abs=1e-15)
    # tie goes to increase
    assert adapt_sigma(0.1, 1.01, 0.05, 0.05) == pytest.approx(0.101,
                                                               abs=1e-15)


def test_adapt_sigma_rejects_negative_distance():
    with pytest.raises(ValueError):
        adapt_sigma(0.1, 1.01, 0.05, -1e-3)


# [DERIVED] convergence property: when distance is a deterministic increasing
# function of sigma, iterating the rule drives sigma into a band around the
# fixed point sigma* where d(sigma*) = delta.
def test_adapt_sigma_converges_to_fixed_point():
    alpha, delta = 1.01, 0.05
    distance = lambda s: 0.5 * s  # fixed point sigma* = 0.1
    sigma_star = 0.1
    for sigma0 in (1e-3, 5.0):
        sigma = sigma0
        for _ in range(2000):
            sigma = adapt_sigma(sigma, alpha, delta, distance(sigma))
        # once near, sigma oscillates within one multiplicative step
        assert sigma_star / alpha <= sigma <= sigma_star * alpha


# [TRIVIAL] scaler applies one geometric update per adapt() call and
# validates its configuration.
def test_adaptive_scaler():
    scaler = AdaptiveNoiseScaler(sigma=0.1, delta=0.05, alpha=1.01,
                                 adapt_interval=3)
    assert scaler.adapt(0.01) == pytest.approx(0.101)
    assert scaler.adapt(0.2) == pytest.approx(0.1)
    assert scaler.adapt_interval == 3
    with pytest.raises(ValueError):
        AdaptiveNoiseScaler(sigma=0.1, delta=0.05, alpha=0.99)
    with pytest.raises(ValueError):
        AdaptiveNoiseScaler(sigma=-0.1, delta=0.05)


# [DERIVED] Monte-Carlo oracle: greedy action picked with 1 - eps + eps/n.
def test_epsilon_greedy_frequencies():
    rng = np.random.default_rng(3)
    q = np.array([0.0, 1.0, 0.5])
    eps = 0.4
    n_trials = 40000
    picks = np.array([epsilon_greedy_select(q, eps, rng)
                      for _ in range(n_trials)])
    p_greedy = 1 - eps + eps / 3
    freq = np.mean(picks == 1)
    se = np.sqrt(p_greedy * (1 - p_greedy) / n_trials)
    assert abs(freq - p_greedy) < 4 * se
    # non-greedy arms appear with eps/n each
    freq0 = np.mean(picks == 0)
    se0 = np.sqrt((eps / 3) * (1 - eps / 3) / n_trials)
    assert abs(freq0 - eps / 3) < 4 * se0


def test_epsilon_greedy_extremes():
    rng = np.random.default_rng(4)
    q = np.array([0.0, 2.0])
    assert all(epsilon_greedy_select(q, 0.0, rng) == 1 for _ in range(20))
    picks = {epsilon_greedy_select(q, 1.0, rng) for _ in range(200)}
    assert picks == {0, 1}


# [TRIVIAL] linear schedule endpoints and clamping.
def test_linear_anneal():
    assert linear_anneal(1.0, 0.1, 0, 100) == 1.0
    assert linear_anneal(1.0, 0.1, 50, 100) == pytest.approx(0.55)
    assert linear_anneal(1.0, 0.1, 100, 100) == pytest.approx(0.1)
    assert linear_anneal(1.0, 0.1, 500, 100) == pytest.approx(0.1)


# [TRIVIAL] Gaussian action noise clips to bounds after adding noise.
def test_gaussian_action_noise_clips():
    rng = np.random.default_rng(5)
    a = np.array([0.99])
    outs = np.array([gaussian_action_noise(a, 1.0, rng, -1.0, 1.0)
                     for _ in range(200)])
    assert np.all(outs <= 1.0) and np.all(outs >= -1.0)
    assert np.any(outs == 1.0)  # clipping actually engaged
    assert np.array_equal(gaussian_action_noise(a, 0.0, rng, -1.0, 1.0), a)


# [DERIVED] OU stationary std oracle: for x += theta*(mu-x)*dt + sigma*
# sqrt(dt)*N(0,1), the exact discrete-time stationary std is
# sigma*sqrt(dt / (2*theta - theta^2*dt)).
def test_ou_stationary_statistics():
    rng = np.random.default_rng(6)
    ou = OUProcess(dim=1, sigma=0.2, theta=0.15, dt=1.0)
    ou.reset()
    burn = 2000
    n = 200000
    xs = np.empty(n)
    for _ in range(burn):
        ou.step(rng)
    for i in range(n):
        xs[i] = ou.step(rng)[0]
    expected_std = 0.2 * np.sqrt(1.0 / (2 * 0.15 - 0.15 ** 2))
    assert abs(xs.mean()) < 0.02
    assert abs(xs.std() - expected_std) < 0.02 * expected_std


# [TRIVIAL] reset returns the state to mu.
def test_ou_reset():
    rng = np.random.default_rng(7)
    ou = OUProcess(dim=3, sigma=0.2)
    ou.reset()
    ou.step(rng)
    ou.reset()
    assert np.array_equal(ou.value, np.zeros(3))


# [TRIVIAL] named streams are deterministic per seed and mutually distinct.
def test_spawn_streams():
    a = spawn_streams(42, ["init", "env"])
    b = spawn_streams(42, ["init", "env"])
    assert a["init"].normal() == b["init"].normal()
    c = spawn_streams(42, ["init", "env"])
    assert c["init"].normal() != c["env"].normal()
