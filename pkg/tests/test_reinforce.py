"""Tests for the perturbed-parameter REINFORCE estimator and agent."""

import numpy as np
import pytest

from paramnoise.agents.reinforce import (
    Episode,
    ReinforceAgent,
    ReinforceConfig,
    discounted_returns,
    reinforce_psn_gradient,
)
from paramnoise.nn import build_mlp, softmax
from paramnoise.noise import spawn_streams


def _streams(seed=0):
    return spawn_streams(seed, ("init", "perturb", "action", "replay",
                                "mask", "env", "eval"))


# [DERIVED] hand values: rewards (1, 2, 3), gamma 0.5 ->
# R_2 = 3, R_1 = 2 + 0.5*3 = 3.5, R_0 = 1 + 0.5*3.5 = 2.75.
def test_discounted_returns_hand_values():
    out = discounted_returns([1.0, 2.0, 3.0], 0.5)
    assert np.allclose(out, [2.75, 3.5, 3.0], atol=1e-15)
    assert np.allclose(discounted_returns([5.0], 0.9), [5.0])
    # gamma = 1 reduces to suffix sums
    assert np.allclose(discounted_returns([1.0, 1.0, 1.0], 1.0), [3.0, 2.0, 1.0])


def _episode(net, eps, states, actions, returns, baselines=None):
    returns = np.asarray(returns, dtype=np.float64)
    if baselines is None:
        baselines = np.zeros_like(returns)
    return Episode(epsilon_draw=eps, states=np.asarray(states),
                   actions=np.asarray(actions), returns=returns,
                   baselines=np.asarray(baselines, dtype=np.float64))


# [TRIVIAL] zero advantage (returns equal baselines) gives a zero gradient.
def test_zero_advantage_zero_gradient():
    net = build_mlp(2, [4], 2, use_layer_norm=True, rng_seed=0)
    phi = net.get_flat_params()
    ep = _episode(net, np.zeros_like(phi), [[1.0, 0.0], [0.0, 1.0]],
                  [0, 1], [2.0, 3.0], baselines=[2.0, 3.0])
    grad = reinforce_psn_gradient(net, phi, 0.1, [ep])
    assert np.allclose(grad, 0.0, atol=1e-15)


# [DERIVED] oracle: with sigma = 0 and a single one-step episode, the
# gradient is advantage * d log pi(a|s) / d phi, where the logit gradient is
# (onehot(a) - pi); checked against central finite differences of
# advantage * log pi(a|s; phi).
def test_sigma_zero_matches_finite_differences():
    net = build_mlp(2, [4], 3, use_layer_norm=False, rng_seed=1)
    phi = net.get_flat_params().copy()
    state = np.array([[0.7, -0.3]])
    action, advantage = 2, 1.7
    ep = _episode(net, np.zeros_like(phi), state, [action], [advantage])
    grad = reinforce_psn_gradient(net, phi, 0.0, [ep])

    def log_prob(flat):
        net.set_flat_params(flat)
        return advantage * float(np.log(softmax(net.forward(state[0]))[action]))

    eps = 1e-6
    num = np.empty_like(phi)
    for i in range(phi.size):
        p = phi.copy(); p[i] += eps
        fp = log_prob(p)
        p[i] -= 2 * eps
        fm = log_prob(p)
        num[i] = (fp - fm) / (2 * eps)
    net.set_flat_params(phi)
    assert np.max(np.abs(grad - num)) < 1e-6


# [PAPER] the gradient is evaluated at the perturbed parameters phi + sigma
# * eps, not at phi: with a nonzero draw the estimate differs from sigma=0,
# and equals the sigma=0 estimate taken at the shifted parameter vector.
def test_gradient_evaluated_at_perturbed_params():
    net = build_mlp(2, [4], 2, use_layer_norm=False, rng_seed=2)
    phi = net.get_flat_params().copy()
    rng = np.random.default_rng(3)
    eps_draw = rng.normal(size=phi.size)
    sigma = 0.3
    states, actions, returns = [[0.5, 0.5]], [1], [2.0]
    ep = _episode(net, eps_draw, states, actions, returns)
    grad = reinforce_psn_gradient(net, phi, sigma, [ep])

    ep0 = _episode(net, np.zeros_like(phi), states, actions, returns)
    grad_shifted = reinforce_psn_gradient(net, phi + sigma * eps_draw, 0.0, [ep0])
    grad_at_phi = reinforce_psn_gradient(net, phi, 0.0, [ep0])
    assert np.allclose(grad, grad_shifted, atol=1e-12)
    assert not np.allclose(grad, grad_at_phi)
    # parameters restored to phi afterwards
    assert np.array_equal(net.get_flat_params(), phi)


# [TRIVIAL] averaging: the batch gradient is the mean of per-episode ones.
def test_gradient_is_mean_over_episodes():
    net = build_mlp(2, [4], 2, use_layer_norm=False, rng_seed=4)
    phi = net.get_flat_params().copy()
    rng = np.random.default_rng(5)
    eps = [rng.normal(size=phi.size) for _ in range(3)]
    eps_list = [_episode(net, e, [[1.0, 0.0]], [0], [1.0]) for e in eps]
    joint = reinforce_psn_gradient(net, phi, 0.1, eps_list)
    singles = np.mean([reinforce_psn_gradient(net, phi, 0.1, [e])
                       for e in eps_list], axis=0)
    assert np.allclose(joint, singles, atol=1e-12)


def test_estimator_validation():
    net = build_mlp(2, [4], 2, rng_seed=6)
    phi = net.get_flat_params()
    with pytest.raises(ValueError):
        reinforce_psn_gradient(net, phi, 0.1, [])
    ep = _episode(net, np.zeros_like(phi), [[1.0, 0.0]], [0], [1.0])
    with pytest.raises(ValueError):
        reinforce_psn_gradient(net, phi, -0.1, [ep])


# [TRIVIAL] agent lifecycle: train_step waits for a full batch, then
# consumes it, updates phi, and adapts sigma.
def test_agent_batching_and_update():
    cfg = ReinforceConfig(episodes_per_update=3, sigma0=0.05)
    agent = ReinforceAgent(obs_dim=2, n_actions=2, config=cfg, rngs=_streams(7))
    rng = np.random.default_rng(8)
    phi0 = agent.phi.copy()
    out = None
    for k in range(3):
        agent.begin_episode()
        for t in range(4):
            s = rng.normal(size=2)
            a = agent.act(s)
            agent.observe(s, a, float(rng.normal()), s, done=(t == 3))
        out = agent.train_step()
        if k < 2:
            assert out is None
    assert out is not None
    assert not np.array_equal(agent.phi, phi0)
    assert len(agent._pending) == 0
    assert np.isfinite(agent.last_distance)


# [TRIVIAL] greedy acting is deterministic at the mean parameters.
def test_agent_greedy_deterministic():
    cfg = ReinforceConfig(sigma0=1.0)
    agent = ReinforceAgent(obs_dim=2, n_actions=3, config=cfg, rngs=_streams(9))
    agent.begin_episode()
    obs = np.array([0.2, -0.4])
    a = agent.act(obs, mode="greedy")
    assert all(agent.act(obs, mode="greedy") == a for _ in range(5))
