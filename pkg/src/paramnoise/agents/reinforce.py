"""Perturbed-parameter REINFORCE: the likelihood-ratio gradient of the
Gaussian-smoothed return, estimated from episodes that were each generated
under their own fixed weight perturbation phi + sigma * eps.

The covariance of the perturbation is fixed to sigma^2 I; sigma itself is
scaled adaptively rather than learned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distance import discrete_policy_distance
from ..nn import Adam, Network, build_mlp, softmax
from ..noise import AdaptiveNoiseScaler


@dataclass
class Episode:
    """One rollout under the perturbation phi + sigma * epsilon_draw.

    returns[t] must be the discounted reward-to-go from step t; baselines
    are subtracted from them inside the estimator.
    """
    epsilon_draw: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    returns: np.ndarray
    baselines: np.ndarray


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    """R_t = sum_{t' >= t} gamma^(t'-t) r_t'."""
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.zeros_like(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def reinforce_psn_gradient(policy_net: Network, policy_mean_params: np.ndarray,
                           sigma: float, episodes: list[Episode]) -> np.ndarray:
    """Monte-Carlo gradient wrt the mean parameter vector phi:
    (1/N) sum_i sum_t grad log pi(a_t | s_t; phi + sigma eps^i) (R_t - b_t).

    policy_net must output action logits; its parameters are restored to
    phi before returning.
    """
    if not episodes:
        raise ValueError("need at least one episode")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    phi = np.asarray(policy_mean_params, dtype=np.float64)
    grad = np.zeros_like(phi)
    for ep in episodes:
        policy_net.set_flat_params(phi + sigma * np.asarray(ep.epsilon_draw))
        logits = np.atleast_2d(policy_net.forward(np.atleast_2d(ep.states)))
        probs = softmax(logits)
        advantages = np.asarray(ep.returns) - np.asarray(ep.baselines)
        grad_logits = -probs * advantages[:, None]
        grad_logits[np.arange(len(ep.actions)), np.asarray(ep.actions, dtype=int)] += \
            advantages
        policy_net.backward(grad_logits)
        grad += policy_net.flat_grads()
    policy_net.set_flat_params(phi)
    return grad / len(episodes)


@dataclass
class ReinforceConfig:
    gamma: float = 0.999
    learning_rate: float = 1e-3
    episodes_per_update: int = 10
    hidden: tuple = (16, 16)
    sigma0: float = 0.05
    alpha: float = 1.01
    delta: float = 0.05


class ReinforceAgent:
    """On-policy discrete-action agent driven by the perturbed-parameter
    gradient estimator. Acts on the perturbed softmax policy during
    exploration and on the mean-parameter argmax when greedy."""

    def __init__(self, obs_dim: int, n_actions: int, config: ReinforceConfig,
                 rngs: dict[str, np.random.Generator]):
        self.config = config
        self.n_actions = n_actions
        self.rngs = rngs
        self.net = build_mlp(obs_dim, list(config.hidden), n_actions,
                             use_layer_norm=True, rng_seed=rngs["init"])
        self.phi = self.net.get_flat_params()
        self.adam = Adam(self.phi.size, config.learning_rate)
        self.scaler = AdaptiveNoiseScaler(config.sigma0, config.delta, config.alpha)
        self.episode = 0
        self.last_distance = float("nan")
        self._eps_draw = np.zeros_like(self.phi)
        self._traj: list[tuple[np.ndarray, int, float]] = []
        self._pending: list[Episode] = []

    def begin_episode(self) -> None:
        self.episode += 1
        self._eps_draw = self.rngs["perturb"].normal(size=self.phi.size)
        self._traj = []

    def act(self, obs, mode: str = "explore") -> int:
        if mode == "greedy":
            self.net.set_flat_params(self.phi)
            return int(np.argmax(self.net.forward(obs)))
        self.net.set_flat_params(self.phi + self.scaler.sigma * self._eps_draw)
        probs = softmax(self.net.forward(obs))
        return int(self.rngs["action"].choice(self.n_actions, p=probs))

    def observe(self, state, action, reward, next_state, done) -> None:
        self._traj.append((np.asarray(state, dtype=np.float64), int(action),
                           float(reward)))
        if done:
            self._finish_episode()

    def _finish_episode(self) -> None:
        states = np.stack([s for s, _, _ in self._traj])
        actions = np.asarray([a for _, a, _ in self._traj])
        returns = discounted_returns([r for _, _, r in self._traj], self.config.gamma)
        self._pending.append(Episode(self._eps_draw.copy(), states, actions,
                                     returns, np.zeros_like(returns)))
        self._traj = []

    def train_step(self) -> float | None:
        """Updates once enough completed episodes have accumulated; the
        baseline is the per-timestep mean return across the batch."""
        if len(self._pending) < self.config.episodes_per_update:
            return None
        batch = self._pending
        self._pending = []
        max_t = max(len(ep.returns) for ep in batch)
        sums = np.zeros(max_t)
        counts = np.zeros(max_t)
        for ep in batch:
            sums[:len(ep.returns)] += ep.returns
            counts[:len(ep.returns)] += 1
        baseline = sums / np.maximum(counts, 1)
        for ep in batch:
            ep.baselines = baseline[:len(ep.returns)]
        grad = reinforce_psn_gradient(self.net, self.phi, self.scaler.sigma, batch)
        self.phi = self.adam.step(self.phi, -grad)  # ascend the return
        self.net.set_flat_params(self.phi)
        self._adapt_noise(batch)
        return float(np.linalg.norm(grad))

    def _adapt_noise(self, batch: list[Episode]) -> None:
        states = np.concatenate([ep.states for ep in batch])[:128]
        perturbed = self.net.copy()
        perturbed.set_flat_params(
            self.phi + self.scaler.sigma * self.rngs["perturb"].normal(size=self.phi.size))
        self.net.set_flat_params(self.phi)
        self.last_distance = discrete_policy_distance(self.net, perturbed, states)
        self.scaler.adapt(self.last_distance)

    @property
    def sigma(self) -> float:
        return self.scaler.sigma
