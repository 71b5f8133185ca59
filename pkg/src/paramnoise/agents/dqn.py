"""DQN variants: epsilon-greedy baseline, adaptive parameter noise on the
Q-network (single head) or on a dedicated policy head, and bootstrapped
DQN with K masked heads.

Training always updates the non-perturbed parameters; the perturbed copy is
resampled only at episode boundaries and is never touched by the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..distance import discrete_policy_distance
from ..nn import Adam, DenseLayer, Network, build_mlp, softmax
from ..noise import AdaptiveNoiseScaler, epsilon_greedy_select, linear_anneal, perturb
from ..replay import ReplayBuffer, Transition

EXPLORATIONS = ("epsilon-greedy", "param-noise", "bootstrapped", "none")


@dataclass
class DQNConfig:
    gamma: float = 0.999
    learning_rate: float = 1e-3
    batch_size: int = 32
    target_update: int = 100           # train steps between hard target copies
    buffer_capacity: int = 100_000
    warmup_episodes: int = 5
    hidden: tuple = (16, 16)
    exploration: str = "epsilon-greedy"
    # epsilon-greedy schedule (annealed over episodes)
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_anneal_episodes: int = 100
    # small epsilon-greedy component kept alongside parameter noise
    residual_epsilon: float = 0.0
    # adaptive parameter noise
    sigma0: float = 0.05
    alpha: float = 1.01
    delta: float = 0.05
    adapt_interval: int = 50
    # perturb a separate softmax policy head instead of Q itself
    policy_head: bool = False
    # bootstrapped
    n_heads: int = 20
    mask_prob: float = 0.5

    def __post_init__(self):
        if self.exploration not in EXPLORATIONS:
            raise ValueError(f"unknown exploration {self.exploration!r}")


def policy_head_loss(q_values, policy_probs) -> float:
    """Cross-entropy between one-hot(argmax Q) and the policy head's output
    distribution."""
    q_values = np.asarray(q_values, dtype=np.float64)
    policy_probs = np.asarray(policy_probs, dtype=np.float64)
    if q_values.shape != policy_probs.shape:
        raise ValueError("q_values and policy_probs must have equal length")
    greedy = int(np.argmax(q_values))
    return float(-np.log(max(policy_probs[greedy], 1e-300)))


class DQNAgent:
    """Single-network DQN; with config.policy_head a shared trunk feeds a
    Q head and a softmax policy head, and only the policy head is perturbed."""

    def __init__(self, obs_dim: int, n_actions: int, config: DQNConfig,
                 rngs: dict[str, np.random.Generator]):
        self.config = config
        self.n_actions = n_actions
        self.rngs = rngs
        init = rngs["init"]

        if config.policy_head:
            h = config.hidden
            self.trunk = Network([DenseLayer(obs_dim, h[0], "relu", True, init)])
            self.q_head = Network(
                [DenseLayer(h[i], h[i + 1], "relu", True, init) for i in range(len(h) - 1)]
                + [DenseLayer(h[-1], n_actions, "linear", False, init)])
            self.pi_head = Network(
                [DenseLayer(h[i], h[i + 1], "relu", True, init) for i in range(len(h) - 1)]
                + [DenseLayer(h[-1], n_actions, "linear", False, init)])
            self.pi_tilde = self.pi_head.copy()
            self.target_trunk = self.trunk.copy()
            self.target_q_head = self.q_head.copy()
            self.adam = Adam(self.trunk.num_params() + self.q_head.num_params(),
                             config.learning_rate)
            self.adam_pi = Adam(self.pi_head.num_params(), config.learning_rate)
        else:
            self.q_net = build_mlp(obs_dim, list(config.hidden), n_actions,
                                   use_layer_norm=True, rng_seed=init)
            self.q_tilde = self.q_net.copy()
            self.target_net = self.q_net.copy()
            self.adam = Adam(self.q_net.num_params(), config.learning_rate)

        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.scaler = (AdaptiveNoiseScaler(config.sigma0, config.delta, config.alpha,
                                           config.adapt_interval)
                       if config.exploration == "param-noise" else None)
        self.epsilon = config.epsilon_start
        self.episode = 0
        self.train_steps = 0
        self.last_distance = float("nan")

    # -- policy evaluation ---------------------------------------------------

    def q_values(self, obs) -> np.ndarray:
        if self.config.policy_head:
            return self.q_head.forward(self.trunk.forward(obs))
        return self.q_net.forward(obs)

    def _explore_q_values(self, obs) -> np.ndarray:
        """Action scores of the behavioral (possibly perturbed) policy."""
        if self.config.exploration != "param-noise":
            return self.q_values(obs)
        if self.config.policy_head:
            return self.pi_tilde.forward(self.trunk.forward(obs))
        return self.q_tilde.forward(obs)

    def act(self, obs, mode: str = "explore") -> int:
        if mode == "greedy":
            return int(np.argmax(self.q_values(obs)))
        scores = self._explore_q_values(obs)
        if self.config.exploration == "epsilon-greedy":
            eps = self.epsilon
        elif self.config.exploration == "param-noise":
            eps = self.config.residual_epsilon
        else:
            eps = 0.0
        return epsilon_greedy_select(scores, eps, self.rngs["action"])

    # -- lifecycle -----------------------------------------------------------

    def begin_episode(self) -> None:
        self.episode += 1
        if self.config.exploration == "epsilon-greedy":
            self.epsilon = linear_anneal(
                self.config.epsilon_start, self.config.epsilon_end,
                self.episode - 1, self.config.epsilon_anneal_episodes)
        if self.config.exploration == "param-noise":
            self._resample_perturbation()

    def _resample_perturbation(self) -> None:
        if self.config.policy_head:
            self.pi_tilde.set_flat_params(perturb(
                self.pi_head.get_flat_params(), self.scaler.sigma, self.rngs["perturb"]))
        else:
            self.q_tilde.set_flat_params(perturb(
                self.q_net.get_flat_params(), self.scaler.sigma, self.rngs["perturb"]))

    def observe(self, state, action, reward, next_state, done) -> None:
        self.buffer.add(Transition(np.asarray(state, dtype=np.float64), int(action),
                                   float(reward), np.asarray(next_state, dtype=np.float64),
                                   bool(done)))

    # -- training ------------------------------------------------------------

    def train_step(self) -> float | None:
        cfg = self.config
        if len(self.buffer) < cfg.batch_size or self.episode <= cfg.warmup_episodes:
            return None
        states, actions, rewards, next_states, dones, _ = \
            self.buffer.sample_arrays(cfg.batch_size, self.rngs["replay"])

        if cfg.policy_head:
            next_q = self.target_q_head.forward(self.target_trunk.forward(next_states))
        else:
            next_q = self.target_net.forward(next_states)
        targets = rewards + cfg.gamma * (1.0 - dones) * next_q.max(axis=1)

        idx = np.arange(cfg.batch_size)
        if cfg.policy_head:
            h = self.trunk.forward(states)
            q_all = self.q_head.forward(h)
        else:
            q_all = self.q_net.forward(states)
        td = q_all[idx, actions] - targets
        loss = float(np.mean(td ** 2))
        grad_out = np.zeros_like(q_all)
        grad_out[idx, actions] = 2.0 * td / cfg.batch_size

        if cfg.policy_head:
            grad_h = self.q_head.backward(grad_out)
            self.trunk.backward(grad_h)
            grads = np.concatenate([self.trunk.flat_grads(), self.q_head.flat_grads()])
            params = np.concatenate([self.trunk.get_flat_params(),
                                     self.q_head.get_flat_params()])
            new = self.adam.step(params, grads)
            nt = self.trunk.num_params()
            self.trunk.set_flat_params(new[:nt])
            self.q_head.set_flat_params(new[nt:])
            self._train_policy_head(states, q_all)
        else:
            self.q_net.backward(grad_out)
            new = self.adam.step(self.q_net.get_flat_params(), self.q_net.flat_grads())
            self.q_net.set_flat_params(new)

        self.train_steps += 1
        if self.train_steps % cfg.target_update == 0:
            self._sync_target()
        if self.scaler is not None and self.train_steps % cfg.adapt_interval == 0:
            self._adapt_noise()
        return loss

    def _train_policy_head(self, states, q_all) -> None:
        """Cross-entropy toward the greedy Q action; gradients stay in the
        policy head (the trunk is not updated by this loss)."""
        h = self.trunk.forward(states)
        logits = self.pi_head.forward(h)
        probs = softmax(logits)
        onehot = np.zeros_like(probs)
        onehot[np.arange(len(q_all)), np.argmax(q_all, axis=1)] = 1.0
        self.pi_head.backward((probs - onehot) / len(q_all))
        new = self.adam_pi.step(self.pi_head.get_flat_params(),
                                self.pi_head.flat_grads())
        self.pi_head.set_flat_params(new)

    def _sync_target(self) -> None:
        if self.config.policy_head:
            self.target_trunk.set_flat_params(self.trunk.get_flat_params())
            self.target_q_head.set_flat_params(self.q_head.get_flat_params())
        else:
            self.target_net.set_flat_params(self.q_net.get_flat_params())

    def _adapt_noise(self) -> None:
        """Measure the action-space distance against a fresh perturbation at
        the current sigma (not the episode's perturbation, which both predates
        any training since the episode began and was drawn at an older
        sigma)."""
        batch = min(self.config.batch_size, len(self.buffer))
        states = self.buffer.state_batch(batch, self.rngs["replay"])
        if self.config.policy_head:
            probe = self.pi_head.copy()
            probe.set_flat_params(perturb(
                self.pi_head.get_flat_params(), self.scaler.sigma,
                self.rngs["perturb"]))
            h = self.trunk.forward(states)
            d = discrete_policy_distance(
                lambda _s: self.pi_head.forward(h),
                lambda _s: probe.forward(h), states)
        else:
            probe = self.q_net.copy()
            probe.set_flat_params(perturb(
                self.q_net.get_flat_params(), self.scaler.sigma,
                self.rngs["perturb"]))
            d = discrete_policy_distance(self.q_net, probe, states)
        self.last_distance = d
        self.scaler.adapt(d)

    @property
    def sigma(self) -> float:
        return self.scaler.sigma if self.scaler is not None else 0.0


class MultiHeadQNet:
    """K Q-value heads (one hidden layer with layer norm plus a linear
    output each) on a shared first-layer trunk. Head weights are stacked
    into (K, ...) tensors so all heads evaluate in a couple of einsums."""

    def __init__(self, obs_dim: int, n_actions: int, n_heads: int, hidden,
                 rng: np.random.Generator):
        h0, h1 = hidden
        self.trunk = DenseLayer(obs_dim, h0, "relu", True, rng)
        lim1, lim2 = 1.0 / np.sqrt(h0), 1.0 / np.sqrt(h1)
        self.W1 = rng.uniform(-lim1, lim1, (n_heads, h0, h1))
        self.b1 = np.zeros((n_heads, h1))
        self.gain1 = np.ones((n_heads, h1))
        self.beta1 = np.zeros((n_heads, h1))
        self.W2 = rng.uniform(-lim2, lim2, (n_heads, h1, n_actions))
        self.b2 = np.zeros((n_heads, n_actions))
        self.n_heads = n_heads
        self._cache = None

    def forward_all(self, x) -> np.ndarray:
        """(B, obs) -> per-head Q-values (K, B, A)."""
        hid = self.trunk.forward(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        z1 = np.einsum("bi,kij->kbj", hid, self.W1) + self.b1[:, None, :]
        n = z1.shape[-1]
        mean = z1.sum(axis=-1, keepdims=True) / n
        centered = z1 - mean
        var = (centered * centered).sum(axis=-1, keepdims=True) / n
        inv_std = 1.0 / np.sqrt(var + 1e-5)
        z_hat = centered * inv_std
        h1 = self.gain1[:, None, :] * z_hat + self.beta1[:, None, :]
        a1 = np.maximum(h1, 0.0)
        q = np.einsum("kbj,kja->kba", a1, self.W2) + self.b2[:, None, :]
        self._cache = (hid, z_hat, inv_std, h1, a1)
        return q

    def forward_head(self, x, k: int) -> np.ndarray:
        """(obs,) -> Q-values of head k, for cheap per-step acting."""
        hid = self.trunk.forward(np.asarray(x, dtype=np.float64))
        z1 = hid @ self.W1[k] + self.b1[k]
        n = z1.shape[-1]
        centered = z1 - z1.sum() / n
        z_hat = centered / np.sqrt((centered * centered).sum() / n + 1e-5)
        a1 = np.maximum(self.gain1[k] * z_hat + self.beta1[k], 0.0)
        return a1 @ self.W2[k] + self.b2[k]

    def backward_all(self, grad_q: np.ndarray) -> None:
        """Backprop per-head output grads (K, B, A); parameter grads are
        stored on self, trunk grads summed over heads."""
        hid, z_hat, inv_std, h1, a1 = self._cache
        self.grad_W2 = np.einsum("kbj,kba->kja", a1, grad_q)
        self.grad_b2 = grad_q.sum(axis=1)
        g_a1 = np.einsum("kba,kja->kbj", grad_q, self.W2)
        g_h1 = g_a1 * (h1 > 0.0)
        self.grad_gain1 = (g_h1 * z_hat).sum(axis=1)
        self.grad_beta1 = g_h1.sum(axis=1)
        d_hat = g_h1 * self.gain1[:, None, :]
        n = z_hat.shape[-1]
        g_z1 = (inv_std / n) * (
            n * d_hat
            - d_hat.sum(axis=-1, keepdims=True)
            - z_hat * (d_hat * z_hat).sum(axis=-1, keepdims=True))
        self.grad_W1 = np.einsum("bi,kbj->kij", hid, g_z1)
        self.grad_b1 = g_z1.sum(axis=1)
        grad_hid = np.einsum("kbj,kij->bi", g_z1, self.W1)
        self.trunk.backward(grad_hid)

    _HEAD_TENSORS = ("W1", "b1", "gain1", "beta1", "W2", "b2")

    def get_flat_params(self) -> np.ndarray:
        parts = [t.ravel() for _, t in self.trunk.param_tensors()]
        parts += [getattr(self, name).ravel() for name in self._HEAD_TENSORS]
        return np.concatenate(parts)

    def set_flat_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        offset = 0
        for name, t in self.trunk.param_tensors():
            setattr(self.trunk, name, flat[offset:offset + t.size].reshape(t.shape).copy())
            offset += t.size
        for name in self._HEAD_TENSORS:
            t = getattr(self, name)
            setattr(self, name, flat[offset:offset + t.size].reshape(t.shape).copy())
            offset += t.size
        if offset != flat.size:
            raise ValueError("flat vector length mismatch")

    def flat_grads(self) -> np.ndarray:
        parts = [g.ravel() for g in self.trunk.grad_tensors()]
        parts += [getattr(self, f"grad_{name}").ravel() for name in self._HEAD_TENSORS]
        return np.concatenate(parts)

    def num_params(self) -> int:
        return self.get_flat_params().size


class BootstrappedDQNAgent:
    """K Q-value heads on a shared first-layer trunk; one head drives each
    episode, Bernoulli masks gate training, and evaluation votes across
    heads."""

    def __init__(self, obs_dim: int, n_actions: int, config: DQNConfig,
                 rngs: dict[str, np.random.Generator]):
        self.config = config
        self.n_actions = n_actions
        self.rngs = rngs
        self.net = MultiHeadQNet(obs_dim, n_actions, config.n_heads,
                                 config.hidden, rngs["init"])
        self.target = MultiHeadQNet(obs_dim, n_actions, config.n_heads,
                                    config.hidden, np.random.default_rng(0))
        self.target.set_flat_params(self.net.get_flat_params())
        self.adam = Adam(self.net.num_params(), config.learning_rate)
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.active_head = 0
        self.episode = 0
        self.train_steps = 0
        self.last_distance = float("nan")
        self.sigma = 0.0

    def act(self, obs, mode: str = "explore") -> int:
        if mode == "explore":
            return int(np.argmax(self.net.forward_head(obs, self.active_head)))
        # vote: majority over per-head greedy actions, lowest index on ties
        greedy = np.argmax(self.net.forward_all(obs)[:, 0, :], axis=-1)
        return int(np.bincount(greedy, minlength=self.n_actions).argmax())

    def begin_episode(self) -> None:
        self.episode += 1
        self.active_head = int(self.rngs["perturb"].integers(self.config.n_heads))

    def observe(self, state, action, reward, next_state, done) -> None:
        mask = self.rngs["mask"].random(self.config.n_heads) < self.config.mask_prob
        self.buffer.add(Transition(np.asarray(state, dtype=np.float64), int(action),
                                   float(reward), np.asarray(next_state, dtype=np.float64),
                                   bool(done), head_mask=mask))

    def train_step(self) -> float | None:
        cfg = self.config
        if len(self.buffer) < cfg.batch_size or self.episode <= cfg.warmup_episodes:
            return None
        states, actions, rewards, next_states, dones, masks = \
            self.buffer.sample_arrays(cfg.batch_size, self.rngs["replay"])
        k, b = cfg.n_heads, cfg.batch_size

        next_q = self.target.forward_all(next_states).max(axis=-1)      # (K, B)
        targets = rewards[None, :] + cfg.gamma * (1.0 - dones[None, :]) * next_q
        q = self.net.forward_all(states)                                 # (K, B, A)
        rows = np.arange(b)
        td = q[:, rows, actions] - targets
        head_mask = masks.T.astype(np.float64)                           # (K, B)
        counts = np.maximum(head_mask.sum(axis=1, keepdims=True), 1.0)
        grad_q = np.zeros_like(q)
        # masked per-head MSE; 1/K keeps the shared trunk's effective step
        # independent of the head count
        grad_q[:, rows, actions] = 2.0 * td * head_mask / (counts * k)
        self.net.backward_all(grad_q)
        new = self.adam.step(self.net.get_flat_params(), self.net.flat_grads())
        self.net.set_flat_params(new)

        self.train_steps += 1
        if self.train_steps % cfg.target_update == 0:
            self.target.set_flat_params(self.net.get_flat_params())
        loss = float(np.mean((td ** 2 * head_mask).sum(axis=1) / counts[:, 0]))
        return loss
