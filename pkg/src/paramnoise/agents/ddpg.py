"""DDPG with pluggable exploration noise: none, uncorrelated Gaussian,
Ornstein-Uhlenbeck, or adaptive parameter noise on the actor.

Observations pass through an online mean/variance normalizer. The critic
joins the action at its second hidden layer and carries an L2 penalty on
its weight matrices. Only the actor is ever perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distance import continuous_policy_distance
from ..nn import (Adam, DenseLayer, build_mlp, flat_grads_of, link_flat_params,
                  param_slices_of)
from ..noise import AdaptiveNoiseScaler, OUProcess, gaussian_action_noise, perturb
from ..replay import OnlineNormalizer, ReplayBuffer, Transition

NOISE_KINDS = ("none", "gaussian", "ou", "param")


@dataclass
class DDPGConfig:
    gamma: float = 0.99
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    tau: float = 0.001
    batch_size: int = 128
    buffer_capacity: int = 100_000
    critic_l2: float = 1e-2
    hidden: tuple = (64, 64)
    noise: str = "gaussian"
    sigma: float = 0.2        # action-noise scale; also delta for param noise
    sigma0: float = 0.1       # initial parameter-noise scale
    alpha: float = 1.01
    adapt_interval: int = 1
    warmup_steps: int = 0     # uniform random actions before the policy runs

    def __post_init__(self):
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}")


class Critic:
    """Q(s, a) network; the action enters at the second hidden layer."""

    def __init__(self, obs_dim: int, act_dim: int, hidden, rng):
        h0, h1 = hidden
        self.l1 = DenseLayer(obs_dim, h0, "relu", True, rng)
        self.l2 = DenseLayer(h0 + act_dim, h1, "relu", True, rng)
        self.l3 = DenseLayer(h1, 1, "linear", False, rng)
        self.layers = [self.l1, self.l2, self.l3]
        self._h0 = h0
        self._flat = link_flat_params(self.layers)

    def forward(self, states, actions) -> np.ndarray:
        h1 = self.l1.forward(np.asarray(states, dtype=np.float64))
        z = np.concatenate([h1, np.atleast_2d(np.asarray(actions, dtype=np.float64))],
                           axis=-1)
        return self.l3.forward(self.l2.forward(z))[..., 0]

    def backward(self, grad_q) -> tuple[np.ndarray, np.ndarray]:
        """Returns (grad wrt states, grad wrt actions); parameter gradients
        are left on the layers."""
        g = self.l3.backward(np.asarray(grad_q)[..., None])
        g = self.l2.backward(g)
        grad_states = self.l1.backward(g[..., :self._h0])
        return grad_states, g[..., self._h0:]

    def num_params(self) -> int:
        return self._flat.size

    def get_flat_params(self) -> np.ndarray:
        return self._flat.copy()

    def set_flat_params(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self._flat.size:
            raise ValueError(
                f"flat vector has {flat.size} entries, layers have {self._flat.size}")
        self._flat[:] = flat

    def flat_grads(self) -> np.ndarray:
        return flat_grads_of(self.layers)

    def weight_mask(self) -> np.ndarray:
        """True on dense weight-matrix entries (the L2 penalty skips biases
        and layer-norm parameters)."""
        mask = np.zeros(self.num_params(), dtype=bool)
        for _, name, sl in param_slices_of(self.layers):
            if name == "W":
                mask[sl] = True
        return mask

    def copy(self) -> "Critic":
        clone = Critic(self.l1.in_dim, self.l2.in_dim - self._h0,
                       (self._h0, self.l2.out_dim), np.random.default_rng(0))
        clone.set_flat_params(self.get_flat_params())
        return clone


class DDPGAgent:

    def __init__(self, obs_dim: int, act_dim: int, action_bound: float,
                 config: DDPGConfig, rngs: dict[str, np.random.Generator]):
        self.config = config
        self.action_bound = float(action_bound)
        self.rngs = rngs
        init = rngs["init"]

        self.actor = build_mlp(obs_dim, list(config.hidden), act_dim,
                               output_activation="tanh", use_layer_norm=True,
                               rng_seed=init)
        self.critic = Critic(obs_dim, act_dim, config.hidden, init)
        # small uniform init of the output layers: the critic starts near
        # zero (no phantom value before any reward is seen) and the policy
        # starts near the action-space origin
        for layer in (self.actor.layers[-1], self.critic.l3):
            layer.W[:] = init.uniform(-3e-3, 3e-3, size=layer.W.shape)
        self.actor_tilde = self.actor.copy()
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self._l2_mask = self.critic.weight_mask()

        self.adam_actor = Adam(self.actor.num_params(), config.actor_lr)
        self.adam_critic = Adam(self.critic.num_params(), config.critic_lr)
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.normalizer = OnlineNormalizer(obs_dim)
        self.ou = OUProcess(act_dim, config.sigma) if config.noise == "ou" else None
        self.scaler = (AdaptiveNoiseScaler(config.sigma0, delta=config.sigma,
                                           alpha=config.alpha,
                                           adapt_interval=config.adapt_interval)
                       if config.noise == "param" else None)
        # probe network for distance measurement: perturbed fresh at the
        # current sigma each adaptation, so the measured distance tracks the
        # present noise scale rather than the episode's (possibly stale)
        # perturbation
        self._probe = self.actor.copy() if config.noise == "param" else None
        self.episode = 0
        self.train_steps = 0
        self.env_steps = 0
        self.last_distance = float("nan")

    # -- acting ---------------------------------------------------------------

    def _policy(self, net, obs_norm) -> np.ndarray:
        return self.action_bound * net.forward(obs_norm)

    def act(self, obs, mode: str = "explore") -> np.ndarray:
        cfg = self.config
        x = self.normalizer.normalize(obs)
        if mode == "greedy":
            return self._policy(self.actor, x)
        if cfg.noise == "param":
            return self._policy(self.actor_tilde, x)
        if self.env_steps < cfg.warmup_steps:
            return self.rngs["action"].uniform(-self.action_bound, self.action_bound,
                                               size=self.actor.output_dim)
        a = self._policy(self.actor, x)
        if cfg.noise == "gaussian":
            return gaussian_action_noise(a, cfg.sigma, self.rngs["action"],
                                         -self.action_bound, self.action_bound)
        if cfg.noise == "ou":
            return np.clip(a + self.ou.step(self.rngs["action"]),
                           -self.action_bound, self.action_bound)
        return a

    def begin_episode(self) -> None:
        self.episode += 1
        if self.scaler is not None:
            self.actor_tilde.set_flat_params(perturb(
                self.actor.get_flat_params(), self.scaler.sigma, self.rngs["perturb"]))
        if self.ou is not None:
            self.ou.reset()

    def observe(self, state, action, reward, next_state, done) -> None:
        state = np.asarray(state, dtype=np.float64)
        self.normalizer.update(state)
        self.buffer.add(Transition(state, np.asarray(action, dtype=np.float64),
                                   float(reward),
                                   np.asarray(next_state, dtype=np.float64), bool(done)))
        self.env_steps += 1

    # -- training ---------------------------------------------------------------

    def train_step(self) -> tuple[float, float] | None:
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            return None
        states, actions, rewards, next_states, dones, _ = \
            self.buffer.sample_arrays(cfg.batch_size, self.rngs["replay"])
        s = self.normalizer.normalize(states)
        s_next = self.normalizer.normalize(next_states)

        # critic: squared TD error against soft targets, plus L2 on weights
        a_next = self._policy(self.actor_target, s_next)
        q_next = self.critic_target.forward(s_next, a_next)
        y = rewards + cfg.gamma * (1.0 - dones) * q_next
        q = self.critic.forward(s, actions)
        td = q - y
        critic_loss = float(np.mean(td ** 2))
        self.critic.backward(2.0 * td / cfg.batch_size)
        c_params = self.critic.get_flat_params()
        c_grads = self.critic.flat_grads() + cfg.critic_l2 * self._l2_mask * c_params
        self.critic.set_flat_params(self.adam_critic.step(c_params, c_grads))

        # actor: ascend the critic's value of its own actions
        a_pi = self._policy(self.actor, s)
        q_pi = self.critic.forward(s, a_pi)
        actor_objective = float(np.mean(q_pi))
        _, grad_a = self.critic.backward(np.full(cfg.batch_size, 1.0 / cfg.batch_size))
        self.actor.backward(-grad_a * self.action_bound)

        self.train_steps += 1
        if self.scaler is not None and self.train_steps % cfg.adapt_interval == 0:
            # measured before the actor update so the a_pi forward pass can
            # be reused as the non-perturbed policy's actions
            self._probe.set_flat_params(perturb(
                self.actor.get_flat_params(), self.scaler.sigma,
                self.rngs["perturb"]))
            self.last_distance = continuous_policy_distance(
                lambda b: a_pi, lambda b: self._policy(self._probe, b), s)
            self.scaler.adapt(self.last_distance)

        self.actor.set_flat_params(self.adam_actor.step(
            self.actor.get_flat_params(), self.actor.flat_grads()))
        self._soft_update(self.actor_target, self.actor)
        self._soft_update(self.critic_target, self.critic)
        return critic_loss, actor_objective

    def _soft_update(self, target, online) -> None:
        tau = self.config.tau
        target._flat *= 1.0 - tau
        target._flat += tau * online._flat

    @property
    def sigma(self) -> float:
        if self.scaler is not None:
            return self.scaler.sigma
        return self.config.sigma if self.config.noise in ("gaussian", "ou") else 0.0
