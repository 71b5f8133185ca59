"""Noise processes: spherical Gaussian weight perturbation, the geometric
adaptive scaler, epsilon-greedy selection with linear annealing, additive
Gaussian action noise, and the Ornstein-Uhlenbeck process."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def perturb(theta: np.ndarray, sigma: float, rng: np.random.Generator,
            mask: np.ndarray | None = None) -> np.ndarray:
    """Return theta + N(0, sigma^2 I) on the masked entries; theta itself is
    never mutated."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    theta = np.asarray(theta, dtype=np.float64)
    out = theta.copy()
    if sigma == 0.0:
        return out
    if mask is None:
        out += rng.normal(0.0, sigma, size=theta.shape)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != theta.shape:
            raise ValueError("mask length does not match parameter vector")
        out[mask] += rng.normal(0.0, sigma, size=int(mask.sum()))
    return out


def adapt_sigma(sigma: float, alpha: float, delta: float, distance: float) -> float:
    """One geometric update: grow by alpha while the measured policy distance
    is at or below the threshold, shrink by 1/alpha otherwise."""
    if distance < 0:
        raise ValueError("measured distance must be >= 0")
    return sigma * alpha if distance <= delta else sigma / alpha


@dataclass
class AdaptiveNoiseScaler:
    """Stateful wrapper around adapt_sigma with the adaptation cadence."""

    sigma: float
    delta: float
    alpha: float = 1.01
    adapt_interval: int = 50

    def __post_init__(self):
        if self.sigma <= 0 or self.delta <= 0 or self.alpha <= 1:
            raise ValueError("need sigma > 0, delta > 0, alpha > 1")
        if self.adapt_interval < 1:
            raise ValueError("adapt_interval must be >= 1")

    def adapt(self, distance: float) -> float:
        self.sigma = adapt_sigma(self.sigma, self.alpha, self.delta, distance)
        return self.sigma


def epsilon_greedy_select(q_values, epsilon: float, rng: np.random.Generator) -> int:
    """Argmax with probability 1 - epsilon (lowest index on ties), uniform
    random action otherwise."""
    q_values = np.asarray(q_values, dtype=np.float64)
    if q_values.size == 0:
        raise ValueError("q_values must be nonempty")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q_values.size))
    return int(np.argmax(q_values))


def linear_anneal(start: float, end: float, t: int, horizon: int) -> float:
    if horizon < 1 or t < 0:
        raise ValueError("need horizon >= 1 and t >= 0")
    return start + (end - start) * min(t / horizon, 1.0)


def gaussian_action_noise(action, sigma: float, rng: np.random.Generator,
                          low=-np.inf, high=np.inf) -> np.ndarray:
    """Additive per-dimension N(0, sigma^2), clipped to action bounds after
    the noise is added."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    action = np.asarray(action, dtype=np.float64)
    noisy = action + rng.normal(0.0, sigma, size=action.shape) if sigma > 0 else action
    return np.clip(noisy, low, high)


@dataclass
class OUProcess:
    """Discrete Ornstein-Uhlenbeck process:
    x <- x + theta (mu - x) dt + sigma sqrt(dt) N(0, I)."""

    dim: int
    sigma: float
    theta: float = 0.15
    dt: float = 1.0
    mu: np.ndarray | None = None
    value: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.theta <= 0 or self.sigma < 0 or self.dt <= 0:
            raise ValueError("need theta > 0, sigma >= 0, dt > 0")
        if self.mu is None:
            self.mu = np.zeros(self.dim)
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.reset()

    def reset(self) -> None:
        self.value = self.mu.copy()

    def step(self, rng: np.random.Generator) -> np.ndarray:
        self.value = (self.value
                      + self.theta * (self.mu - self.value) * self.dt
                      + self.sigma * np.sqrt(self.dt) * rng.normal(size=self.dim))
        return self.value.copy()


def spawn_streams(seed: int, names: tuple[str, ...]) -> dict[str, np.random.Generator]:
    """Independent named RNG streams for one run, so toggling one noise
    source does not shift the draws of the others."""
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}
