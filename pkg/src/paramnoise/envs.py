"""Desk-scale benchmark environments behind one stepping interface:
the Chain(N) exploration benchmark, sparse continuous-control tasks
(mountain car, cartpole swing-up), and a dense pendulum sanity task.

All dynamics are implemented natively and deterministically; the only
randomness is in the reset distribution, drawn from the caller's rng.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class Discrete:
    n: int


@dataclass(frozen=True)
class Box:
    dim: int
    low: float
    high: float

    def __post_init__(self):
        if self.low >= self.high:
            raise ValueError("Box needs low < high")


@dataclass(frozen=True)
class EnvSpec:
    name: str
    observation_dim: int
    action_space: Discrete | Box
    horizon: int
    obs_low: np.ndarray = field(default=None, repr=False)
    obs_high: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    done: bool
    info: dict


class Env:
    """Base stepping interface. Subclasses set self.spec and implement
    _reset(rng) -> state and _step(action) -> (obs, reward, done, info)."""

    spec: EnvSpec

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._t = 0
        return self._reset(rng)

    def step(self, action) -> StepResult:
        self._t += 1
        obs, reward, done, info = self._step(action)
        if self._t >= self.spec.horizon:
            if not done:
                # the episode was cut by the time limit, not by the task;
                # info lets learners bootstrap past the artificial boundary
                info = dict(info, timeout=True)
            done = True
        return StepResult(obs, reward, done, info)


# ---------------------------------------------------------------------------
# Chain(N)

def chain_step(state: int, action: int, n: int) -> tuple[int, float]:
    """One transition of the chain MDP. Action 0 moves left, 1 moves right;
    both ends self-loop. Reward is earned on every transition into (or
    self-loop at) state 1 (r = 0.001) or state N (r = 1.0)."""
    if not 1 <= state <= n:
        raise ValueError(f"state {state} outside [1, {n}]")
    if action not in (0, 1):
        raise ValueError("chain action must be 0 (left) or 1 (right)")
    nxt = min(state + 1, n) if action == 1 else max(state - 1, 1)
    reward = 1.0 if nxt == n else (0.001 if nxt == 1 else 0.0)
    return nxt, reward


def chain_optimal_return(n: int, horizon: int) -> float:
    """Maximal undiscounted episode return from the start state s_2, by exact
    finite-horizon dynamic programming."""
    if n < 2 or horizon < 1:
        raise ValueError("need n >= 2 and horizon >= 1")
    v = np.zeros(n + 1)
    for _ in range(horizon):
        v_new = np.zeros(n + 1)
        for s in range(1, n + 1):
            best = -np.inf
            for a in (0, 1):
                nxt, r = chain_step(s, a, n)
                best = max(best, r + v[nxt])
            v_new[s] = best
        v = v_new
    return float(v[2])


def chain_observation(state: int, n: int) -> np.ndarray:
    """Indicator encoding: entry x is 1 iff x+1 <= state, i.e. the first
    `state` entries are ones."""
    obs = np.zeros(n)
    obs[:state] = 1.0
    return obs


class ChainEnv(Env):
    """Chain of N states, always starting in s_2. Horizon is N + 9 steps."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("chain needs N >= 2")
        self.n = n
        self.spec = EnvSpec(
            name=f"chain-N{n}", observation_dim=n, action_space=Discrete(2),
            horizon=n + 9,
            obs_low=np.zeros(n), obs_high=np.ones(n))
        self.state = 2

    def _reset(self, rng):
        self.state = 2
        return chain_observation(self.state, self.n)

    def _step(self, action):
        self.state, reward = chain_step(self.state, int(action), self.n)
        return chain_observation(self.state, self.n), reward, False, {"state": self.state}


# ---------------------------------------------------------------------------
# Sparse mountain car (continuous action)

class SparseMountainCar(Env):
    """Continuous-action mountain car that only rewards reaching the goal
    (pos >= 0.45), and terminates there."""

    goal_position = 0.45
    power = 0.0015

    def __init__(self):
        self.spec = EnvSpec(
            name="sparse-mountaincar", observation_dim=2,
            action_space=Box(1, -1.0, 1.0), horizon=500,
            obs_low=np.array([-1.2, -0.07]), obs_high=np.array([0.6, 0.07]))
        self.pos = -0.5
        self.vel = 0.0

    def _reset(self, rng):
        self.pos = rng.uniform(-0.6, -0.4)
        self.vel = 0.0
        return np.array([self.pos, self.vel])

    def _step(self, action):
        a = float(np.asarray(action).reshape(-1)[0])
        if not np.isfinite(a):
            raise ValueError("non-finite action")
        a = float(np.clip(a, -1.0, 1.0))
        self.vel = float(np.clip(
            self.vel + self.power * a - 0.0025 * np.cos(3.0 * self.pos),
            -0.07, 0.07))
        self.pos = float(np.clip(self.pos + self.vel, -1.2, 0.6))
        if self.pos <= -1.2 and self.vel < 0.0:
            self.vel = 0.0
        reached = self.pos >= self.goal_position
        reward = 1.0 if reached else 0.0
        return (np.array([self.pos, self.vel]), reward, reached,
                {"state": (self.pos, self.vel)})


# ---------------------------------------------------------------------------
# Sparse cartpole swing-up

class SparseCartpoleSwingup(Env):
    """Cart-pole with full pole rotation; the pole starts hanging down and
    the agent is rewarded only while cos(theta) > 0.8. The episode ends if
    the cart leaves the track but not upon reward (the pole must be kept up).

    theta is measured from upright. Semi-implicit Euler integration; the
    passive system is frictionless and (numerically) energy conserving.
    """

    gravity = 9.8
    cart_mass = 1.0
    pole_mass = 0.1
    pole_half_length = 0.5
    force_scale = 10.0
    dt = 0.02
    substeps = 32   # inner integration steps per control step
    x_limit = 2.4
    reward_threshold = 0.8

    def __init__(self):
        self.spec = EnvSpec(
            name="sparse-cartpole-swingup", observation_dim=4,
            action_space=Box(1, -1.0, 1.0), horizon=500,
            obs_low=np.array([-2.5, -10.0, -np.pi, -25.0]),
            obs_high=np.array([2.5, 10.0, np.pi, 25.0]))
        self.state = np.array([0.0, 0.0, np.pi, 0.0])

    def _reset(self, rng):
        noise = rng.uniform(-0.05, 0.05, size=4)
        self.state = np.array([noise[0], noise[1], np.pi + noise[2], noise[3]])
        return self._obs()

    def accelerations(self, state, force):
        """(x_ddot, theta_ddot) for the standard cart-pole equations with a
        uniform pole pivoted at the cart."""
        _, _, th, thdot = state
        mc, mp, l, g = self.cart_mass, self.pole_mass, self.pole_half_length, self.gravity
        total = mc + mp
        sin_th, cos_th = math.sin(th), math.cos(th)
        temp = (force + mp * l * thdot * thdot * sin_th) / total
        th_acc = (g * sin_th - cos_th * temp) / (
            l * (4.0 / 3.0 - mp * cos_th * cos_th / total))
        x_acc = temp - mp * l * th_acc * cos_th / total
        return x_acc, th_acc

    def _step(self, action):
        a = float(np.asarray(action).reshape(-1)[0])
        if not np.all(np.isfinite(self.state)) or not math.isfinite(a):
            raise ValueError("non-finite state or action")
        force = self.force_scale * min(max(a, -1.0), 1.0)
        x, xdot, th, thdot = self.state
        h = self.dt / self.substeps
        for _ in range(self.substeps):
            x_acc, th_acc = self.accelerations((x, xdot, th, thdot), force)
            xdot = min(max(xdot + h * x_acc, -10.0), 10.0)
            thdot = min(max(thdot + h * th_acc, -25.0), 25.0)
            x += h * xdot
            th += h * thdot
        self.state = np.array([x, xdot, th, thdot])
        reward = 1.0 if math.cos(th) > self.reward_threshold else 0.0
        done = abs(x) > self.x_limit
        return self._obs(), reward, done, {"state": self.state.copy()}

    def _obs(self):
        x, xdot, th, thdot = self.state
        return np.array([x, xdot, wrap_angle(th), thdot])


# ---------------------------------------------------------------------------
# Dense pendulum (sanity task with a well-shaped reward)

def wrap_angle(theta: float) -> float:
    """Wrap to [-pi, pi)."""
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


class DensePendulum(Env):
    """Torque-driven pendulum with the usual quadratic cost; never ends
    before the horizon."""

    gravity = 10.0
    mass = 1.0
    length = 1.0
    dt = 0.05
    max_torque = 2.0
    max_speed = 8.0

    def __init__(self):
        self.spec = EnvSpec(
            name="dense-pendulum", observation_dim=2,
            action_space=Box(1, -2.0, 2.0), horizon=200,
            obs_low=np.array([-np.pi, -8.0]), obs_high=np.array([np.pi, 8.0]))
        self.th = np.pi
        self.thdot = 0.0

    def _reset(self, rng):
        self.th = rng.uniform(-np.pi, np.pi)
        self.thdot = rng.uniform(-1.0, 1.0)
        return np.array([wrap_angle(self.th), self.thdot])

    def _step(self, action):
        u = float(np.clip(np.asarray(action).reshape(-1)[0],
                          -self.max_torque, self.max_torque))
        if not np.isfinite(u):
            raise ValueError("non-finite action")
        g, m, l = self.gravity, self.mass, self.length
        reward = -(wrap_angle(self.th) ** 2 + 0.1 * self.thdot ** 2 + 0.001 * u ** 2)
        self.thdot = float(np.clip(
            self.thdot + (3.0 * g / (2.0 * l) * np.sin(self.th)
                          + 3.0 / (m * l ** 2) * u) * self.dt,
            -self.max_speed, self.max_speed))
        self.th += self.thdot * self.dt
        return (np.array([wrap_angle(self.th), self.thdot]), reward, False,
                {"state": (self.th, self.thdot)})


# ---------------------------------------------------------------------------

_CHAIN_RE = re.compile(r"^chain-N(\d+)$")


def make_env(name: str) -> Env:
    m = _CHAIN_RE.match(name)
    if m:
        return ChainEnv(int(m.group(1)))
    if name == "sparse-mountaincar":
        return SparseMountainCar()
    if name == "sparse-cartpole-swingup":
        return SparseCartpoleSwingup()
    if name == "dense-pendulum":
        return DensePendulum()
    raise ValueError(f"unknown environment {name!r}")
