"""Seeded training runs with the evaluation and solved protocols.

Chain-style runs evaluate after every training episode with all noise
disabled and count consecutive optimal evaluations (solved at 100,
abort at the episode cap). Continuous runs evaluate on a step cadence
with a batch of noise-free episodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..agents import BootstrappedDQNAgent, DDPGAgent, DQNAgent, ReinforceAgent
from ..envs import Box, Discrete, chain_optimal_return, make_env
from ..noise import spawn_streams
from .config import ExperimentConfig

SOLVED_STREAK = 100

_STREAMS = ("init", "perturb", "action", "replay", "mask", "env", "eval")


@dataclass
class RunRow:
    episode: int
    steps: int
    train_return: float
    eval_return: float
    sigma: float
    distance: float
    solved_streak: int


@dataclass
class RunResult:
    seed: int
    rows: list[RunRow] = field(default_factory=list)
    solved_at: int | None = None
    status: str = "unsolved"    # solved | unsolved | failed

    @property
    def episodes_to_solve(self) -> int | None:
        return self.solved_at


def build_agent(config: ExperimentConfig, env, seed: int):
    rngs = spawn_streams(seed, _STREAMS)
    agent_cfg = config.agent_config()
    space = env.spec.action_space
    if config.family == "dqn":
        assert isinstance(space, Discrete)
        cls = (BootstrappedDQNAgent if agent_cfg.exploration == "bootstrapped"
               else DQNAgent)
        return cls(env.spec.observation_dim, space.n, agent_cfg, rngs)
    if config.family == "ddpg":
        assert isinstance(space, Box)
        return DDPGAgent(env.spec.observation_dim, space.dim, space.high,
                         agent_cfg, rngs)
    assert isinstance(space, Discrete)
    return ReinforceAgent(env.spec.observation_dim, space.n, agent_cfg, rngs)


def evaluate_policy(agent, env, n_episodes: int, rng: np.random.Generator) -> float:
    """Mean undiscounted return of noise-free greedy rollouts."""
    if n_episodes < 1:
        raise ValueError("need n_episodes >= 1")
    total = 0.0
    for _ in range(n_episodes):
        obs = env.reset(rng)
        done = False
        while not done:
            obs, reward, done, _ = env.step(agent.act(obs, mode="greedy"))
            total += reward
    return total / n_episodes


def solved_check(history, optimal: float, tol: float) -> tuple[bool, int]:
    """Trailing count of consecutive evaluation returns within tol of the
    optimum; solved once the streak reaches 100."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    streak = 0
    for value in reversed(list(history)):
        if value >= optimal - tol:
            streak += 1
        else:
            break
    return streak >= SOLVED_STREAK, streak


def run_single(config: ExperimentConfig, seed: int) -> RunResult:
    return run_single_with_agent(config, seed)[0]


def run_single_with_agent(config: ExperimentConfig, seed: int):
    """Like run_single but also returns the trained agent (for
    checkpointing)."""
    env = make_env(config.env)
    eval_env = make_env(config.env)
    agent = build_agent(config, env, seed)
    rngs = spawn_streams(seed, _STREAMS)
    chain_protocol = isinstance(env.spec.action_space, Discrete)
    optimal = (chain_optimal_return(env.n, env.spec.horizon)
               if config.env.startswith("chain-") else math.inf)

    result = RunResult(seed=seed)
    eval_history: list[float] = []
    last_eval = math.nan
    total_steps = 0
    next_eval_at = config.eval_every_steps

    try:
        for episode in range(1, config.max_episodes + 1):
            agent.begin_episode()
            obs = env.reset(rngs["env"])
            ep_return = 0.0
            done = False
            while not done:
                action = agent.act(obs, mode="explore")
                next_obs, reward, done, info = env.step(action)
                # The chain task is a finite-horizon MDP, so hitting the
                # horizon is a true terminal. The continuous tasks are
                # time-limited views of stationary dynamics: a timeout says
                # nothing about the state's value, so the stored transition
                # keeps bootstrapping across the cut.
                store_done = done if chain_protocol else (
                    done and not info.get("timeout", False))
                agent.observe(obs, action, reward, next_obs, store_done)
                loss = agent.train_step()
                if loss is not None and not np.all(np.isfinite(loss)):
                    raise FloatingPointError("non-finite training loss")
                obs = next_obs
                ep_return += reward
                total_steps += 1
                if not chain_protocol and total_steps >= next_eval_at:
                    last_eval = evaluate_policy(agent, eval_env,
                                                config.eval_episodes, rngs["eval"])
                    next_eval_at += config.eval_every_steps

            streak = 0
            if chain_protocol:
                last_eval = evaluate_policy(agent, eval_env, config.eval_episodes,
                                            rngs["eval"])
                eval_history.append(last_eval)
                solved, streak = solved_check(eval_history, optimal,
                                              config.solved_tolerance)
            else:
                solved = False
            result.rows.append(RunRow(
                episode=episode, steps=total_steps, train_return=ep_return,
                eval_return=last_eval, sigma=getattr(agent, "sigma", 0.0),
                distance=getattr(agent, "last_distance", math.nan),
                solved_streak=streak))
            if solved:
                result.solved_at = episode
                result.status = "solved"
                break
    except FloatingPointError:
        result.status = "failed"
    return result, agent


def run_experiment(config: ExperimentConfig) -> list[RunResult]:
    """One deterministic run per seed; a diverged seed is marked failed and
    the remaining seeds still run."""
    return [run_single(config, seed) for seed in config.seeds]
