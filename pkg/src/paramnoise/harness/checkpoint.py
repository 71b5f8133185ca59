"""Plain-text checkpoints: a key/value header (agent, env, step count,
config hash) followed by named flat parameter vectors, one decimal float
per line. Readable by the `eval` CLI subcommand."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..agents import BootstrappedDQNAgent, DDPGAgent, DQNAgent, ReinforceAgent
from .config import ExperimentConfig


def config_hash(config: ExperimentConfig) -> str:
    text = repr((config.env, config.agent, config.seeds, config.max_episodes,
                 sorted(config.agent_overrides.items())))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _agent_vectors(agent) -> dict[str, np.ndarray]:
    if isinstance(agent, BootstrappedDQNAgent):
        return {"net": agent.net.get_flat_params()}
    if isinstance(agent, DQNAgent):
        if agent.config.policy_head:
            return {"trunk": agent.trunk.get_flat_params(),
                    "q_head": agent.q_head.get_flat_params(),
                    "pi_head": agent.pi_head.get_flat_params()}
        return {"q": agent.q_net.get_flat_params()}
    if isinstance(agent, DDPGAgent):
        return {"actor": agent.actor.get_flat_params(),
                "norm_mean": agent.normalizer.mean,
                "norm_m2": agent.normalizer.m2,
                "norm_count": np.array([float(agent.normalizer.count)])}
    if isinstance(agent, ReinforceAgent):
        return {"phi": agent.phi}
    raise TypeError(f"cannot checkpoint {type(agent).__name__}")


def _restore_vectors(agent, vectors: dict[str, np.ndarray]) -> None:
    if isinstance(agent, BootstrappedDQNAgent):
        agent.net.set_flat_params(vectors["net"])
        agent.target.set_flat_params(vectors["net"])
    elif isinstance(agent, DQNAgent):
        if agent.config.policy_head:
            agent.trunk.set_flat_params(vectors["trunk"])
            agent.q_head.set_flat_params(vectors["q_head"])
            agent.pi_head.set_flat_params(vectors["pi_head"])
        else:
            agent.q_net.set_flat_params(vectors["q"])
    elif isinstance(agent, DDPGAgent):
        agent.actor.set_flat_params(vectors["actor"])
        agent.normalizer.mean = vectors["norm_mean"].copy()
        agent.normalizer.m2 = vectors["norm_m2"].copy()
        agent.normalizer.count = int(vectors["norm_count"][0])
    elif isinstance(agent, ReinforceAgent):
        agent.phi = vectors["phi"].copy()
        agent.net.set_flat_params(agent.phi)
    else:
        raise TypeError(f"cannot restore {type(agent).__name__}")


def save_checkpoint(agent, config: ExperimentConfig, steps: int, path) -> None:
    lines = [
        f"agent = {config.agent}",
        f"env = {config.env}",
        f"steps = {steps}",
        f"config_hash = {config_hash(config)}",
    ]
    for key, value in sorted(config.agent_overrides.items()):
        lines.append(f"override.{key} = {value}")
    for name, vec in _agent_vectors(agent).items():
        lines.append(f"vector {name} {vec.size}")
        lines += [f"{v:.17g}" for v in vec]
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    lines = Path(path).read_text().splitlines()
    header: dict[str, str] = {}
    vectors: dict[str, np.ndarray] = {}
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("vector "):
            _, name, count = line.split()
            n = int(count)
            vectors[name] = np.array([float(v) for v in lines[i + 1:i + 1 + n]])
            i += 1 + n
        else:
            key, value = (part.strip() for part in line.split("=", 1))
            header[key] = value
            i += 1
    return header, vectors


def agent_from_checkpoint(path, build_agent, make_env):
    """Rebuild a greedy-evaluable agent from a checkpoint file."""
    header, vectors = load_checkpoint(path)
    overrides = {}
    for key, value in header.items():
        if key.startswith("override."):
            overrides[key.split(".", 1)[1]] = _parse_override(value)
    config = ExperimentConfig(env=header["env"], agent=header["agent"],
                              agent_overrides=overrides)
    env = make_env(config.env)
    agent = build_agent(config, env, seed=0)
    _restore_vectors(agent, vectors)
    return agent, env, header


def _parse_override(value: str):
    if value in ("True", "False"):
        return value == "True"
    if value.startswith("(") and value.endswith(")"):
        return tuple(int(v) for v in value[1:-1].split(",") if v.strip())
    for typ in (int, float):
        try:
            return typ(value)
        except ValueError:
            continue
    return value
