"""Experiment configuration: plain-text `key = value` files with a
[section] per component and # comments. Unknown keys and duplicate keys
are hard errors so typos never pass silently; a parsed config
re-serializes losslessly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..agents import DDPGConfig, DQNConfig, ReinforceConfig

AGENT_KINDS = (
    "dqn-epsgreedy", "dqn-paramnoise", "dqn-bootstrapped",
    "ddpg-none", "ddpg-gaussian", "ddpg-ou", "ddpg-param",
    "reinforce-psn",
)

# [noise]-section keys per agent family; everything else belongs in [agent]
_NOISE_KEYS = {
    "dqn": {"sigma0", "alpha", "delta", "adapt_interval", "residual_epsilon",
            "epsilon_start", "epsilon_end", "epsilon_anneal_episodes"},
    "ddpg": {"sigma", "sigma0", "alpha", "adapt_interval"},
    "reinforce": {"sigma0", "alpha", "delta"},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    env: str
    agent: str
    seeds: tuple[int, ...] = (0,)
    max_episodes: int = 2000
    eval_episodes: int = 1
    eval_every_steps: int = 5000   # continuous-protocol evaluation cadence
    solved_tolerance: float = 1e-9
    out_dir: str = "results"
    agent_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"unknown agent {self.agent!r}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.max_episodes < 0:
            raise ConfigError("max_episodes must be >= 0")
        self.seeds = tuple(int(s) for s in self.seeds)
        # validate override keys and values against the agent's config class
        self.agent_config()

    @property
    def family(self) -> str:
        return self.agent.split("-")[0]

    def agent_config(self):
        """Materialize the typed agent config: built-in defaults plus file
        overrides."""
        family = self.family
        if family == "dqn":
            kwargs = dict(self.agent_overrides)
            kwargs.setdefault("exploration", {
                "dqn-epsgreedy": "epsilon-greedy",
                "dqn-paramnoise": "param-noise",
                "dqn-bootstrapped": "bootstrapped",
            }[self.agent])
            return _build(DQNConfig, kwargs)
        if family == "ddpg":
            kwargs = dict(self.agent_overrides)
            kwargs.setdefault("noise", self.agent.split("-", 1)[1])
            return _build(DDPGConfig, kwargs)
        return _build(ReinforceConfig, dict(self.agent_overrides))


def _build(cls, kwargs):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(kwargs) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


_EXPERIMENT_FIELDS = {
    "env": str, "agent": str, "seeds": "seeds", "max_episodes": int,
    "eval_episodes": int, "eval_every_steps": int, "solved_tolerance": float,
    "out_dir": str,
}


def _coerce(value: str, typ):
    if typ == "seeds":
        return tuple(int(v) for v in value.split(","))
    if typ is bool:
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"invalid boolean {value!r}")
    return typ(value)


def _coerce_agent_value(cls, key: str, value: str):
    fld = {f.name: f for f in dataclasses.fields(cls)}.get(key)
    if fld is None:
        raise ConfigError(f"unknown key {key!r} for {cls.__name__}")
    default = fld.default
    if isinstance(default, bool):
        return _coerce(value, bool)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        return tuple(int(v) for v in value.split(","))
    return value


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    sections: dict[str, dict[str, str]] = {"experiment": {}, "agent": {}, "noise": {}}
    current = "experiment"
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in sections:
                raise ConfigError(f"{path}:{lineno}: unknown section [{current}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return _assemble(sections, path)


def _assemble(sections, path) -> ExperimentConfig:
    exp = sections["experiment"]
    for required in ("env", "agent"):
        if required not in exp:
            raise ConfigError(f"{path}: missing required key {required!r}")
    kwargs = {}
    for key, value in exp.items():
        if key not in _EXPERIMENT_FIELDS:
            raise ConfigError(f"{path}: unknown [experiment] key {key!r}")
        try:
            kwargs[key] = _coerce(value, _EXPERIMENT_FIELDS[key])
        except ValueError as exc:
            raise ConfigError(f"{path}: invalid value for {key!r}: {exc}") from exc

    agent = kwargs["agent"]
    if agent not in AGENT_KINDS:
        raise ConfigError(f"{path}: unknown agent {agent!r}")
    family = agent.split("-")[0]
    cls = {"dqn": DQNConfig, "ddpg": DDPGConfig, "reinforce": ReinforceConfig}[family]
    overrides = {}
    for key, value in sections["agent"].items():
        overrides[key] = _coerce_agent_value(cls, key, value)
    for key, value in sections["noise"].items():
        if key not in _NOISE_KEYS[family]:
            raise ConfigError(f"{path}: key {key!r} is not a [noise] key for {family}")
        if key in overrides:
            raise ConfigError(f"{path}: key {key!r} set in both [agent] and [noise]")
        overrides[key] = _coerce_agent_value(cls, key, value)
    try:
        return ExperimentConfig(agent_overrides=overrides, **kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_config(config: ExperimentConfig, path) -> None:
    lines = ["[experiment]"]
    for key in _EXPERIMENT_FIELDS:
        lines.append(f"{key} = {_format_value(getattr(config, key))}")
    family = config.family
    noise_keys = _NOISE_KEYS[family]
    agent_items = {k: v for k, v in config.agent_overrides.items() if k not in noise_keys}
    noise_items = {k: v for k, v in config.agent_overrides.items() if k in noise_keys}
    if agent_items:
        lines.append("[agent]")
        lines += [f"{k} = {_format_value(v)}" for k, v in sorted(agent_items.items())]
    if noise_items:
        lines.append("[noise]")
        lines += [f"{k} = {_format_value(v)}" for k, v in sorted(noise_items.items())]
    Path(path).write_text("\n".join(lines) + "\n")
