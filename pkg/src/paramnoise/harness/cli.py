"""Command line interface.

    paramnoise run <config>
    paramnoise eval <checkpoint> <env> [--episodes K]
    paramnoise sweep <config> --vary key=v1,v2,...
    paramnoise plot <aggregate.csv> [...] -o out.svg

Exit codes: 0 success, 1 usage error, 2 run failure (divergence),
3 I/O error. The SEED_OFFSET environment variable shifts all seeds.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from ..envs import make_env
from . import checkpoint as ckpt
from .config import ConfigError, load_config
from .report import emit_csv, emit_plot, load_aggregate_csv
from .runner import build_agent, evaluate_policy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUN_FAILURE = 2
EXIT_IO = 3


def _apply_seed_offset(config):
    offset = int(os.environ.get("SEED_OFFSET", "0"))
    if offset:
        config.seeds = tuple(s + offset for s in config.seeds)
    return config


def cmd_run(args) -> int:
    config = _apply_seed_offset(load_config(args.config))
    return _run_config(config)


def cmd_eval(args) -> int:
    agent, env, header = ckpt.agent_from_checkpoint(args.checkpoint, build_agent,
                                                    make_env)
    if args.env != header["env"]:
        env = make_env(args.env)
    rng = np.random.default_rng(args.seed)
    mean_return = evaluate_policy(agent, env, args.episodes, rng)
    print(f"{args.env}: mean return over {args.episodes} episodes = {mean_return}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _apply_seed_offset(load_config(args.config))
    key, _, raw_values = args.vary.partition("=")
    if not raw_values:
        raise ConfigError("--vary expects key=v1,v2,...")
    values = raw_values.split(",")
    status = EXIT_OK
    for value in values:
        config = dataclasses.replace(
            base, agent_overrides=dict(base.agent_overrides))
        _set_swept_key(config, key, value)
        config.out_dir = str(Path(base.out_dir) / f"{key}-{value}")
        print(f"[sweep] {key} = {value}")
        code = _run_config(config)
        status = max(status, code)
    return status


def _set_swept_key(config, key: str, value: str):
    from .config import _EXPERIMENT_FIELDS, _coerce, _coerce_agent_value
    from ..agents import DDPGConfig, DQNConfig, ReinforceConfig

    if key in _EXPERIMENT_FIELDS:
        setattr(config, key, _coerce(value, _EXPERIMENT_FIELDS[key]))
        config.__post_init__()
        return
    cls = {"dqn": DQNConfig, "ddpg": DDPGConfig,
           "reinforce": ReinforceConfig}[config.family]
    config.agent_overrides[key] = _coerce_agent_value(cls, key, value)
    config.agent_config()  # validate


def _run_config(config) -> int:
    from .runner import run_single_with_agent

    results, agents = [], []
    for seed in config.seeds:
        result, agent = run_single_with_agent(config, seed)
        results.append(result)
        agents.append(agent)
    out_dir = Path(config.out_dir)
    emit_csv(results, out_dir)
    for result, agent in zip(results, agents):
        steps = result.rows[-1].steps if result.rows else 0
        ckpt.save_checkpoint(agent, config, steps,
                             out_dir / f"seed{result.seed}.ckpt")
    for result in results:
        print(f"  seed {result.seed}: status={result.status}")
    return EXIT_RUN_FAILURE if any(r.status == "failed" for r in results) else EXIT_OK


def cmd_plot(args) -> int:
    aggregates = []
    for path in args.aggregates:
        label = Path(path).parent.name or Path(path).stem
        aggregates.append((label, load_aggregate_csv(path)))
    emit_plot(aggregates, args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paramnoise")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint greedily")
    p_eval.add_argument("checkpoint")
    p_eval.add_argument("env")
    p_eval.add_argument("--episodes", type=int, default=10)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="run a config over key variations")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--vary", required=True, metavar="key=v1,v2,...")
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="render learning curves to SVG")
    p_plot.add_argument("aggregates", nargs="+")
    p_plot.add_argument("-o", "--output", required=True)
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FloatingPointError as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
