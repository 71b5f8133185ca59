"""CSV logging, median/interquartile aggregation across seeds, and SVG
learning-curve plots."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .runner import RunResult, RunRow

CSV_HEADER = "episode,steps,train_return,eval_return,sigma,distance,solved_streak"

ABORT_CAP = 2000    # episodes-to-solve recorded for unsolved runs


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(results: list[RunResult], out_dir) -> list[Path]:
    """One CSV per seed plus an aggregate file. Returns the written paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for result in results:
            path = out_dir / f"seed{result.seed}.csv"
            lines = [CSV_HEADER]
            for row in result.rows:
                lines.append(",".join([
                    str(row.episode), str(row.steps), _fmt(row.train_return),
                    _fmt(row.eval_return), _fmt(row.sigma), _fmt(row.distance),
                    str(row.solved_streak)]))
            path.write_text("\n".join(lines) + "\n")
            paths.append(path)
        agg_path = out_dir / "aggregate.csv"
        write_aggregate_csv(aggregate_runs(results), agg_path)
        paths.append(agg_path)
        return paths
    except OSError as exc:
        raise OSError(f"failed writing results under {out_dir}: {exc}") from exc


def load_run_csv(path) -> list[RunRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a run CSV (bad header)")
    rows = []
    for line in lines[1:]:
        e, s, tr, ev, sg, d, st = line.split(",")
        rows.append(RunRow(int(e), int(s), float(tr), float(ev), float(sg),
                           float(d), int(st)))
    return rows


def aggregate_runs(results: list[RunResult], abort_cap: int = ABORT_CAP) -> dict:
    """Per-episode median and 25th/75th percentiles across seeds (linear
    interpolation between order statistics), plus the median episodes-to-
    solve with unsolved runs counted at the abort cap."""
    if not results:
        raise ValueError("need at least one run result")
    n_episodes = max((len(r.rows) for r in results), default=0)
    episodes = np.arange(1, n_episodes + 1)
    train_q, eval_q, steps_med = [], [], []
    for i in range(n_episodes):
        train_vals = [r.rows[i].train_return for r in results if len(r.rows) > i]
        eval_vals = [r.rows[i].eval_return for r in results if len(r.rows) > i]
        steps_vals = [r.rows[i].steps for r in results if len(r.rows) > i]
        train_q.append(np.percentile(train_vals, [25, 50, 75]))
        finite = [v for v in eval_vals if not math.isnan(v)]
        eval_q.append(np.percentile(finite, [25, 50, 75]) if finite
                      else np.full(3, np.nan))
        steps_med.append(np.median(steps_vals))
    solve_counts = [r.solved_at if r.solved_at is not None else abort_cap
                    for r in results]
    return {
        "episode": episodes,
        "steps_median": np.asarray(steps_med),
        "train": np.asarray(train_q).reshape(n_episodes, 3),
        "eval": np.asarray(eval_q).reshape(n_episodes, 3),
        "median_episodes_to_solve": float(np.median(solve_counts)),
        "n_seeds": len(results),
    }


AGG_HEADER = ("episode,steps_median,train_p25,train_median,train_p75,"
              "eval_p25,eval_median,eval_p75")


def write_aggregate_csv(agg: dict, path) -> None:
    lines = [AGG_HEADER]
    for i, ep in enumerate(agg["episode"]):
        lines.append(",".join(
            [str(int(ep)), _fmt(float(agg["steps_median"][i]))]
            + [_fmt(v) for v in agg["train"][i]]
            + [_fmt(v) for v in agg["eval"][i]]))
    lines.append(f"# median_episodes_to_solve = {_fmt(agg['median_episodes_to_solve'])}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_aggregate_csv(path) -> dict:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != AGG_HEADER:
        raise ValueError(f"{path}: not an aggregate CSV (bad header)")
    data = []
    meta = math.nan
    for line in lines[1:]:
        if line.startswith("#"):
            if "median_episodes_to_solve" in line:
                meta = float(line.split("=")[1])
            continue
        data.append([float(v) for v in line.split(",")])
    arr = np.asarray(data)
    return {
        "episode": arr[:, 0].astype(int),
        "steps_median": arr[:, 1],
        "train": arr[:, 2:5][:, [0, 1, 2]],
        "eval": arr[:, 5:8],
        "median_episodes_to_solve": meta,
        "n_seeds": 0,
    }


def emit_plot(aggregates: list[tuple[str, dict]], path, metric: str = "auto") -> None:
    """SVG learning curves: median line plus shaded interquartile band, one
    series per aggregate."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, agg in aggregates:
        use = metric
        if use == "auto":
            use = "eval" if np.any(np.isfinite(agg["eval"][:, 1])) else "train"
        q = agg[use]
        x = agg["episode"]
        ax.plot(x, q[:, 1], label=label)
        ax.fill_between(x, q[:, 0], q[:, 2], alpha=0.25)
    ax.set_xlabel("episode")
    ax.set_ylabel("return (median, IQR)")
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"failed writing plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)
