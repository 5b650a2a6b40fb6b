"""Hyperparameter search on warm-up data and one-at-a-time sensitivity sweeps.

Cross-validation uses expanding-origin rolling folds: with k folds the
warm-up is cut into k+1 equal blocks; fold i trains on the first i blocks and
validates on block i+1 (the last validation block absorbs any remainder), so
every validation index is strictly later than every train index of its fold.

Random search samples configurations uniformly over choice sets for the
depth and rank, log-uniformly for the bandwidth, and over the (geometric)
feature-dimension choices, evaluating each by mean validation MSE across
folds. Ties break toward the cheaper model: smaller s, then smaller r.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ingest import RawSeries
from .pipeline import RunConfig, run_online, run_online_segments

__all__ = [
    "SearchSpace",
    "SweepSpec",
    "rolling_cv_split",
    "random_search",
    "sensitivity_sweep",
    "default_search_space",
    "write_score_table",
    "load_score_table",
    "write_sweep_csv",
    "load_sweep_csv",
]

_SWEEP_PARAMS = {"w": "w", "s": "s", "gamma": "gamma", "r": "r_requested"}


@dataclass
class SearchSpace:
    """Sampling ranges for random search, anchored on a base configuration."""

    base: RunConfig
    d_choices: tuple = (5, 10, 20, 30, 45, 60)
    r_choices: tuple = (10, 16, 20, 32, 40, 64, 96, 128)
    s_choices: tuple = (256, 512, 1024, 2048)
    gamma_bounds: tuple = (1e-6, 1e-4)
    w_choices: tuple | None = (30, 60, 90, 120, 150)
    budget: int = 20
    folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.folds < 1:
            raise ValueError("folds must be >= 1")
        lo, hi = self.gamma_bounds
        if not (0 < lo <= hi):
            raise ValueError(f"gamma bounds must satisfy 0 < lo <= hi, got {self.gamma_bounds}")


@dataclass
class SweepSpec:
    """One-at-a-time sweep: vary one parameter, hold the baseline elsewhere."""

    parameter: str
    values: list
    baseline: RunConfig
    horizons: tuple = (1, 24, 48)

    def __post_init__(self):
        if self.parameter not in _SWEEP_PARAMS:
            raise ValueError(
                f"unknown sweep parameter {self.parameter!r}; "
                f"expected one of {sorted(_SWEEP_PARAMS)}"
            )
        if not self.values:
            raise ValueError("sweep needs at least one value")


def default_search_space(base: RunConfig, budget: int = 20, seed: int = 0,
                         folds: int = 3) -> SearchSpace:
    """Default ranges; wide enough to contain the benchmark configurations."""
    return SearchSpace(base=base, budget=budget, seed=seed, folds=folds)


def rolling_cv_split(warmup: RawSeries, k: int) -> list[tuple[RawSeries, RawSeries]]:
    """Expanding-origin folds: train on the first i blocks, validate on the next."""
    if k < 1:
        raise ValueError("need at least one fold")
    base = warmup.T // (k + 1)
    if base < 1:
        raise ValueError(
            f"warm-up too short for {k}-fold rolling CV: need at least "
            f"{k + 1} steps, got {warmup.T}"
        )
    folds = []
    for i in range(1, k + 1):
        train = warmup.slice_time(0, i * base)
        stop = (i + 1) * base if i < k else warmup.T  # last block takes the tail
        folds.append((train, warmup.slice_time(i * base, stop)))
    return folds


def random_search(warmup: RawSeries, space: SearchSpace):
    """Sample ``budget`` configurations, score by mean fold MSE, return the best.

    Returns ``(best_config, table)`` where the table holds one row per sampled
    configuration with its per-fold MSEs, mean, and status. Fold evaluation
    runs the online protocol with the fold's train segment as warm-up.
    Configurations that fail on any fold are kept in the table with the error
    message; if every configuration fails, raises RuntimeError listing them.
    """
    rng = np.random.Generator(np.random.PCG64(space.seed))
    folds = rolling_cv_split(warmup, space.folds)

    sampled = []
    for _ in range(space.budget):
        w = space.base.w if space.w_choices is None else int(rng.choice(space.w_choices))
        valid_d = [d for d in space.d_choices if d < w]
        if not valid_d:
            raise ValueError(f"no depth choice is compatible with window w={w}")
        d = int(rng.choice(valid_d))
        lo, hi = space.gamma_bounds
        gamma = float(10.0 ** rng.uniform(math.log10(lo), math.log10(hi)))
        s = int(rng.choice(space.s_choices))
        r = int(rng.choice(space.r_choices))
        sampled.append(replace(space.base, w=w, d=d, gamma=gamma, s=s, r_requested=r))

    table = []
    for config in sampled:
        fold_mses: list[float] = []
        status = "ok"
        for train, val in folds:
            try:
                if train.T < config.w + 1:
                    raise ValueError(
                        f"fold train segment has {train.T} steps, "
                        f"needs at least w + 1 = {config.w + 1}"
                    )
                fold_mses.append(run_online_segments(train, val, config).mse)
            except Exception as exc:  # config-level failure, search continues
                status = f"failed: {exc}"
                break
        table.append({
            "config": config,
            "w": config.w, "d": config.d, "s": config.s,
            "gamma": config.gamma, "r": config.r_requested,
            "fold_mse": fold_mses,
            "mean_mse": float(np.mean(fold_mses)) if status == "ok" else float("nan"),
            "status": status,
        })

    ok_rows = [row for row in table if row["status"] == "ok"]
    if not ok_rows:
        details = "; ".join(row["status"] for row in table)
        raise RuntimeError(f"all {len(table)} sampled configurations failed: {details}")
    best = min(ok_rows, key=lambda row: (
        row["mean_mse"],
        row["s"],
        row["r"] if row["r"] is not None else float("inf"),
    ))
    return best["config"], table


def sensitivity_sweep(series: RawSeries, spec: SweepSpec) -> list[dict]:
    """Grid of (value, horizon) cells, each a full online run.

    Exactly one parameter differs from the baseline in every cell (besides
    the horizon axis). Per-cell failures are recorded in the grid and the
    sweep continues.
    """
    attr = _SWEEP_PARAMS[spec.parameter]
    rows = []
    for value in spec.values:
        for H in spec.horizons:
            row = {"parameter": spec.parameter, "value": value, "H": H,
                   "mse": float("nan"), "mae": float("nan"), "status": "ok"}
            try:
                config = replace(spec.baseline, H=H, **{attr: _cast(attr, value)})
                report = run_online(series, config)
                row["mse"], row["mae"] = report.mse, report.mae
            except Exception as exc:
                row["status"] = f"failed: {exc}"
            rows.append(row)
    return rows


def _cast(attr: str, value):
    return float(value) if attr == "gamma" else int(value)


def write_score_table(table: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w", "d", "s", "gamma", "r", "fold_mse", "mean_mse", "status"])
        for row in table:
            writer.writerow([
                row["w"], row["d"], row["s"], repr(row["gamma"]), row["r"],
                ";".join(repr(v) for v in row["fold_mse"]),
                repr(row["mean_mse"]), row["status"],
            ])


def load_score_table(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "w": int(rec["w"]), "d": int(rec["d"]), "s": int(rec["s"]),
                "gamma": float(rec["gamma"]),
                "r": int(rec["r"]) if rec["r"] not in ("", "None") else None,
                "fold_mse": [float(v) for v in rec["fold_mse"].split(";") if v],
                "mean_mse": float(rec["mean_mse"]),
                "status": rec["status"],
            })
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "value", "H", "mse", "mae", "status"])
        for row in rows:
            writer.writerow([row["parameter"], repr(row["value"]), row["H"],
                             repr(row["mse"]), repr(row["mae"]), row["status"]])


def load_sweep_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "parameter": rec["parameter"],
                "value": float(rec["value"]),
                "H": int(rec["H"]),
                "mse": float(rec["mse"]),
                "mae": float(rec["mae"]),
                "status": rec["status"],
            })
    return rows
