"""Command-line entry point: run, tune, sweep, and compare-oracle.

Exit codes are a stable contract: 0 on success, 1 on runtime failure, 2 on
usage/configuration errors. Failures emit one machine-readable JSON object on
stderr. Flags override values from an optional JSON config file, and the
fully resolved configuration is echoed into every summary for
reproducibility. All randomness funnels through the single --seed flag
(default 0).
"""

import argparse
import json
import os
import sys

import numpy as np

from .baseline import BatchDmdConfig, run_batch_dmd
from .embed import hankel_block, new_hankel_column, snapshot_pair, window_at
from .ingest import RawSeries, SyntheticSpec, gen_synthetic, load_csv, split_warmup
from .operator import batch_oracle, init_batch, slide
from .pipeline import RunConfig, run_online, write_artifacts
from .rff import lift_matrix, sample_map
from .tune import (SweepSpec, default_search_space, random_search,
                   sensitivity_sweep, write_score_table, write_sweep_csv)

__all__ = ["main"]

_CONFIG_KEYS = {
    "data", "synth", "T", "p", "noise_std", "timestamp_column",
    "out", "method", "budget", "param", "values",
    "w", "d", "s", "gamma", "r", "H",
    "decoder_period", "pod_period", "refresh_period", "seed",
    "metrics_space", "warmup_ratio", "exponent_start", "rff_cov_scale",
}

_RUN_DEFAULTS = {
    "w": 60, "d": 10, "s": 256, "gamma": 1e-4, "r": None, "H": 1,
    "decoder_period": 1, "pod_period": 1, "refresh_period": 0, "seed": 0,
    "metrics_space": "normalized", "warmup_ratio": 0.25,
    "exponent_start": 1, "rff_cov_scale": 2.0,
}


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code) if exc.code else 0
    try:
        return args.entry(args)
    except UsageError as exc:
        _emit_error(str(exc), kind="usage")
        return 2
    except Exception as exc:  # runtime failure
        _emit_error(str(exc), kind=type(exc).__name__)
        return 1


def _emit_error(message: str, kind: str) -> None:
    json.dump({"error": message, "type": kind}, sys.stderr)
    sys.stderr.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okdmd",
        description="Online kernel DMD forecasting over rolling windows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one online evaluation")
    _add_data_flags(run)
    _add_config_flags(run)
    run.add_argument("--method", choices=["workdmd", "batch_dmd"], default=None)
    run.set_defaults(entry=cmd_run)

    tune = sub.add_parser("tune", help="random search on the warm-up phase")
    _add_data_flags(tune)
    _add_config_flags(tune)
    tune.add_argument("--budget", type=int, default=None)
    tune.add_argument("--folds", type=int, default=3)
    tune.set_defaults(entry=cmd_tune)

    sweep = sub.add_parser("sweep", help="one-at-a-time sensitivity sweep")
    _add_data_flags(sweep)
    _add_config_flags(sweep)
    sweep.add_argument("--param", default=None)
    sweep.add_argument("--values", default=None,
                       help="comma-separated parameter values")
    sweep.add_argument("--horizons", default="1,24,48",
                       help="comma-separated forecast horizons")
    sweep.set_defaults(entry=cmd_sweep)

    cmp = sub.add_parser("compare-oracle",
                         help="check sliding updates against batch recomputation")
    cmp.add_argument("--slides", type=int, default=200)
    cmp.add_argument("--w", type=int, default=60)
    cmp.add_argument("--d", type=int, default=10)
    cmp.add_argument("--s", type=int, default=64)
    cmp.add_argument("--gamma", type=float, default=1e-3)
    cmp.add_argument("--p", type=int, default=3)
    cmp.add_argument("--refresh-period", type=int, default=0)
    cmp.add_argument("--seed", type=int, default=0)
    cmp.add_argument("--threshold", type=float, default=1e-6)
    cmp.set_defaults(entry=cmd_compare_oracle)

    return parser


def _add_data_flags(parser) -> None:
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--data", default=None, help="CSV dataset path")
    parser.add_argument("--synth", default=None,
                        choices=["sinusoid", "sinusoid_mix", "linear",
                                 "linear_system", "regime_shift"],
                        help="synthetic stream kind")
    parser.add_argument("--T", type=int, default=None, help="synthetic length")
    parser.add_argument("--p", type=int, default=None, help="synthetic features")
    parser.add_argument("--noise-std", type=float, default=None)
    parser.add_argument("--timestamp-column", choices=["auto", "yes", "no"],
                        default="auto")
    parser.add_argument("--out", default=None, help="output directory")


def _add_config_flags(parser) -> None:
    parser.add_argument("--w", type=int, default=None)
    parser.add_argument("--d", type=int, default=None)
    parser.add_argument("--s", type=int, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--r", type=int, default=None)
    parser.add_argument("--H", type=int, default=None)
    parser.add_argument("--decoder-period", type=int, default=None)
    parser.add_argument("--pod-period", type=int, default=None)
    parser.add_argument("--refresh-period", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--metrics-space", choices=["normalized", "raw"],
                        default=None)
    parser.add_argument("--warmup-ratio", type=float, default=None)
    parser.add_argument("--exponent-start", type=int, default=None)
    parser.add_argument("--rff-cov-scale", type=float, default=None)


def _resolve(args) -> dict:
    """Merge defaults < config file < flags into one settings dict."""
    settings = dict(_RUN_DEFAULTS)
    settings.update({"data": None, "synth": None, "T": 2000, "p": 1,
                     "noise_std": 0.0, "timestamp_column": "auto",
                     "out": "okdmd_out", "method": "workdmd",
                     "budget": 20, "param": None, "values": None})
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise UsageError(f"config file not found: {args.config}")
        with open(args.config, encoding="utf-8") as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config file {args.config} is not valid JSON: {exc}")
        unknown = set(file_cfg) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_cfg)
    for key in settings:
        flag = getattr(args, key, None)
        if flag is not None and key not in ("timestamp_column",):
            settings[key] = flag
    if getattr(args, "timestamp_column", "auto") != "auto":
        settings["timestamp_column"] = args.timestamp_column
    return settings


def _run_config(settings) -> RunConfig:
    try:
        return RunConfig(
            w=settings["w"], d=settings["d"], s=settings["s"],
            gamma=settings["gamma"], r_requested=settings["r"], H=settings["H"],
            decoder_period=settings["decoder_period"],
            pod_period=settings["pod_period"],
            refresh_period=settings["refresh_period"], seed=settings["seed"],
            metrics_space=settings["metrics_space"],
            warmup_ratio=settings["warmup_ratio"],
            exponent_start=settings["exponent_start"],
            rff_cov_scale=settings["rff_cov_scale"],
        )
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}")


def _load_series(settings) -> RawSeries:
    if settings["data"] and settings["synth"]:
        raise UsageError("pass either --data or --synth, not both")
    if settings["data"]:
        path = settings["data"]
        if not os.path.exists(path):
            raise UsageError(f"dataset file not found: {path}")
        has_ts = _detect_timestamp(path, settings.get("timestamp_column", "auto"))
        return load_csv(path, has_timestamp_column=has_ts)
    kind = settings["synth"] or "sinusoid"
    kind = {"sinusoid": "sinusoid_mix", "linear": "linear_system"}.get(kind, kind)
    return gen_synthetic(_default_synth_spec(kind, settings))


def _detect_timestamp(path, mode: str) -> bool:
    if mode == "yes":
        return True
    if mode == "no":
        return False
    with open(path, encoding="utf-8") as fh:
        fh.readline()  # header
        first = fh.readline().split(",")
    if not first or not first[0].strip():
        return False
    try:
        float(first[0])
        return False
    except ValueError:
        return True


def _default_synth_spec(kind: str, settings) -> SyntheticSpec:
    T = int(settings["T"])
    p = int(settings["p"])
    noise = float(settings["noise_std"])
    seed = int(settings["seed"])
    if kind == "sinusoid_mix":
        params = {
            "frequencies": [1.0 / 24.0, 1.0 / 60.0],
            "amplitudes": [1.0, 0.5],
            "phases": [[0.3 * j, 0.7 * j + 0.2] for j in range(p)],
        }
        return SyntheticSpec("sinusoid_mix", p, T, params, noise, seed)
    if kind == "linear_system":
        phi = np.pi / 8.0
        if p != 2:
            raise UsageError("the built-in linear synthetic stream requires --p 2")
        params = {"matrix": [[np.cos(phi), -np.sin(phi)],
                             [np.sin(phi), np.cos(phi)]],
                  "x0": [1.0, 0.0]}
        return SyntheticSpec("linear_system", p, T, params, noise, seed)
    if kind == "regime_shift":
        sin = {"kind": "sinusoid_mix",
               "params": {"frequencies": [1.0 / 24.0], "amplitudes": [1.0]}}
        shifted = {"kind": "sinusoid_mix",
                   "params": {"frequencies": [1.0 / 24.0], "amplitudes": [1.0],
                              "offset": 5.0}}
        params = {"shift_time": T // 2, "before": sin, "after": shifted}
        return SyntheticSpec("regime_shift", p, T, params, noise, seed)
    raise UsageError(f"unknown synthetic kind {kind!r}")


def cmd_run(args) -> int:
    settings = _resolve(args)
    series = _load_series(settings)
    method = settings["method"]
    if method == "workdmd":
        report = run_online(series, _run_config(settings))
    elif method == "batch_dmd":
        try:
            config = BatchDmdConfig(w=settings["w"], d=settings["d"],
                                    H=settings["H"], r=settings["r"],
                                    metrics_space=settings["metrics_space"],
                                    warmup_ratio=settings["warmup_ratio"])
        except ValueError as exc:
            raise UsageError(f"invalid configuration: {exc}")
        report = run_batch_dmd(series, config)
    else:
        raise UsageError(f"unknown method {method!r}")
    paths = write_artifacts(report, settings["out"])
    json.dump({"mse": report.mse, "mae": report.mae,
               "per_horizon": report.per_horizon,
               "total_sample_exposures": report.total_sample_exposures,
               "artifacts": paths}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_tune(args) -> int:
    settings = _resolve(args)
    series = _load_series(settings)
    base = _run_config(settings)
    warm, _ = split_warmup(series, base.warmup_ratio)
    space = default_search_space(base, budget=int(settings["budget"]),
                                 seed=base.seed, folds=args.folds)
    # keep only window choices the shortest CV fold can initialize
    fold_train = warm.T // (args.folds + 1)
    feasible = tuple(w for w in space.w_choices if w + 1 <= fold_train)
    if not feasible:
        raise UsageError(
            f"warm-up phase too short to tune: first fold trains on "
            f"{fold_train} steps, smallest candidate window is "
            f"{min(space.w_choices)}"
        )
    space.w_choices = feasible
    best, table = random_search(warm, space)
    os.makedirs(settings["out"], exist_ok=True)
    table_path = os.path.join(settings["out"], "score_table.csv")
    best_path = os.path.join(settings["out"], "best_config.json")
    write_score_table(table, table_path)
    with open(best_path, "w", encoding="utf-8") as fh:
        json.dump(best.to_dict(), fh, indent=2)
    json.dump({"best_config": best.to_dict(),
               "artifacts": {"score_table": table_path, "best_config": best_path}},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_sweep(args) -> int:
    settings = _resolve(args)
    if not settings["param"]:
        raise UsageError("sweep requires --param")
    if not settings["values"]:
        raise UsageError("sweep requires --values")
    values = [float(v) for v in str(settings["values"]).split(",") if v.strip()]
    horizons = tuple(int(h) for h in str(args.horizons).split(",") if h.strip())
    series = _load_series(settings)
    baseline = _run_config(settings)
    try:
        spec = SweepSpec(parameter=settings["param"], values=values,
                         baseline=baseline, horizons=horizons)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = sensitivity_sweep(series, spec)
    os.makedirs(settings["out"], exist_ok=True)
    grid_path = os.path.join(settings["out"], f"sweep_{spec.parameter}.csv")
    write_sweep_csv(rows, grid_path)
    ok = [row for row in rows if row["status"] == "ok"]
    json.dump({"cells": len(rows), "succeeded": len(ok), "grid": grid_path},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0 if ok else 1


def cmd_compare_oracle(args) -> int:
    """Slide N steps on a synthetic stream, checking (P, A) against batch oracle."""
    if args.slides < 1:
        raise UsageError("--slides must be >= 1")
    w, d, s, p = args.w, args.d, args.s, args.p
    if w <= d:
        raise UsageError(f"need w > d, got w={w}, d={d}")
    T = w + args.slides
    spec = SyntheticSpec(
        "sinusoid_mix", p, T,
        {"frequencies": [1.0 / 16.0, 1.0 / 37.0], "amplitudes": [1.0, 0.6],
         "phases": [[0.4 * j, 0.9 * j + 0.1] for j in range(p)]},
        noise_std=0.05, seed=args.seed,
    )
    series = gen_synthetic(spec)
    rff_map = sample_map(p * d, s, args.gamma, args.seed)
    m = w - d

    block = hankel_block(window_at(series, w - 1, w), d)
    pair = snapshot_pair(block)
    lifted = lift_matrix(rff_map, block.data)
    state = init_batch(lifted[:, :m], lifted[:, 1:], pair, lifted[:, -1])

    max_p_dev = 0.0
    max_a_dev = 0.0
    worst_step = -1
    for k, t in enumerate(range(w, T)):
        state = slide(state, new_hankel_column(series, t, d), rff_map,
                      refresh_period=args.refresh_period)
        # independent recomputation of the slid window from raw data
        check = hankel_block(window_at(series, t, w), d)
        relift = lift_matrix(rff_map, check.data)
        P_ref, A_ref = batch_oracle(relift[:, :m], relift[:, 1:], state.epsilon)
        p_dev = _rel_dev(state.P, P_ref)
        a_dev = _rel_dev(state.A, A_ref)
        if max(p_dev, a_dev) > max(max_p_dev, max_a_dev):
            worst_step = k
        max_p_dev = max(max_p_dev, p_dev)
        max_a_dev = max(max_a_dev, a_dev)

    ok = max(max_p_dev, max_a_dev) < args.threshold
    json.dump({"slides": args.slides, "max_P_deviation": max_p_dev,
               "max_A_deviation": max_a_dev, "threshold": args.threshold,
               "worst_step": worst_step, "refresh_events": state.refresh_count,
               "reinit_events": state.reinit_count, "ok": ok},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    if not ok:
        _emit_error(
            f"deviation above {args.threshold:g} at step {worst_step}", kind="oracle"
        )
        return 1
    return 0


def _rel_dev(value: np.ndarray, reference: np.ndarray) -> float:
    denom = float(np.linalg.norm(reference, "fro"))
    return float(np.linalg.norm(value - reference, "fro")) / max(denom, 1e-300)


if __name__ == "__main__":
    raise SystemExit(main())
