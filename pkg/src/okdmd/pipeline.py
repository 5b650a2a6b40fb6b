"""End-to-end online evaluation: warm-up, slide-forecast-record loop, metrics.

Protocol. The stream is split into warm-up and online phases; per-feature
mean/std come from the warm-up only and z-score the whole stream. The
operator is initialized by batch on the last window of the warm-up, the
decoder is fitted on that window, and then for every online step the engine

1. forecasts H steps ahead from the current state,
2. receives the true value and slides the window once (exactly one new
   column is lifted per step; an internal counter enforces this),
3. refits the decoder / POD basis according to their configured periods.

An H-step forecast issued at origin t is scored on the horizons whose ground
truth arrives before the stream ends; trailing forecasts contribute only
their matured horizons. Metrics are computed in normalized space by default
(``metrics_space="raw"`` de-normalizes both predictions and truths first).

Sample-exposure accounting is single-pass: the model consumes the w samples
of its initialization window once and each online sample once, so total
exposures are w + number_of_slides.
"""

import csv
import json
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .embed import hankel_block, new_hankel_column, snapshot_pair, window_at
from .forecast import fit_decoder, forecast_h, pod_basis
from .ingest import (NormalizationStats, RawSeries, apply_normalizer,
                     fit_normalizer, split_warmup)
from .operator import ReinitRequired, init_batch, rebuild_state, slide
from .rff import lift_matrix, sample_map

__all__ = [
    "RunConfig",
    "StepRecord",
    "EvalReport",
    "run_online",
    "run_online_segments",
    "mse",
    "mae",
    "cumulative_error",
    "exposure_count",
    "write_artifacts",
    "write_summary_json",
    "write_step_csv",
    "write_curve_csv",
    "write_telemetry_csv",
    "load_summary_json",
    "load_step_csv",
    "load_curve_csv",
    "load_telemetry_csv",
]

_METRIC_SPACES = ("normalized", "raw")


@dataclass
class RunConfig:
    """Hyperparameters and run policy for one online evaluation.

    ``decoder_period`` / ``pod_period`` count slides between refits (1 =
    every slide, 0 = fit once and never refresh); ``refresh_period`` triggers
    a full batch rebuild of the operator every so many slides (0 = never).
    ``r_requested`` of None keeps the full numerical rank.
    """

    w: int
    d: int
    s: int
    gamma: float
    r_requested: int | None = None
    H: int = 1
    decoder_period: int = 1
    pod_period: int = 1
    refresh_period: int = 0
    seed: int = 0
    metrics_space: str = "normalized"
    warmup_ratio: float = 0.25
    exponent_start: int = 1
    rff_cov_scale: float = 2.0

    def __post_init__(self):
        if self.d < 1 or self.w <= self.d:
            raise ValueError(f"need w > d >= 1, got w={self.w}, d={self.d}")
        if self.s < 1:
            raise ValueError(f"need s >= 1, got {self.s}")
        if self.gamma <= 0:
            raise ValueError(f"need gamma > 0, got {self.gamma}")
        if self.r_requested is not None and self.r_requested < 1:
            raise ValueError(f"need r >= 1, got {self.r_requested}")
        if self.H < 1:
            raise ValueError(f"need H >= 1, got {self.H}")
        for name in ("decoder_period", "pod_period", "refresh_period"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.metrics_space not in _METRIC_SPACES:
            raise ValueError(f"metrics_space must be one of {_METRIC_SPACES}")
        if not 0.0 < self.warmup_ratio < 1.0:
            raise ValueError(f"warmup_ratio must be in (0, 1), got {self.warmup_ratio}")
        if self.exponent_start < 0:
            raise ValueError("exponent_start must be >= 0")
        if self.rff_cov_scale <= 0:
            raise ValueError("rff_cov_scale must be > 0")

    @property
    def m(self) -> int:
        return self.w - self.d

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, rec: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(rec) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**rec)


@dataclass
class StepRecord:
    """One forecast origin: predictions, matured truths, errors, telemetry."""

    step: int                  # global 0-based time index of the forecast origin
    predictions: np.ndarray    # (p, H) in the configured metric space
    truths: np.ndarray         # (p, H); NaN where ground truth never arrived
    n_matured: int             # horizons with ground truth
    se_sum: float              # sum of squared errors over matured entries
    ae_sum: float              # sum of absolute errors over matured entries
    spectral_radius: float
    eig_condition: float
    eig_moduli: np.ndarray     # |lambda| sorted descending

    @property
    def n_entries(self) -> int:
        return self.predictions.shape[0] * self.n_matured


@dataclass
class EvalReport:
    """Aggregated outcome of one online run."""

    method: str
    config: dict
    mse: float
    mae: float
    per_horizon: list[dict]
    cumulative_mse_curve: np.ndarray
    total_sample_exposures: int
    n_slides: int
    refresh_events: int
    reinit_events: int
    lift_columns: int
    wall_time_s: float
    per_step_seconds: np.ndarray
    records: list[StepRecord] = field(repr=False, default_factory=list)


def mse(pred, truth) -> float:
    """Mean of squared differences over all entries."""
    a, b = _paired(pred, truth)
    return float(np.mean((a - b) ** 2))


def mae(pred, truth) -> float:
    """Mean of absolute differences over all entries."""
    a, b = _paired(pred, truth)
    return float(np.mean(np.abs(a - b)))


def _paired(pred, truth):
    a = np.asarray(pred, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return a, b


def cumulative_error(per_step_errors, counts=None) -> np.ndarray:
    """Running mean of per-step errors; element k averages records 1..k.

    With ``counts`` the mean is weighted by per-record entry counts, so the
    final element equals the flat mean over all matured entries even when
    trailing records matured fewer horizons.
    """
    se = np.asarray(per_step_errors, dtype=float).ravel()
    if counts is None:
        weights = np.ones_like(se)
    else:
        weights = np.asarray(counts, dtype=float).ravel()
        if weights.shape != se.shape:
            raise ValueError("counts must match per-step errors in length")
    denom = np.cumsum(weights)
    if se.size and denom[0] <= 0:
        raise ValueError("counts must be positive")
    return np.cumsum(se * weights) / denom


def exposure_count(warmup_columns: int, slides: int) -> int:
    """Single-pass exposure total: each warm-up sample once plus one per slide."""
    if warmup_columns < 0 or slides < 0:
        raise ValueError("exposure counts must be nonnegative")
    return int(warmup_columns) + int(slides)


def run_online(series: RawSeries, config: RunConfig) -> EvalReport:
    """Split the stream per the configured ratio and run the online protocol."""
    warm, online = split_warmup(series, config.warmup_ratio)
    return run_online_segments(warm, online, config)


def run_online_segments(warmup: RawSeries, online: RawSeries,
                        config: RunConfig) -> EvalReport:
    """Run the online protocol with an explicit (warm-up, online) split.

    The online segment must be the immediate continuation of the warm-up.
    """
    p = warmup.p
    if online.p != p:
        raise ValueError(f"segments disagree on p: {p} vs {online.p}")
    if warmup.T < config.w + 1:
        raise ValueError(
            f"warm-up has {warmup.T} steps; need at least w + 1 = {config.w + 1}"
        )
    if online.T < 1:
        raise ValueError("online segment is empty")

    t_begin = time.perf_counter()
    stats = fit_normalizer(warmup)
    full = RawSeries(np.hstack([warmup.values, online.values]),
                     feature_names=warmup.feature_names)
    norm = apply_normalizer(stats, full)
    T_w, T = warmup.T, full.T
    m = config.m

    rff_map = sample_map(p * config.d, config.s, config.gamma, config.seed,
                         cov_scale=config.rff_cov_scale)
    block = hankel_block(window_at(norm, T_w - 1, config.w), config.d)
    pair = snapshot_pair(block)
    lifted = lift_matrix(rff_map, block.data)  # one lift per distinct column
    state = init_batch(lifted[:, :m], lifted[:, 1:], pair, lifted[:, -1])
    decoder = fit_decoder(pair.X, lifted[:, :m])

    basis = None
    if config.pod_period != 1:
        basis = pod_basis(state.lifted_window[:, :m], config.r_requested)

    records: list[StepRecord] = []
    per_step_seconds = []
    for k, t in enumerate(range(T_w, T)):
        step_t0 = time.perf_counter()
        if config.pod_period > 1 and k % config.pod_period == 0:
            basis = pod_basis(state.lifted_window[:, :m], config.r_requested)
        forecast = forecast_h(state, config.r_requested, config.H, decoder,
                              exponent_start=config.exponent_start, basis=basis)
        records.append(_score_step(forecast, norm, stats, t, config))

        lift_before = rff_map.lift_count
        new_col = new_hankel_column(norm, t, config.d)
        try:
            state = slide(state, new_col, rff_map,
                          refresh_period=config.refresh_period)
        except ReinitRequired as exc:
            reinit = state.reinit_count + 1
            refresh = state.refresh_count
            state = rebuild_state(exc.physical_window, exc.lifted_window,
                                  state.p, state.d)
            state.reinit_count = reinit
            state.refresh_count = refresh
        if rff_map.lift_count - lift_before != 1:
            raise RuntimeError(
                "single-pass violation: expected exactly one lifted column per step, "
                f"saw {rff_map.lift_count - lift_before}"
            )
        if config.decoder_period > 0 and (k + 1) % config.decoder_period == 0:
            decoder = fit_decoder(state.physical_window[:, :m],
                                  state.lifted_window[:, :m])
        per_step_seconds.append(time.perf_counter() - step_t0)

    return _aggregate(records, method="workdmd", config=config.to_dict(),
                      exposures=exposure_count(config.w, len(records)),
                      refresh_events=state.refresh_count,
                      reinit_events=state.reinit_count,
                      lift_columns=rff_map.lift_count,
                      wall_time_s=time.perf_counter() - t_begin,
                      per_step_seconds=np.array(per_step_seconds))


def _score_step(forecast, norm: RawSeries, stats: NormalizationStats, t: int,
                config) -> StepRecord:
    """Build the record for a forecast issued at origin t-1 (predicting t..)."""
    p = norm.p
    H = forecast.values.shape[1]
    n_matured = min(H, norm.T - t)
    preds = forecast.values
    truths = np.full((p, H), np.nan)
    truths[:, :n_matured] = norm.values[:, t : t + n_matured]
    if config.metrics_space == "raw":
        preds = preds * stats.std[:, None] + stats.mean[:, None]
        truths = truths * stats.std[:, None] + stats.mean[:, None]
    diff = preds[:, :n_matured] - truths[:, :n_matured]
    eig = forecast.eig
    return StepRecord(
        step=t - 1,
        predictions=preds,
        truths=truths,
        n_matured=n_matured,
        se_sum=float(np.sum(diff ** 2)),
        ae_sum=float(np.sum(np.abs(diff))),
        spectral_radius=eig.spectral_radius if eig is not None else float("nan"),
        eig_condition=eig.condition_estimate if eig is not None else float("nan"),
        eig_moduli=(np.abs(eig.eigenvalues) if eig is not None else np.array([])),
    )


def _aggregate(records: list[StepRecord], method: str, config: dict,
               exposures: int, refresh_events: int, reinit_events: int,
               lift_columns: int, wall_time_s: float,
               per_step_seconds: np.ndarray) -> EvalReport:
    total_n = sum(r.n_entries for r in records)
    if total_n == 0:
        raise ValueError("no matured forecasts to score")
    total_se = sum(r.se_sum for r in records)
    total_ae = sum(r.ae_sum for r in records)
    curve = cumulative_error([r.se_sum / r.n_entries for r in records],
                             counts=[r.n_entries for r in records])

    H = records[0].predictions.shape[1]
    preds = np.stack([r.predictions for r in records])  # (N, p, H)
    truths = np.stack([r.truths for r in records])
    sq = (preds - truths) ** 2
    ab = np.abs(preds - truths)
    per_horizon = []
    for h in range(H):
        valid = ~np.isnan(truths[:, :, h])
        count = int(valid.sum())
        per_horizon.append({
            "H": h + 1,
            "mse": float(np.nanmean(sq[:, :, h])) if count else float("nan"),
            "mae": float(np.nanmean(ab[:, :, h])) if count else float("nan"),
            "count": count,
        })

    return EvalReport(
        method=method,
        config=config,
        mse=total_se / total_n,
        mae=total_ae / total_n,
        per_horizon=per_horizon,
        cumulative_mse_curve=curve,
        total_sample_exposures=exposures,
        n_slides=len(records),
        refresh_events=refresh_events,
        reinit_events=reinit_events,
        lift_columns=lift_columns,
        wall_time_s=wall_time_s,
        per_step_seconds=per_step_seconds,
        records=records,
    )


# ---------------------------------------------------------------------------
# Artifact writers and loaders. Every file written here is re-parseable by
# the matching loader below.
# ---------------------------------------------------------------------------

def write_artifacts(report: EvalReport, outdir) -> dict:
    """Write summary JSON plus per-step, cumulative-curve and telemetry CSVs."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = {
        "summary": os.path.join(outdir, "summary.json"),
        "steps": os.path.join(outdir, "steps.csv"),
        "curve": os.path.join(outdir, "cumulative_mse.csv"),
        "telemetry": os.path.join(outdir, "eigen_telemetry.csv"),
    }
    write_step_csv(report, paths["steps"])
    write_curve_csv(report, paths["curve"])
    write_telemetry_csv(report, paths["telemetry"])
    write_summary_json(report, paths["summary"], telemetry_path=paths["telemetry"])
    return paths


def write_summary_json(report: EvalReport, path, telemetry_path=None) -> None:
    rec = {
        "method": report.method,
        "config": report.config,
        "mse": report.mse,
        "mae": report.mae,
        "per_horizon": report.per_horizon,
        "total_sample_exposures": report.total_sample_exposures,
        "n_slides": report.n_slides,
        "refresh_events": report.refresh_events,
        "reinit_events": report.reinit_events,
        "lift_columns": report.lift_columns,
        "wall_time_s": report.wall_time_s,
        "eigen_telemetry": str(telemetry_path) if telemetry_path else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, indent=2)
        fh.write("\n")


def load_summary_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_step_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "horizon", "feature", "prediction", "truth",
                         "sq_err", "abs_err"])
        for rec in report.records:
            p, H = rec.predictions.shape
            for h in range(H):
                for j in range(p):
                    pred = float(rec.predictions[j, h])
                    truth = float(rec.truths[j, h])
                    if np.isnan(truth):
                        writer.writerow([rec.step, h + 1, j, repr(pred), "", "", ""])
                    else:
                        writer.writerow([rec.step, h + 1, j, repr(pred), repr(truth),
                                         repr((pred - truth) ** 2),
                                         repr(abs(pred - truth))])


def load_step_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "step": int(rec["step"]),
                "horizon": int(rec["horizon"]),
                "feature": int(rec["feature"]),
                "prediction": float(rec["prediction"]),
                "truth": float(rec["truth"]) if rec["truth"] else None,
                "sq_err": float(rec["sq_err"]) if rec["sq_err"] else None,
                "abs_err": float(rec["abs_err"]) if rec["abs_err"] else None,
            })
    return rows


def write_curve_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "cumulative_mse"])
        for rec, value in zip(report.records, report.cumulative_mse_curve):
            writer.writerow([rec.step, repr(float(value))])


def load_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    steps, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            steps.append(int(rec["step"]))
            values.append(float(rec["cumulative_mse"]))
    return np.array(steps), np.array(values)


def write_telemetry_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "spectral_radius", "eig_condition", "moduli"])
        for rec in report.records:
            moduli = ";".join(repr(float(v)) for v in rec.eig_moduli)
            writer.writerow([rec.step, repr(rec.spectral_radius),
                             repr(rec.eig_condition), moduli])


def load_telemetry_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            moduli = [float(v) for v in rec["moduli"].split(";") if v]
            rows.append({
                "step": int(rec["step"]),
                "spectral_radius": float(rec["spectral_radius"]),
                "eig_condition": float(rec["eig_condition"]),
                "moduli": moduli,
            })
    return rows
