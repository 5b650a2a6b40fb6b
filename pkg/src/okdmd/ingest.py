"""Loading, splitting, normalization, and synthetic generation of multivariate series.

Series are stored feature-major: ``values[j, t]`` is feature ``j`` at time step
``t``. Normalization statistics are always estimated on the warm-up segment and
then applied to the whole stream, so the online portion is z-scored with
quantities that were available before it arrived.
"""

import csv
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

__all__ = [
    "STD_FLOOR",
    "RawSeries",
    "NormalizationStats",
    "SyntheticSpec",
    "load_csv",
    "split_warmup",
    "fit_normalizer",
    "apply_normalizer",
    "invert_normalizer",
    "gen_synthetic",
]

# Lower bound on a per-feature standard deviation. Constant features would
# otherwise make the z-score blow up.
STD_FLOOR = 1e-8

_SYNTH_KINDS = ("sinusoid_mix", "linear_system", "regime_shift")


@dataclass
class RawSeries:
    """A p-variate series of T time steps.

    Attributes
    ----------
    values : np.ndarray
        Shape (p, T), feature-major, no missing entries.
    timestamps : np.ndarray or None
        Optional strictly increasing times of length T (seconds or plain index).
    feature_names : list of str or None
        Optional labels, one per feature.
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D (features x time) array")
        p, T = self.values.shape
        if p < 1 or T < 1:
            raise ValueError(f"series needs p >= 1 and T >= 1, got {p} x {T}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=float)
            if self.timestamps.shape != (T,):
                raise ValueError(
                    f"timestamps length {self.timestamps.size} does not match T={T}"
                )
            if T > 1 and not np.all(np.diff(self.timestamps) > 0):
                raise ValueError("timestamps must be strictly increasing")
        if self.feature_names is not None and len(self.feature_names) != p:
            raise ValueError(
                f"feature_names length {len(self.feature_names)} does not match p={p}"
            )

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def slice_time(self, start: int, stop: int) -> "RawSeries":
        """Copy of the series restricted to time steps [start, stop)."""
        ts = None if self.timestamps is None else self.timestamps[start:stop].copy()
        return RawSeries(self.values[:, start:stop].copy(), ts, self.feature_names)


@dataclass
class NormalizationStats:
    """Per-feature mean and floored population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).ravel()
        self.std = np.asarray(self.std, dtype=float).ravel()
        if self.mean.shape != self.std.shape:
            raise ValueError("mean and std must have the same length")
        if np.any(self.std < STD_FLOOR):
            raise ValueError(f"std entries must be >= {STD_FLOOR}")

    @property
    def p(self) -> int:
        return self.mean.size


@dataclass
class SyntheticSpec:
    """Recipe for a deterministic synthetic stream.

    ``kind`` selects the generator:

    * ``sinusoid_mix``: per feature, ``offset + sum_k a_k sin(2 pi f_k t + phi_k)``
      with ``params`` keys ``frequencies``, ``amplitudes`` and optional
      ``phases`` / ``offset``. Lists of lists give per-feature components;
      flat lists are shared by all features.
    * ``linear_system``: iterates ``x_{t+1} = M x_t`` with ``params`` keys
      ``matrix`` (p x p) and ``x0``.
    * ``regime_shift``: splices two sub-generators at ``params['shift_time']``;
      ``params['before']`` / ``params['after']`` each hold ``kind`` and
      ``params`` for the two regimes, evaluated on the global time index.

    Gaussian observation noise of scale ``noise_std`` is added last, drawn from
    a PCG64 generator seeded with ``seed``.
    """

    kind: str
    p: int
    T: int
    params: dict
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _SYNTH_KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}; expected one of {_SYNTH_KINDS}")
        if self.p < 1 or self.T < 1:
            raise ValueError("synthetic spec needs p >= 1 and T >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


def load_csv(path, has_timestamp_column: bool = False) -> RawSeries:
    """Load a comma-separated file with one header row into a RawSeries.

    Rows are time steps in ascending order; columns are features, optionally
    preceded by a timestamp column (ISO-8601 or numeric). Any missing or
    non-numeric cell is rejected with its row/column location; no imputation
    is attempted.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header:
            raise ValueError(f"{path}: empty header row")
        rows: list[list[float]] = []
        stamps: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # blank line (e.g. trailing newline)
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            start_col = 0
            if has_timestamp_column:
                stamps.append(_parse_timestamp(row[0], path, lineno))
                start_col = 1
            vals = []
            for ci in range(start_col, len(row)):
                cell = row[ci].strip()
                if cell == "":
                    raise ValueError(
                        f"{path}: missing value at row {lineno}, column {header[ci]!r}"
                    )
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, "
                        f"column {header[ci]!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    values = np.array(rows, dtype=float).T  # (p, T)
    names = header[1:] if has_timestamp_column else header
    timestamps = np.array(stamps, dtype=float) if has_timestamp_column else None
    return RawSeries(values, timestamps, names)


def _parse_timestamp(cell: str, path, lineno: int) -> float:
    c = cell.strip()
    try:
        return float(c)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(c).timestamp()
    except ValueError:
        raise ValueError(f"{path}: unparseable timestamp {cell!r} at row {lineno}") from None


def split_warmup(series: RawSeries, ratio: float) -> tuple[RawSeries, RawSeries]:
    """Split a series into (warm-up, online) with floor(ratio * T) warm-up steps."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"warm-up ratio must lie strictly in (0, 1), got {ratio}")
    n = math.floor(ratio * series.T)
    if n < 1 or n >= series.T:
        raise ValueError(f"ratio {ratio} leaves an empty split for T={series.T}")
    return series.slice_time(0, n), series.slice_time(n, series.T)


def fit_normalizer(warmup: RawSeries) -> NormalizationStats:
    """Per-feature mean and population standard deviation of the warm-up segment.

    Standard deviations are clamped below by ``STD_FLOOR`` so constant features
    stay invertible.
    """
    if warmup.T < 2:
        raise ValueError(f"need at least 2 warm-up steps to fit a normalizer, got {warmup.T}")
    mean = warmup.values.mean(axis=1)
    std = np.maximum(warmup.values.std(axis=1), STD_FLOOR)
    return NormalizationStats(mean, std)


def apply_normalizer(stats: NormalizationStats, series: RawSeries) -> RawSeries:
    """z-score a series with the given statistics."""
    if stats.p != series.p:
        raise ValueError(f"normalizer has p={stats.p} but series has p={series.p}")
    z = (series.values - stats.mean[:, None]) / stats.std[:, None]
    return RawSeries(z, None if series.timestamps is None else series.timestamps.copy(),
                     series.feature_names)


def invert_normalizer(stats: NormalizationStats, series: RawSeries) -> RawSeries:
    """Undo :func:`apply_normalizer`."""
    if stats.p != series.p:
        raise ValueError(f"normalizer has p={stats.p} but series has p={series.p}")
    x = series.values * stats.std[:, None] + stats.mean[:, None]
    return RawSeries(x, None if series.timestamps is None else series.timestamps.copy(),
                     series.feature_names)


def gen_synthetic(spec: SyntheticSpec) -> RawSeries:
    """Generate a deterministic synthetic stream from a spec (see SyntheticSpec)."""
    clean = _gen_clean(spec.kind, spec.p, spec.T, spec.params)
    if spec.noise_std > 0.0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        clean = clean + spec.noise_std * rng.standard_normal(clean.shape)
    return RawSeries(clean)


def _gen_clean(kind: str, p: int, T: int, params: dict) -> np.ndarray:
    if kind == "sinusoid_mix":
        return _gen_sinusoid(p, T, params)
    if kind == "linear_system":
        return _gen_linear(p, T, params)
    if kind == "regime_shift":
        return _gen_regime_shift(p, T, params)
    raise ValueError(f"unknown synthetic kind {kind!r}")


def _per_feature(value, p: int, name: str) -> list[list[float]]:
    """Normalize a component list (shared) or list-of-lists (per feature)."""
    seq = list(value)
    if seq and isinstance(seq[0], (list, tuple, np.ndarray)):
        if len(seq) != p:
            raise ValueError(f"per-feature {name} needs {p} entries, got {len(seq)}")
        return [list(map(float, s)) for s in seq]
    shared = list(map(float, seq))
    return [shared for _ in range(p)]


def _gen_sinusoid(p: int, T: int, params: dict) -> np.ndarray:
    freqs = _per_feature(params["frequencies"], p, "frequencies")
    amps = _per_feature(params["amplitudes"], p, "amplitudes")
    phases = (_per_feature(params["phases"], p, "phases")
              if "phases" in params else [[0.0] * len(f) for f in freqs])
    offset = params.get("offset", 0.0)
    offsets = (list(map(float, offset)) if isinstance(offset, (list, tuple, np.ndarray))
               else [float(offset)] * p)
    if len(offsets) != p:
        raise ValueError(f"offset needs {p} entries, got {len(offsets)}")
    t = np.arange(T, dtype=float)
    out = np.empty((p, T))
    for j in range(p):
        if not len(freqs[j]) == len(amps[j]) == len(phases[j]):
            raise ValueError("frequencies, amplitudes and phases must have equal lengths")
        acc = np.full(T, offsets[j])
        for f, a, ph in zip(freqs[j], amps[j], phases[j]):
            acc = acc + a * np.sin(2.0 * np.pi * f * t + ph)
        out[j] = acc
    return out


def _gen_linear(p: int, T: int, params: dict) -> np.ndarray:
    M = np.asarray(params["matrix"], dtype=float)
    if M.shape != (p, p):
        raise ValueError(f"linear_system matrix must be {p} x {p}, got {M.shape}")
    x0 = np.asarray(params["x0"], dtype=float).ravel()
    if x0.size != p:
        raise ValueError(f"x0 must have length {p}, got {x0.size}")
    radius = float(np.max(np.abs(np.linalg.eigvals(M))))
    if radius > 1.05:
        raise ValueError(f"unstable linear system: spectral radius {radius:.4f} > 1.05")
    out = np.empty((p, T))
    x = x0
    for t in range(T):
        out[:, t] = x
        x = M @ x
    return out


def _gen_regime_shift(p: int, T: int, params: dict) -> np.ndarray:
    shift = int(params["shift_time"])
    if not 0 < shift < T:
        raise ValueError(f"shift_time must lie strictly inside (0, {T}), got {shift}")
    before = params["before"]
    after = params["after"]
    out = _gen_clean(before["kind"], p, T, before.get("params", {}))
    post = _gen_clean(after["kind"], p, T, after.get("params", {}))
    out = out.copy()
    out[:, shift:] = post[:, shift:]
    return out
