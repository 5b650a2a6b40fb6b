"""Windowed data matrices, block-Hankel delay embeddings, and snapshot pairs.

Index conventions. Math notation here is 1-based while code is 0-based:

====================  =========================  =========================
quantity              1-based (docs)             0-based (code)
====================  =========================  =========================
window end time       t in [w, T]                t in [w-1, T-1]
Hankel row of lag a   (j-1) d + a, a in [1, d]   j d + a, a in [0, d-1]
Hankel column i       i in [1, w-d+1]            i in [0, w-d]
====================  =========================  =========================

A Hankel column with (0-based) index i holds, for each feature j, the d
consecutive samples ending at time ``end_time - (w - d) + i``; reading the
last row of feature block j across columns therefore reproduces the raw
series tail for that feature.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .ingest import RawSeries

__all__ = [
    "WindowMatrix",
    "HankelBlock",
    "SnapshotPair",
    "window_at",
    "hankel_univariate",
    "hankel_block",
    "snapshot_pair",
    "new_hankel_column",
]


@dataclass
class WindowMatrix:
    """The last w samples of a series, columns ordered oldest to newest."""

    data: np.ndarray  # (p, w)
    end_time: int     # 0-based index of the newest column

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]


@dataclass
class HankelBlock:
    """Block-Hankel embedding of a window: p stacked d-lag Hankel matrices."""

    data: np.ndarray  # (p*d, w-d+1)
    p: int
    d: int
    w: int
    end_time: int

    @property
    def n_columns(self) -> int:
        return self.data.shape[1]


@dataclass
class SnapshotPair:
    """Unshifted/shifted snapshot matrices extracted from a Hankel block.

    ``Y[:, i] == hankel column i+1``, so Y runs one step ahead of X;
    ``latest_column`` is the final Hankel column (newest state).
    """

    X: np.ndarray             # (p*d, m)
    Y: np.ndarray             # (p*d, m)
    latest_column: np.ndarray  # (p*d,)
    p: int = 0
    d: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.d <= 0:
            # Fallback for hand-built pairs: treat rows as one feature.
            self.p = 1
            self.d = self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]


def window_at(series: RawSeries, t: int, w: int) -> WindowMatrix:
    """Windowed data matrix of the w samples ending at 0-based time index t."""
    if w < 1:
        raise ValueError(f"window length must be >= 1, got {w}")
    if t < w - 1 or t >= series.T:
        raise ValueError(
            f"window end t={t} must satisfy {w - 1} <= t <= {series.T - 1}"
        )
    return WindowMatrix(series.values[:, t - w + 1 : t + 1].copy(), end_time=t)


def hankel_univariate(row, d: int) -> np.ndarray:
    """d x (w-d+1) Hankel matrix of a length-w vector: entry (a, i) = row[a + i]."""
    row = np.asarray(row, dtype=float).ravel()
    w = row.size
    if not 1 <= d <= w:
        raise ValueError(f"depth d={d} must satisfy 1 <= d <= w={w}")
    return sliding_window_view(row, w - d + 1).copy()


def hankel_block(window: WindowMatrix, d: int) -> HankelBlock:
    """Stack per-feature Hankel matrices in feature order into one block."""
    if not 1 <= d <= window.w:
        raise ValueError(f"depth d={d} must satisfy 1 <= d <= w={window.w}")
    blocks = [hankel_univariate(window.data[j], d) for j in range(window.p)]
    return HankelBlock(np.vstack(blocks), p=window.p, d=d, w=window.w,
                       end_time=window.end_time)


def snapshot_pair(h: HankelBlock) -> SnapshotPair:
    """Extract X (columns 1..m), Y (columns 2..m+1) and the newest column."""
    m = h.w - h.d
    if m < 1:
        raise ValueError(f"need w - d >= 1 snapshot pairs, got w={h.w}, d={h.d}")
    return SnapshotPair(
        X=h.data[:, :m].copy(),
        Y=h.data[:, 1 : m + 1].copy(),
        latest_column=h.data[:, m].copy(),
        p=h.p,
        d=h.d,
    )


def new_hankel_column(series: RawSeries, t: int, d: int) -> np.ndarray:
    """The length p*d Hankel column ending at 0-based time index t.

    Feature blocks are stacked in input order, each holding the d samples
    ``x_{t-d+1} .. x_t`` of that feature; this matches the last column of
    ``hankel_block(window_at(series, t, w), d)`` for any valid w.
    """
    if t < d - 1 or t >= series.T:
        raise ValueError(f"column end t={t} must satisfy {d - 1} <= t <= {series.T - 1}")
    return series.values[:, t - d + 1 : t + 1].flatten()
