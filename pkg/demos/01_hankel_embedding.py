"""Delay embedding walkthrough: windows, block-Hankel matrices, snapshot pairs.

Builds the embedding for a tiny two-feature series and prints every
intermediate object, so the index conventions are visible at a glance.
"""

import numpy as np

from okdmd import (RawSeries, hankel_block, new_hankel_column, snapshot_pair,
                   window_at)

series = RawSeries(np.array([
    [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],     # feature 0
    [10.0, 20.0, 30.0, 40.0, 50.0, 60.0]  # feature 1
]))
print(f"series: p={series.p}, T={series.T}")

w, d = 5, 2
window = window_at(series, t=series.T - 1, w=w)
print(f"\nwindow ending at t={window.end_time} (w={w}):\n{window.data}")

block = hankel_block(window, d)
print(f"\nblock-Hankel embedding ({block.data.shape[0]} x {block.data.shape[1]}, "
      f"feature blocks of {d} rows each):\n{block.data}")

pair = snapshot_pair(block)
print(f"\nsnapshot matrices (m = w - d = {pair.m}):")
print(f"X =\n{pair.X}")
print(f"Y (one step ahead) =\n{pair.Y}")
print(f"newest column: {pair.latest_column}")

# the sliding loop never rebuilds the block; it only appends this column
col = new_hankel_column(series, t=series.T - 1, d=d)
print(f"\nnew_hankel_column at t={series.T - 1}: {col}")
assert np.array_equal(col, block.data[:, -1])
print("matches the last Hankel column, as the sliding update requires")
