"""Random Fourier features vs the exact Gaussian kernel.

Shows the two properties the streaming engine relies on: unbiasedness of the
inner-product estimator across maps and concentration as the feature
dimension s grows.
"""

import numpy as np

from okdmd import kernel_exact, lift, sample_map

rng = np.random.Generator(np.random.PCG64(7))
dim = 20
pairs = [(rng.standard_normal(dim), rng.standard_normal(dim)) for _ in range(300)]
gamma = 4.0 / max(float(np.sum((x - y) ** 2)) for x, y in pairs)
truth = np.array([kernel_exact(x, y, gamma) for x, y in pairs])

print(f"dim={dim}, gamma={gamma:.4f}, kernel range "
      f"[{truth.min():.3f}, {truth.max():.3f}]\n")

print("concentration: one map, growing feature dimension")
print(f"{'s':>6}  {'mean |err|':>10}  {'p99 |err|':>10}")
for s in (64, 256, 1024, 4096):
    feature_map = sample_map(dim, s, gamma, seed=1)
    est = np.array([float(lift(feature_map, x) @ lift(feature_map, y))
                    for x, y in pairs])
    err = np.abs(est - truth)
    print(f"{s:>6}  {err.mean():>10.4f}  {np.percentile(err, 99):>10.4f}")

print("\nunbiasedness: fixed s=64, averaging over independent maps")
print(f"{'maps':>6}  {'mean |avg err|':>14}")
acc = np.zeros(len(pairs))
for n, seed in enumerate(range(200), start=1):
    feature_map = sample_map(dim, 64, gamma, seed=seed)
    acc += np.array([float(lift(feature_map, x) @ lift(feature_map, y))
                     for x, y in pairs])
    if n in (1, 10, 50, 200):
        print(f"{n:>6}  {np.abs(acc / n - truth).mean():>14.5f}")
