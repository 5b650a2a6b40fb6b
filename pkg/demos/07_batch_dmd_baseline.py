"""Kernel-lifted online updates vs the linear batch DMD baseline.

Three stream types separate the methods:

* rotation orbit: linear delay dynamics, both methods are essentially exact;
* noisy product-modulated tones: products of sines are sums of sines, so a
  rank-limited linear model is the right fit and the kernel method matches it;
* logistic map: the one-step map is a parabola, which no linear delay model
  can represent over the attractor, and the lift is what makes it learnable.
"""

import numpy as np

from okdmd import (BatchDmdConfig, RawSeries, RunConfig, SyntheticSpec,
                   gen_synthetic, run_batch_dmd, run_online)

phi = np.pi / 8
rotation = gen_synthetic(SyntheticSpec(
    "linear_system", 2, 600,
    {"matrix": [[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]],
     "x0": [1.0, 0.0]}))

rng = np.random.Generator(np.random.PCG64(5))
t = np.arange(900, dtype=float)
product = RawSeries((np.sin(2 * np.pi * t / 16) * np.sin(2 * np.pi * t / 37)
                     + 0.1 * rng.standard_normal(900))[None, :])

x = np.empty(900)
x[0] = 0.41
for k in range(899):
    x[k + 1] = 3.9 * x[k] * (1.0 - x[k])
logistic = RawSeries(x[None, :])

cases = [
    ("rotation", rotation,
     RunConfig(w=40, d=8, s=256, gamma=0.03, H=1),
     BatchDmdConfig(w=40, d=8, H=1)),
    ("noisy tones", product,
     RunConfig(w=60, d=12, s=256, gamma=1e-3, r_requested=8, H=1),
     BatchDmdConfig(w=60, d=12, r=8, H=1)),
    ("logistic", logistic,
     RunConfig(w=60, d=4, s=512, gamma=1.0, r_requested=24, H=1),
     BatchDmdConfig(w=60, d=4, H=1)),
]

print(f"{'stream':<12} {'method':<8} {'H=1 MSE':>10} {'exposures':>10}")
for name, series, kernel_cfg, batch_cfg in cases:
    kernel = run_online(series, kernel_cfg)
    batch = run_batch_dmd(series, batch_cfg)
    print(f"{name:<12} {'kernel':<8} {kernel.mse:>10.2e} "
          f"{kernel.total_sample_exposures:>10}")
    print(f"{name:<12} {'batch':<8} {batch.mse:>10.2e} "
          f"{batch.total_sample_exposures:>10}")

print("\nkernel exposures stay single-pass (w + slides); the batch baseline")
print("re-reads its whole window every refit, which the accounting shows.")
