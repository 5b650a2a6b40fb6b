"""Hyperparameter machinery: rolling CV folds, random search, a bandwidth sweep.

Everything runs on a short synthetic stream so the demo finishes in seconds;
the same calls drive full benchmark tuning.
"""

from okdmd import (RunConfig, SearchSpace, SweepSpec, SyntheticSpec,
                   gen_synthetic, random_search, rolling_cv_split, run_online,
                   sensitivity_sweep, split_warmup)

spec = SyntheticSpec("sinusoid_mix", 1, 1200,
                     {"frequencies": [1 / 24, 1 / 60], "amplitudes": [1.0, 0.5]},
                     noise_std=0.05, seed=0)
series = gen_synthetic(spec)
warm, _ = split_warmup(series, 0.25)
print(f"warm-up: {warm.T} steps (tuning never sees the online phase)\n")

print("rolling CV folds (expanding origin, no future leakage):")
for i, (train, val) in enumerate(rolling_cv_split(warm, 3), start=1):
    print(f"  fold {i}: train 0..{train.T - 1}, validate {train.T}..{train.T + val.T - 1}")

base = RunConfig(w=60, d=12, s=128, gamma=1e-3, H=1, seed=0)
space = SearchSpace(base=base, d_choices=(6, 12, 24), r_choices=(16, 32),
                    s_choices=(64, 128), gamma_bounds=(1e-5, 1e-2),
                    w_choices=(40, 60), budget=8, folds=3, seed=0)
best, table = random_search(warm, space)

print("\nrandom search over 8 configurations (mean validation MSE):")
for row in sorted(table, key=lambda r: (r["status"] != "ok", r["mean_mse"])):
    status = "" if row["status"] == "ok" else f"  [{row['status']}]"
    print(f"  w={row['w']:>3} d={row['d']:>3} s={row['s']:>4} "
          f"gamma={row['gamma']:.2e} r={row['r']:>3} -> "
          f"{row['mean_mse']:.3e}{status}")
print(f"winner: w={best.w}, d={best.d}, s={best.s}, gamma={best.gamma:.2e}, "
      f"r={best.r_requested}")

print("\nbandwidth sweep at the winning config (one parameter varies per cell):")
sweep = SweepSpec("gamma", [1e-6, 1e-5, 1e-4, 1e-3, 1e-2], baseline=best,
                  horizons=(1, 8))
for row in sensitivity_sweep(series, sweep):
    print(f"  gamma={row['value']:.0e} H={row['H']}: MSE {row['mse']:.3e}")

online_mse = run_online(series, best).mse
print(f"\nwinning config on the held-out online phase: MSE {online_mse:.3e}")
