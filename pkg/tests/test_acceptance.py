"""Acceptance suite. Each test prints one PASS/FAIL line on completion.

Dataset-reproduction checks run only when benchmark CSVs are present (see
``_dataset_path``); everything else is self-contained and deterministic.
"""

import os
import time

import numpy as np
import pytest

from okdmd import (RawSeries, RunConfig, SyntheticSpec, batch_oracle, dmd_fit,
                   exposure_count, fit_normalizer, gen_synthetic, hankel_block,
                   init_batch, invert_normalizer, apply_normalizer, kernel_exact,
                   lift_matrix, load_csv, new_hankel_column, pod_basis,
                   eig_reduced, rolling_cv_split, run_online, sample_map, slide,
                   snapshot_pair, vandermonde, window_at)

from conftest import rotation_series


def report(n, ok, detail):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# 1. Sliding update tracks batch recomputation
# ---------------------------------------------------------------------------

def test_acceptance_1_sherman_morrison_oracle():
    p, w, d, s, gamma, n_slides = 3, 60, 10, 64, 1e-3, 200
    m = w - d
    spec = SyntheticSpec(
        "sinusoid_mix", p, w + n_slides,
        {"frequencies": [1 / 16, 1 / 37], "amplitudes": [1.0, 0.6],
         "phases": [[0.4 * j, 0.9 * j + 0.1] for j in range(p)]},
        noise_std=0.05, seed=0)
    series = gen_synthetic(spec)
    rff_map = sample_map(p * d, s, gamma, 0)
    block = hankel_block(window_at(series, w - 1, w), d)
    pair = snapshot_pair(block)
    lifted = lift_matrix(rff_map, block.data)
    state = init_batch(lifted[:, :m], lifted[:, 1:], pair, lifted[:, -1])
    eps0 = state.epsilon

    t0 = time.perf_counter()
    worst = 0.0
    for t in range(w, w + n_slides):
        state = slide(state, new_hankel_column(series, t, d), rff_map)
        relift = lift_matrix(rff_map, hankel_block(window_at(series, t, w), d).data)
        P_ref, A_ref = batch_oracle(relift[:, :m], relift[:, 1:], eps0)
        worst = max(worst,
                    np.linalg.norm(state.P - P_ref) / np.linalg.norm(P_ref),
                    np.linalg.norm(state.A - A_ref) / np.linalg.norm(A_ref))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 10.0 and state.epsilon == eps0
    report(1, ok, f"max (P, A) deviation {worst:.3e} over {n_slides} slides "
                  f"in {elapsed:.2f}s (fixed eps)")


# ---------------------------------------------------------------------------
# 2. Feature map approximates the Gaussian kernel
# ---------------------------------------------------------------------------

def test_acceptance_2_rff_kernel_approximation():
    rng = np.random.Generator(np.random.PCG64(1234))
    dim, n_pairs = 30, 1000
    X = rng.standard_normal((n_pairs, dim))
    Y = rng.standard_normal((n_pairs, dim))
    d2 = np.sum((X - Y) ** 2, axis=1)
    gamma = 4.0 / float(d2.max())  # so gamma * ||x - y||^2 <= 4 on every pair
    k_true = np.array([kernel_exact(x, y, gamma) for x, y in zip(X, Y)])

    wide = sample_map(dim, 1024, gamma, 77)
    est = np.sum(lift_matrix(wide, X.T) * lift_matrix(wide, Y.T), axis=0)
    err = np.abs(est - k_true)
    single_ok = err.mean() < 0.05 and np.percentile(err, 99) < 0.12

    acc = np.zeros(n_pairs)
    n_maps = 200
    for seed in range(n_maps):
        narrow = sample_map(dim, 64, gamma, 5000 + seed)
        acc += np.sum(lift_matrix(narrow, X.T) * lift_matrix(narrow, Y.T), axis=0)
    mean_err = float(np.abs(acc / n_maps - k_true).mean())
    avg_ok = mean_err < 0.02

    report(2, single_ok and avg_ok,
           f"s=1024: mean {err.mean():.4f} p99 {np.percentile(err, 99):.4f}; "
           f"{n_maps} maps of s=64: mean {mean_err:.4f}")


# ---------------------------------------------------------------------------
# 3. Linear-system spectrum recovery
# ---------------------------------------------------------------------------

def test_acceptance_3_rotation_spectrum_and_pipeline():
    phi = np.pi / 8
    series = rotation_series(phi, 800)

    X, Y = series.values[:, :40], series.values[:, 1:41]
    fit = dmd_fit(X, Y, r=2)
    targets = np.sort_complex(np.array([np.exp(1j * phi), np.exp(-1j * phi)]))
    eig_err = float(np.max(np.abs(np.sort_complex(fit.eigenvalues) - targets)))

    config = RunConfig(w=40, d=8, s=256, gamma=0.03, H=1, seed=0)
    rep = run_online(series, config)
    rad_dev = float(max(abs(r.spectral_radius - 1.0) for r in rep.records))

    ok = eig_err < 1e-6 and rad_dev < 1e-3 and rep.mse < 1e-4
    report(3, ok, f"batch eig err {eig_err:.2e}; pipeline |rho - 1| max "
                  f"{rad_dev:.2e}, H=1 MSE {rep.mse:.2e}")


# ---------------------------------------------------------------------------
# 4. Noiseless two-tone stream end to end, with fixed per-slide cost
# ---------------------------------------------------------------------------

def test_acceptance_4_two_tone_end_to_end():
    spec = SyntheticSpec("sinusoid_mix", 1, 2000,
                         {"frequencies": [1 / 24, 1 / 60],
                          "amplitudes": [1.0, 0.5]})
    series = gen_synthetic(spec)
    rep1 = run_online(series, RunConfig(w=120, d=30, s=256, gamma=1e-4, H=1))
    rep24 = run_online(series, RunConfig(w=120, d=30, s=256, gamma=1e-4, H=24))

    # Fixed-cost check: per-decile minimum filters one-sided scheduler noise
    # while still growing if the algorithm's per-slide cost grew with t.
    t = rep1.per_step_seconds[10:]
    dec = len(t) // 10
    mins = [float(np.min(t[i * dec:(i + 1) * dec])) for i in range(10)]
    time_ratio = max(mins) / min(mins)

    ok = rep1.mse < 1e-3 and rep24.mse < 1e-2 and time_ratio < 2.0
    report(4, ok, f"H=1 MSE {rep1.mse:.2e} (< 1e-3), H=24 MSE {rep24.mse:.2e} "
                  f"(< 1e-2), per-slide cost ratio {time_ratio:.2f} (< 2)")


# ---------------------------------------------------------------------------
# 5. Single-pass exposure accounting
# ---------------------------------------------------------------------------

def test_acceptance_5_exposure_accounting():
    exposures = exposure_count(60, 100)
    ratio = 5940 / exposures  # competing trainer total quoted for this setup
    ratio_3sf = float(f"{ratio:.3g}")
    ok = exposures == 160 and ratio_3sf == 37.1
    report(5, ok, f"60 + 100 -> {exposures} exposures; ratio {ratio_3sf}x")


# ---------------------------------------------------------------------------
# 6. Benchmark dataset reproduction (requires local CSVs)
# ---------------------------------------------------------------------------

def _dataset_path(name: str):
    root = os.environ.get("OKDMD_DATA_DIR", os.path.join(os.path.dirname(__file__),
                                                         "..", "data"))
    path = os.path.join(root, name)
    return path if os.path.exists(path) else None


@pytest.mark.parametrize("name,s,H,bound", [
    ("ETTh2.csv", 1024, 1, 0.35),
    ("ETTh2.csv", 1024, 24, 0.58),
    ("WTH.csv", 512, 1, 0.18),
])
def test_acceptance_6_dataset_reproduction(name, s, H, bound):
    path = _dataset_path(name)
    if path is None:
        print(f"ACCEPTANCE 6: SKIP - {name} not present (set OKDMD_DATA_DIR)")
        pytest.skip(f"benchmark dataset {name} not available")
    series = load_csv(path, has_timestamp_column=True)
    config = RunConfig(w=120, d=30, s=s, gamma=1e-4, H=H, seed=0)
    rep = run_online(series, config)
    ok = rep.mse <= bound
    report(6, ok, f"{name} H={H}: MSE {rep.mse:.3f} (bound {bound})")


# ---------------------------------------------------------------------------
# 7. Regime-shift adaptation
# ---------------------------------------------------------------------------

def test_acceptance_7_regime_shift_recovery():
    T, w, shift = 1200, 60, 750
    base = {"kind": "sinusoid_mix",
            "params": {"frequencies": [1 / 24], "amplitudes": [1.0]}}
    moved = {"kind": "sinusoid_mix",
             "params": {"frequencies": [1 / 24], "amplitudes": [1.0],
                        "offset": 5.0}}
    spec = SyntheticSpec("regime_shift", 1, T,
                         {"shift_time": shift, "before": base, "after": moved})
    series = gen_synthetic(spec)
    rep = run_online(series, RunConfig(w=w, d=12, s=128, gamma=1e-3, H=1))

    curve = rep.cumulative_mse_curve
    T_w = 300  # floor(0.25 * 1200)
    k_shift = shift - T_w  # first record whose truth lies past the shift
    spike_slope = (curve[k_shift + w] - curve[k_shift]) / w
    recovery_slope = (curve[k_shift + 3 * w] - curve[k_shift + 2 * w]) / w
    ok = spike_slope > 0 and recovery_slope < 0.1 * spike_slope
    report(7, ok, f"spike slope {spike_slope:.3e}, slope after 2w steps "
                  f"{recovery_slope:.3e} (< 10% of spike)")


# ---------------------------------------------------------------------------
# 8. Invariant bundle (the full suites live in the per-module tests)
# ---------------------------------------------------------------------------

def test_acceptance_8_invariant_bundle():
    rng = np.random.Generator(np.random.PCG64(8))
    checks = {}

    # Hankel index identity, exhaustive on small sizes
    ok_h = True
    for p in range(1, 4):
        for w in range(1, 8):
            values = rng.standard_normal((p, w))
            for d in range(1, w + 1):
                block = hankel_block(window_at(RawSeries(values), w - 1, w), d)
                for j in range(p):
                    for a in range(d):
                        for i in range(w - d + 1):
                            ok_h &= block.data[j * d + a, i] == values[j, i + a]
    checks["hankel"] = ok_h

    # normalizer round trip
    series = RawSeries(rng.standard_normal((3, 50)) * 100.0)
    stats = fit_normalizer(series)
    back = invert_normalizer(stats, apply_normalizer(stats, series))
    checks["normalizer"] = np.allclose(back.values, series.values, rtol=1e-12)

    # POD orthonormality and eigen residual
    psi = rng.standard_normal((16, 9))
    basis = pod_basis(psi)
    checks["pod"] = np.allclose(basis.Q.T @ basis.Q, np.eye(basis.r), atol=1e-10)
    K = rng.standard_normal((7, 7))
    eig = eig_reduced(K)
    resid = np.linalg.norm(K @ eig.W - eig.W @ np.diag(eig.eigenvalues))
    checks["eig"] = resid <= 1e-8 * np.linalg.norm(K)

    # Vandermonde recurrence, exact in the evaluation order used to build it
    lam = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    E = vandermonde(lam, 7, start=1)
    checks["vandermonde"] = all(
        np.array_equal(E[:, h + 1], E[:, h] * lam) for h in range(6))

    # CV folds never leak the future
    warm = RawSeries(np.arange(90, dtype=float)[None, :])
    checks["cv"] = all(tr.values[0].max() < va.values[0].min()
                       for tr, va in rolling_cv_split(warm, 3))

    # determinism under a fixed seed
    spec = SyntheticSpec("sinusoid_mix", 1, 240,
                         {"frequencies": [1 / 16], "amplitudes": [1.0]},
                         noise_std=0.1, seed=3)
    config = RunConfig(w=30, d=6, s=64, gamma=1e-3)
    a = run_online(gen_synthetic(spec), config)
    b = run_online(gen_synthetic(spec), config)
    checks["determinism"] = a.mse == b.mse and a.mae == b.mae

    failed = [name for name, good in checks.items() if not good]
    report(8, not failed, "invariants: " + (", ".join(checks) if not failed
                                            else f"failed {failed}"))
