import numpy as np
import pytest

from okdmd import (RffMap, kernel_exact, lift, lift_matrix, map_from_json,
                   map_to_json, sample_map)
from okdmd.rff import load_map_json, save_map_json


def manual_map(frequencies, phases, gamma=1.0, cov_scale=2.0):
    freq = np.atleast_2d(np.asarray(frequencies, dtype=float))
    phases = np.asarray(phases, dtype=float).ravel()
    return RffMap(frequencies=freq, phases=phases, s=freq.shape[0], gamma=gamma,
                  seed=0, input_dim=freq.shape[1], cov_scale=cov_scale)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_map_deterministic():
    a = sample_map(6, 32, 0.5, seed=9)
    b = sample_map(6, 32, 0.5, seed=9)
    assert np.array_equal(a.frequencies, b.frequencies)
    assert np.array_equal(a.phases, b.phases)


def test_sample_map_phase_range():
    m = sample_map(3, 512, 1.0, seed=0)
    assert np.all(m.phases >= 0.0) and np.all(m.phases < 2 * np.pi)


def test_frequency_moments_match_bandwidth():
    # Monte Carlo over 1e5 draws: entries of z are N(0, 2*gamma)
    gamma = 0.7
    m = sample_map(10, 10_000, gamma, seed=3)
    z = m.frequencies.ravel()
    assert abs(z.mean()) < 3.0 * np.sqrt(2 * gamma / z.size)
    assert abs(z.var() / (2 * gamma) - 1.0) < 0.02


def test_cov_scale_switch_changes_frequency_variance():
    gamma = 0.7
    m = sample_map(10, 10_000, gamma, seed=3, cov_scale=1.0)
    assert abs(m.frequencies.var() / gamma - 1.0) < 0.02


@pytest.mark.parametrize("kwargs", [
    {"input_dim": 0, "s": 4, "gamma": 1.0, "seed": 0},
    {"input_dim": 3, "s": 0, "gamma": 1.0, "seed": 0},
    {"input_dim": 3, "s": 4, "gamma": 0.0, "seed": 0},
    {"input_dim": 3, "s": 4, "gamma": -1.0, "seed": 0},
])
def test_sample_map_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        sample_map(**kwargs)


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------

def test_lift_zero_frequency_gives_sqrt_two():
    m = manual_map([[0.0, 0.0]], [0.0])
    np.testing.assert_allclose(lift(m, [3.0, -1.0]), [np.sqrt(2.0)])


def test_lift_phase_flip():
    m = manual_map([[0.0], [0.0]], [0.0, np.pi])
    np.testing.assert_allclose(lift(m, [7.0]), [1.0, -1.0], atol=1e-15)


def test_lift_dimension_mismatch():
    m = sample_map(4, 8, 1.0, seed=0)
    with pytest.raises(ValueError):
        lift(m, [1.0, 2.0])


def test_lift_matrix_consistency(rng):
    m = sample_map(5, 16, 0.3, seed=1)
    M = rng.standard_normal((5, 7))
    cols = np.column_stack([lift(m, M[:, i]) for i in range(7)])
    np.testing.assert_allclose(lift_matrix(m, M), cols, atol=1e-15)
    assert lift_matrix(m, M).shape == (16, 7)


def test_lift_matrix_dimension_mismatch():
    m = sample_map(5, 16, 0.3, seed=1)
    with pytest.raises(ValueError):
        lift_matrix(m, np.zeros((4, 3)))


def test_lift_entries_bounded(rng):
    m = sample_map(6, 64, 2.0, seed=5)
    M = 10.0 * rng.standard_normal((6, 50))
    bound = np.sqrt(2.0 / 64)
    assert np.max(np.abs(lift_matrix(m, M))) <= bound + 1e-15


def test_self_inner_product_estimates_one(rng):
    # psi(x)^T psi(x) averaged over independent maps converges to k(x, x) = 1
    x = rng.standard_normal(6)
    vals = []
    for seed in range(200):
        m = sample_map(6, 64, 0.4, seed=seed)
        v = lift(m, x)
        vals.append(float(v @ v))
    assert abs(np.mean(vals) - 1.0) < 0.03


def test_lift_deterministic_bitwise(rng):
    x = rng.standard_normal(4)
    a = lift(sample_map(4, 32, 0.9, seed=11), x)
    b = lift(sample_map(4, 32, 0.9, seed=11), x)
    assert np.array_equal(a, b)


def test_lift_count_tracks_columns(rng):
    m = sample_map(3, 8, 1.0, seed=0)
    lift(m, np.zeros(3))
    lift_matrix(m, rng.standard_normal((3, 5)))
    assert m.lift_count == 6


# ---------------------------------------------------------------------------
# exact kernel
# ---------------------------------------------------------------------------

def test_kernel_exact_zero_distance(rng):
    x = rng.standard_normal(5)
    assert kernel_exact(x, x, 1.3) == 1.0


def test_kernel_exact_small_gamma_limit(rng):
    x, y = rng.standard_normal(5), rng.standard_normal(5)
    assert kernel_exact(x, y, 1e-300) == pytest.approx(1.0)


def test_kernel_exact_closed_form():
    assert kernel_exact([0.0], [1.0], 1.0) == pytest.approx(np.exp(-1.0))


def test_kernel_exact_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_exact([0.0], [1.0, 2.0], 1.0)


# ---------------------------------------------------------------------------
# estimator quality (smaller cousins of the acceptance checks)
# ---------------------------------------------------------------------------

def test_unbiasedness_over_maps(rng):
    x = rng.standard_normal(8)
    y = x + 0.5 * rng.standard_normal(8)
    gamma = 0.2
    target = kernel_exact(x, y, gamma)
    est = np.mean([
        float(lift(sample_map(8, 64, gamma, seed=s), x)
              @ lift(sample_map(8, 64, gamma, seed=s), y))
        for s in range(300)
    ])
    assert abs(est - target) < 0.02


def test_concentration_single_wide_map(rng):
    gamma = 0.05
    m = sample_map(10, 1024, gamma, seed=123)
    errors = []
    for _ in range(200):
        x = rng.standard_normal(10)
        y = rng.standard_normal(10)
        errors.append(abs(float(lift(m, x) @ lift(m, y)) - kernel_exact(x, y, gamma)))
    assert np.mean(np.array(errors) < 0.1) >= 0.99


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_map_json_round_trip(tmp_path):
    m = sample_map(7, 48, 3e-4, seed=21, cov_scale=1.0)
    again = map_from_json(map_to_json(m))
    assert np.array_equal(m.frequencies, again.frequencies)
    assert np.array_equal(m.phases, again.phases)
    assert again.cov_scale == 1.0

    path = tmp_path / "map.json"
    save_map_json(m, path)
    loaded = load_map_json(path)
    assert np.array_equal(m.frequencies, loaded.frequencies)
