import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okdmd import (NormalizationStats, RawSeries, SyntheticSpec,
                   apply_normalizer, fit_normalizer, gen_synthetic,
                   invert_normalizer, load_csv, split_warmup)
from okdmd.ingest import STD_FLOOR

from conftest import rotation_matrix


# ---------------------------------------------------------------------------
# load_csv
# ---------------------------------------------------------------------------

def test_load_csv_column_major(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("a,b\n1,2\n3,4\n5,6\n")
    series = load_csv(path)
    assert series.p == 2 and series.T == 3
    np.testing.assert_array_equal(series.values, [[1, 3, 5], [2, 4, 6]])
    assert series.feature_names == ["a", "b"]


def test_load_csv_seven_features_with_date_column(tmp_path):
    # same shape as the hourly transformer benchmark: date + 7 features
    header = "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT"
    lines = [header]
    for i in range(5):
        lines.append(f"2016-07-01 {i:02d}:00:00," + ",".join(str(i + j) for j in range(7)))
    path = tmp_path / "ett_like.csv"
    path.write_text("\n".join(lines) + "\n")
    series = load_csv(path, has_timestamp_column=True)
    assert series.p == 7 and series.T == 5
    assert series.feature_names[-1] == "OT"
    assert np.all(np.diff(series.timestamps) > 0)


def test_load_csv_integer_timestamps(tmp_path):
    path = tmp_path / "idx.csv"
    path.write_text("t,x\n0,1.5\n1,2.5\n2,3.5\n")
    series = load_csv(path, has_timestamp_column=True)
    np.testing.assert_array_equal(series.timestamps, [0, 1, 2])


def test_load_csv_non_numeric_cell_names_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3,oops\n")
    with pytest.raises(ValueError, match=r"row 3.*'b'"):
        load_csv(path)


def test_load_csv_missing_cell_rejected(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("a,b\n1,2\n3,\n")
    with pytest.raises(ValueError, match="missing value"):
        load_csv(path)


def test_load_csv_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_csv(path)


def test_load_csv_header_only(tmp_path):
    path = tmp_path / "header.csv"
    path.write_text("a,b\n")
    with pytest.raises(ValueError, match="no data rows"):
        load_csv(path)


def test_load_csv_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("a,b\n1,2\n3\n")
    with pytest.raises(ValueError, match="row 3"):
        load_csv(path)


# ---------------------------------------------------------------------------
# split_warmup
# ---------------------------------------------------------------------------

def test_split_warmup_quarter():
    series = RawSeries(np.arange(100, dtype=float)[None, :])
    warm, online = split_warmup(series, 0.25)
    assert warm.T == 25 and online.T == 75


def test_split_warmup_floor_rule():
    series = RawSeries(np.arange(4, dtype=float)[None, :])
    warm, online = split_warmup(series, 0.25)
    assert warm.T == 1 and online.T == 3


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
def test_split_warmup_rejects_bad_ratio(ratio):
    series = RawSeries(np.arange(10, dtype=float)[None, :])
    with pytest.raises(ValueError):
        split_warmup(series, ratio)


@given(T=st.integers(min_value=2, max_value=200),
       ratio=st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=60, deadline=None)
def test_split_warmup_concat_lossless(T, ratio):
    values = np.random.default_rng(T).standard_normal((2, T))
    series = RawSeries(values)
    try:
        warm, online = split_warmup(series, ratio)
    except ValueError:
        n = int(np.floor(ratio * T))
        assert n < 1 or n >= T
        return
    joined = np.hstack([warm.values, online.values])
    assert np.array_equal(joined, series.values)  # bit-equal


# ---------------------------------------------------------------------------
# normalizer
# ---------------------------------------------------------------------------

def test_fit_normalizer_two_point():
    stats = fit_normalizer(RawSeries(np.array([[0.0, 2.0]])))
    assert stats.mean[0] == 1.0 and stats.std[0] == 1.0


def test_fit_normalizer_constant_feature_floored():
    stats = fit_normalizer(RawSeries(np.array([[5.0, 5.0, 5.0]])))
    assert stats.mean[0] == 5.0 and stats.std[0] == STD_FLOOR


def test_fit_normalizer_needs_two_steps():
    with pytest.raises(ValueError):
        fit_normalizer(RawSeries(np.array([[1.0]])))


def test_fit_normalizer_matches_two_pass(rng):
    values = rng.standard_normal((4, 173))
    stats = fit_normalizer(RawSeries(values))
    mean_ref = np.array([sum(row) / len(row) for row in values])
    std_ref = np.array([np.sqrt(sum((x - m) ** 2 for x in row) / len(row))
                        for row, m in zip(values, mean_ref)])
    np.testing.assert_allclose(stats.mean, mean_ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(stats.std, std_ref, rtol=1e-12, atol=1e-12)


def test_apply_normalizer_example():
    stats = NormalizationStats(mean=[1.0], std=[2.0])
    z = apply_normalizer(stats, RawSeries(np.array([[3.0]])))
    assert z.values[0, 0] == 1.0


def test_apply_normalizer_dimension_mismatch():
    stats = NormalizationStats(mean=[0.0, 0.0], std=[1.0, 1.0])
    with pytest.raises(ValueError):
        apply_normalizer(stats, RawSeries(np.ones((3, 4))))


def test_floored_std_gives_finite_z():
    stats = NormalizationStats(mean=[5.0], std=[STD_FLOOR])
    z = apply_normalizer(stats, RawSeries(np.array([[6.0]])))
    assert np.isfinite(z.values[0, 0]) and z.values[0, 0] == pytest.approx(1e8)


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=2, max_size=40))
@settings(max_examples=80, deadline=None)
def test_normalizer_round_trip_identity(samples):
    series = RawSeries(np.array(samples)[None, :])
    stats = fit_normalizer(series)
    back = invert_normalizer(stats, apply_normalizer(stats, series))
    # 1e-12 relative to the feature scale: centering bounds absolute error
    # by eps * |mean| even in exact round-trip algebra
    scale = max(1.0, float(np.max(np.abs(series.values))))
    np.testing.assert_allclose(back.values, series.values,
                               rtol=1e-12, atol=1e-12 * scale)


# ---------------------------------------------------------------------------
# gen_synthetic
# ---------------------------------------------------------------------------

def test_sinusoid_closed_form():
    spec = SyntheticSpec("sinusoid_mix", 1, 48,
                         {"frequencies": [1.0 / 24.0], "amplitudes": [1.0]})
    series = gen_synthetic(spec)
    t = np.arange(48)
    np.testing.assert_allclose(series.values[0], np.sin(2 * np.pi * t / 24),
                               atol=1e-12)
    assert np.max(np.abs(series.values)) <= 1.0 + 1e-12
    np.testing.assert_allclose(series.values[0, :24], series.values[0, 24:],
                               atol=1e-9)  # period 24


def test_linear_identity_is_constant():
    spec = SyntheticSpec("linear_system", 2, 10,
                         {"matrix": np.eye(2), "x0": [1.0, 1.0]})
    series = gen_synthetic(spec)
    assert np.all(series.values == 1.0)


def test_rotation_orbit_closed_form():
    phi = np.pi / 8
    spec = SyntheticSpec("linear_system", 2, 32,
                         {"matrix": rotation_matrix(phi), "x0": [1.0, 0.0]})
    series = gen_synthetic(spec)
    t = np.arange(32)
    # independent closed form of the orbit
    np.testing.assert_allclose(series.values[0], np.cos(t * phi), atol=1e-12)
    np.testing.assert_allclose(series.values[1], np.sin(t * phi), atol=1e-12)


def test_unstable_linear_system_rejected():
    spec = SyntheticSpec("linear_system", 1, 10, {"matrix": [[1.2]], "x0": [1.0]})
    with pytest.raises(ValueError, match="spectral radius"):
        gen_synthetic(spec)


def test_gen_synthetic_deterministic():
    spec = SyntheticSpec("sinusoid_mix", 2, 64,
                         {"frequencies": [0.05, 0.11], "amplitudes": [1.0, 0.3]},
                         noise_std=0.2, seed=42)
    a = gen_synthetic(spec)
    b = gen_synthetic(spec)
    assert np.array_equal(a.values, b.values)


def test_regime_shift_splices_at_shift_time():
    before = {"kind": "sinusoid_mix",
              "params": {"frequencies": [0.1], "amplitudes": [1.0]}}
    after = {"kind": "sinusoid_mix",
             "params": {"frequencies": [0.1], "amplitudes": [1.0], "offset": 5.0}}
    spec = SyntheticSpec("regime_shift", 1, 40,
                         {"shift_time": 20, "before": before, "after": after})
    series = gen_synthetic(spec)
    t = np.arange(40)
    base = np.sin(2 * np.pi * 0.1 * t)
    np.testing.assert_allclose(series.values[0, :20], base[:20], atol=1e-12)
    np.testing.assert_allclose(series.values[0, 20:], base[20:] + 5.0, atol=1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown synthetic kind"):
        SyntheticSpec("brownian", 1, 10, {})


def test_timestamps_must_increase():
    with pytest.raises(ValueError, match="strictly increasing"):
        RawSeries(np.ones((1, 3)), timestamps=[0.0, 2.0, 2.0])
