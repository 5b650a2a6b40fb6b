import numpy as np
import pytest

from okdmd import RawSeries, SyntheticSpec, gen_synthetic


def rotation_matrix(phi: float) -> np.ndarray:
    return np.array([[np.cos(phi), -np.sin(phi)],
                     [np.sin(phi), np.cos(phi)]])


def rotation_series(phi: float, T: int) -> RawSeries:
    """Noiseless 2-D rotation orbit starting at [1, 0]."""
    spec = SyntheticSpec("linear_system", 2, T,
                         {"matrix": rotation_matrix(phi), "x0": [1.0, 0.0]})
    return gen_synthetic(spec)


def two_tone_series(p: int, T: int, noise_std: float = 0.0,
                    seed: int = 0) -> RawSeries:
    """Sum of two incommensurate-phase sinusoids per feature."""
    spec = SyntheticSpec(
        "sinusoid_mix", p, T,
        {"frequencies": [1.0 / 16.0, 1.0 / 37.0],
         "amplitudes": [1.0, 0.6],
         "phases": [[0.4 * j, 0.9 * j + 0.1] for j in range(p)]},
        noise_std=noise_std, seed=seed,
    )
    return gen_synthetic(spec)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240819))
