"""Online kernel DMD forecasting for streaming multivariate time series.

The library maintains a linear operator over random-Fourier-feature lifts of
block-Hankel delay embeddings, updated in O(s^2) per step by rank-2
Sherman-Morrison corrections on a rolling window, and forecasts by
eigendecomposition in a POD-compressed basis followed by least-squares
decoding back to physical coordinates. A pipeline module reproduces the
warm-up/online evaluation protocol with MSE/MAE reporting, cumulative-error
curves, and single-pass sample-exposure accounting.
"""

from .baseline import BatchDmdConfig, run_batch_dmd, run_batch_dmd_segments
from .embed import (HankelBlock, SnapshotPair, WindowMatrix, hankel_block,
                    hankel_univariate, new_hankel_column, snapshot_pair,
                    window_at)
from .forecast import (BatchDmdFit, Decoder, FeatureForecast, PhysicalForecast,
                       PodBasis, ReducedEig, amplitudes, decode, dmd_fit,
                       dmd_forecast, eig_reduced, extract_physical, fit_decoder,
                       forecast_h, pod_basis, predict_features, reduce_operator,
                       vandermonde)
from .ingest import (NormalizationStats, RawSeries, SyntheticSpec,
                     apply_normalizer, fit_normalizer, gen_synthetic,
                     invert_normalizer, load_csv, split_warmup)
from .operator import (GammaMatrix, KdmdState, ReinitRequired, SingularUpdate,
                       UpdatePair, batch_oracle, build_update,
                       check_window_integrity, gamma_matrix, init_batch,
                       load_state, rebuild_state, save_state, slide,
                       spectral_norm_symmetric)
from .pipeline import (EvalReport, RunConfig, StepRecord, cumulative_error,
                       exposure_count, mae, mse, run_online,
                       run_online_segments, write_artifacts)
from .rff import (RffMap, kernel_exact, lift, lift_matrix, load_map_json,
                  map_from_json, map_to_json, sample_map, save_map_json)
from .tune import (SearchSpace, SweepSpec, default_search_space, random_search,
                   rolling_cv_split, sensitivity_sweep)

__version__ = "0.1.0"
