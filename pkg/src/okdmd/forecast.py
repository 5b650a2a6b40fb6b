"""Multi-step forecasting from the current operator state.

Forecasting is three algebraic steps on top of the maintained operator A:

1. compress: project A onto the rank-r POD basis Q_r of the current lifted
   window, K = Q_r^T A Q_r;
2. propagate: eigendecompose K = W diag(lambda) W^(-1), anchor modal
   amplitudes at the newest lifted column, b0 = W^(-1) Q_r^T psi_latest, and
   advance them with eigenvalue powers E[i, h] = lambda_i^h;
3. decode: map predicted feature columns back to delay coordinates with a
   least-squares decoder D and read off the newest-lag row of each feature
   block.

Horizon convention: ``vandermonde`` defaults to exponents 0..H-1 (so its
first column is all ones and reconstructs the projected current state);
evaluation forecasts use exponents 1..H (``exponent_start=1``), so column h
is the (h+1)-step-ahead state.

The module also houses a reference batch DMD (truncated-SVD projected
operator, modes, amplitudes, eigenvalue-power forecasts) used both as a
standalone linear baseline and as an oracle for the online path.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .operator import KdmdState

__all__ = [
    "PodBasis",
    "ReducedEig",
    "FeatureForecast",
    "Decoder",
    "PhysicalForecast",
    "BatchDmdFit",
    "pod_basis",
    "reduce_operator",
    "eig_reduced",
    "amplitudes",
    "vandermonde",
    "predict_features",
    "fit_decoder",
    "decode",
    "extract_physical",
    "forecast_h",
    "dmd_fit",
    "dmd_forecast",
]

# Singular values below sigma_1 * POD_RANK_TOL do not count toward numerical rank.
POD_RANK_TOL = 1e-10
# Pseudo-inverse cutoff (relative to sigma_1) for decoder and mode fits.
PINV_RTOL = 1e-12
# Eigenvector bases with condition estimates beyond this are treated as singular.
EIG_COND_LIMIT = 1e14


@dataclass
class PodBasis:
    """Orthonormal left singular vectors of the lifted window, rank r."""

    Q: np.ndarray                 # (s, r)
    singular_values: np.ndarray   # (r,), descending
    r: int


@dataclass
class ReducedEig:
    """Eigendecomposition of the compressed operator, sorted by |lambda| desc."""

    W: np.ndarray                 # (r, r) complex eigenvectors
    eigenvalues: np.ndarray       # (r,) complex
    condition_estimate: float     # 2-norm condition of W

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues[0])) if self.eigenvalues.size else 0.0


@dataclass
class FeatureForecast:
    """Predicted lifted columns, one per horizon."""

    psi_pred: np.ndarray    # (s, H) complex
    amplitudes: np.ndarray  # (r,) complex
    powers: np.ndarray      # (r, H) eigenvalue powers
    horizon: int


@dataclass
class Decoder:
    """Least-squares map from lifted features back to delay coordinates."""

    D: np.ndarray        # (p*d, s)
    fit_residual: float  # Frobenius norm of X - D Psi_X


@dataclass
class PhysicalForecast:
    """Realized per-feature forecasts with the discarded imaginary residue."""

    values: np.ndarray        # (p, H) real
    max_imag_residue: float
    eig: ReducedEig | None = None  # telemetry reference, set by forecast_h


@dataclass
class BatchDmdFit:
    """Reference batch DMD factorization: modes, eigenvalues, amplitudes."""

    modes: np.ndarray        # (n, r) complex
    eigenvalues: np.ndarray  # (r,) complex, |lambda| descending
    amplitudes: np.ndarray   # (r,) complex
    rank: int


def pod_basis(psi_x: np.ndarray, r_requested: int | None = None) -> PodBasis:
    """Rank-r POD basis (leading left singular vectors) of the lifted window.

    The effective rank is min(r_requested, numerical rank), where the
    numerical rank counts singular values above sigma_1 * 1e-10.
    """
    psi_x = np.asarray(psi_x, dtype=float)
    if psi_x.ndim != 2 or psi_x.size == 0:
        raise ValueError("lifted window must be a non-empty 2-D matrix")
    if not np.any(psi_x):
        raise ValueError("lifted window is identically zero; no basis exists")
    U, S, _ = np.linalg.svd(psi_x, full_matrices=False)
    nrank = int(np.sum(S > S[0] * POD_RANK_TOL))
    r = nrank if r_requested is None else max(1, min(int(r_requested), nrank))
    return PodBasis(Q=U[:, :r].copy(), singular_values=S[:r].copy(), r=r)


def reduce_operator(A: np.ndarray, basis: PodBasis) -> np.ndarray:
    """Compress the full operator onto the POD subspace: K = Q^T A Q."""
    A = np.asarray(A)
    if A.shape[0] != A.shape[1] or A.shape[0] != basis.Q.shape[0]:
        raise ValueError(f"operator {A.shape} does not conform with basis {basis.Q.shape}")
    return basis.Q.T @ A @ basis.Q


def eig_reduced(K: np.ndarray) -> ReducedEig:
    """Full eigendecomposition of the (real, nonsymmetric) compressed operator.

    Eigenpairs are sorted by descending modulus for reporting; forecasting
    uses all of them, so the order never changes predictions. A badly
    conditioned eigenvector basis is flagged through ``condition_estimate``
    rather than raised here.
    """
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("compressed operator has non-finite entries")
    vals, vecs = np.linalg.eig(K)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    with np.errstate(divide="ignore", over="ignore"):
        cond = float(np.linalg.cond(vecs))
    return ReducedEig(W=vecs, eigenvalues=vals, condition_estimate=cond)


def amplitudes(eig: ReducedEig, basis: PodBasis, psi_latest) -> np.ndarray:
    """Modal amplitudes of the newest lifted column: solve W b0 = Q^T psi.

    Uses a linear solve, never an explicit inverse. Raises when the
    eigenvector basis is numerically singular, carrying the condition
    estimate in the message.
    """
    psi_latest = np.asarray(psi_latest, dtype=float).ravel()
    if psi_latest.size != basis.Q.shape[0]:
        raise ValueError(
            f"lifted column has length {psi_latest.size}, basis expects {basis.Q.shape[0]}"
        )
    if not np.isfinite(eig.condition_estimate) or eig.condition_estimate > EIG_COND_LIMIT:
        raise ValueError(
            f"eigenvector basis numerically singular (condition {eig.condition_estimate:.3e})"
        )
    rhs = (basis.Q.T @ psi_latest).astype(complex)
    try:
        return np.linalg.solve(eig.W, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            f"eigenvector solve failed (condition {eig.condition_estimate:.3e}): {exc}"
        ) from None


def vandermonde(eigenvalues, horizon: int, start: int = 0) -> np.ndarray:
    """Eigenvalue-power matrix E[i, h] = lambda_i^(start + h), h = 0..horizon-1.

    Built by the recurrence E[:, h+1] = lambda * E[:, h], so consecutive
    columns satisfy it exactly in floating point.
    """
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    E = np.empty((lam.size, horizon), dtype=complex)
    E[:, 0] = lam ** start
    for h in range(1, horizon):
        E[:, h] = E[:, h - 1] * lam
    return E


def predict_features(basis: PodBasis, eig: ReducedEig, b0: np.ndarray,
                     E: np.ndarray) -> FeatureForecast:
    """Predicted lifted trajectory: Psi_pred = Q W (b0 broadcast * E)."""
    b0 = np.asarray(b0, dtype=complex).ravel()
    E = np.asarray(E, dtype=complex)
    if E.ndim != 2 or E.shape[0] != b0.size or b0.size != eig.W.shape[0]:
        raise ValueError(
            f"shapes do not conform: b0 {b0.shape}, E {E.shape}, W {eig.W.shape}"
        )
    psi_pred = basis.Q @ (eig.W @ (b0[:, None] * E))
    return FeatureForecast(psi_pred=psi_pred, amplitudes=b0, powers=E,
                           horizon=E.shape[1])


def fit_decoder(physical_x: np.ndarray, psi_x: np.ndarray) -> Decoder:
    """Ridge-free least-squares decoder D = X Psi_X^+ (SVD pseudo-inverse)."""
    physical_x = np.asarray(physical_x, dtype=float)
    psi_x = np.asarray(psi_x, dtype=float)
    if physical_x.ndim != 2 or psi_x.ndim != 2 or physical_x.shape[1] != psi_x.shape[1]:
        raise ValueError(
            f"column counts differ: physical {physical_x.shape}, lifted {psi_x.shape}"
        )
    if not np.any(psi_x):
        raise ValueError("lifted window is identically zero; decoder undefined")
    D = physical_x @ np.linalg.pinv(psi_x, rcond=PINV_RTOL)
    residual = float(np.linalg.norm(physical_x - D @ psi_x, "fro"))
    return Decoder(D=D, fit_residual=residual)


def decode(decoder: Decoder, ff: FeatureForecast) -> np.ndarray:
    """Map predicted lifted columns to delay coordinates: X_pred = D Psi_pred."""
    if decoder.D.shape[1] != ff.psi_pred.shape[0]:
        raise ValueError(
            f"decoder expects s={decoder.D.shape[1]}, forecast has s={ff.psi_pred.shape[0]}"
        )
    return decoder.D @ ff.psi_pred


def extract_physical(x_hat_pred: np.ndarray, p: int, d: int,
                     imag_tolerance: float = 1e-4) -> PhysicalForecast:
    """Read the per-feature forecasts out of predicted delay-coordinate columns.

    A delay column stores feature j's newest value at within-block row d
    (1-based), i.e. row (j-1)*d + d; those p rows are selected and realized
    by taking real parts. The largest discarded imaginary magnitude is
    recorded, and a warning (never an error) is emitted when it exceeds
    ``imag_tolerance`` times the value scale.
    """
    x = np.asarray(x_hat_pred)
    if x.ndim != 2 or x.shape[0] != p * d:
        raise ValueError(f"expected {p * d} rows, got shape {x.shape}")
    rows = np.arange(p) * d + (d - 1)
    sel = x[rows, :]
    if np.iscomplexobj(sel):
        max_imag = float(np.max(np.abs(sel.imag)))
        values = np.ascontiguousarray(sel.real)
    else:
        max_imag = 0.0
        values = sel.astype(float)
    scale = max(1.0, float(np.max(np.abs(values))))
    if max_imag > imag_tolerance * scale:
        warnings.warn(
            f"discarding imaginary residue {max_imag:.3e} "
            f"(> {imag_tolerance:.1e} x scale {scale:.3e})",
            RuntimeWarning, stacklevel=2,
        )
    return PhysicalForecast(values=values, max_imag_residue=max_imag)


def forecast_h(state: KdmdState, r_requested: int | None, horizon: int,
               decoder: Decoder, exponent_start: int = 1,
               basis: PodBasis | None = None,
               imag_tolerance: float = 1e-4) -> PhysicalForecast:
    """H-step forecast from the current state: compress, propagate, decode.

    ``basis`` may carry a previously computed POD basis to reuse (staleness is
    the caller's policy); by default the basis is recomputed from the current
    lifted window. The returned forecast carries the reduced eigendecomposition
    for telemetry.
    """
    m = state.m
    psi_x = state.lifted_window[:, :m]
    if basis is None:
        basis = pod_basis(psi_x, r_requested)
    K = reduce_operator(state.A, basis)
    eig = eig_reduced(K)
    b0 = amplitudes(eig, basis, state.lifted_window[:, -1])
    E = vandermonde(eig.eigenvalues, horizon, start=exponent_start)
    ff = predict_features(basis, eig, b0, E)
    x_hat = decode(decoder, ff)
    pf = extract_physical(x_hat, state.p, state.d, imag_tolerance=imag_tolerance)
    pf.eig = eig
    return pf


def dmd_fit(X: np.ndarray, Y: np.ndarray, r: int | None = None) -> BatchDmdFit:
    """Batch DMD of a snapshot pair via rank-r truncated SVD.

    The projected operator is Q^T Y V Sigma^(-1); modes are Q W for its
    eigenvectors W, and amplitudes anchor the last column of Y:
    b0 = modes^+ y_last.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or X.shape != Y.shape or X.shape[1] < 1:
        raise ValueError(f"snapshot matrices must share shape with m >= 1, got {X.shape}, {Y.shape}")
    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    if S.size == 0 or S[0] <= 0.0:
        raise ValueError("rank collapse: zero snapshot matrix")
    nrank = int(np.sum(S > S[0] * PINV_RTOL))
    if nrank < 1:
        raise ValueError("rank collapse below 1")
    r_eff = nrank if r is None else max(1, min(int(r), nrank))
    Q = U[:, :r_eff]
    V = Vt[:r_eff].conj().T
    Atilde = (Q.conj().T @ Y @ V) / S[:r_eff][None, :]
    vals, W = np.linalg.eig(Atilde)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    W = W[:, order]
    modes = Q @ W
    b0 = np.linalg.pinv(modes, rcond=PINV_RTOL) @ Y[:, -1].astype(complex)
    return BatchDmdFit(modes=modes, eigenvalues=vals, amplitudes=b0, rank=r_eff)


def dmd_forecast(fit: BatchDmdFit, k: int) -> np.ndarray:
    """k-step-ahead delay-coordinate prediction: modes (lambda^k * b0)."""
    if k < 0:
        raise ValueError(f"step count must be >= 0, got {k}")
    return fit.modes @ (fit.amplitudes * fit.eigenvalues ** k)
