"""Online maintenance of the lifted-space operator over a rolling window.

State tracks two s x s matrices for the current window of m+1 lifted columns
psi(c_1) .. psi(c_. m+1):

    P = (Psi_X Psi_X^T + eps I)^(-1)       (regularized Gram inverse)
    A = Psi_Y Psi_X^T P                    (one-step operator, Y ~ A X)

where Psi_X holds columns 1..m and Psi_Y columns 2..m+1. Sliding the window
one step swaps the oldest column pair for the newest one, a rank-2 change of
the Gram:

    G' = G + U C U^T,   U = [psi(c_1), psi(c_{m+1})],   C = diag(-1, +1),

so the Woodbury identity updates P in O(s^2):

    Gamma = (C^(-1) + U^T P U)^(-1)        (2 x 2, C^(-1) = C)
    P <- P - P U Gamma U^T P
    A <- A + (V - A U) Gamma U^T P,        V = [psi(c_2), psi(c_{m+2})].

The update tracks the inverse of G + eps0*I exactly only for the eps0 fixed
at initialization, so eps is never rescaled during slides; any batch
re-initialization recomputes it. P is resymmetrized every slide to bound
floating-point asymmetry drift.
"""

from dataclasses import dataclass, field

import numpy as np

from .embed import SnapshotPair
from .rff import RffMap, lift

__all__ = [
    "SingularUpdate",
    "ReinitRequired",
    "KdmdState",
    "UpdatePair",
    "GammaMatrix",
    "spectral_norm_symmetric",
    "init_batch",
    "batch_oracle",
    "build_update",
    "gamma_matrix",
    "slide",
    "rebuild_state",
    "check_window_integrity",
    "save_state",
    "load_state",
]

# |det| guard for the 2x2 core, relative to its squared Frobenius norm.
GAMMA_DET_GUARD = 1e-12


class SingularUpdate(RuntimeError):
    """The 2x2 update core is numerically singular; slide must fall back to batch."""


class ReinitRequired(RuntimeError):
    """Rank-2 update produced non-finite values; caller should rebuild by batch.

    Carries the already-slid window buffers so the caller can rebuild without
    re-lifting anything.
    """

    def __init__(self, message: str, physical_window: np.ndarray,
                 lifted_window: np.ndarray):
        super().__init__(message)
        self.physical_window = physical_window
        self.lifted_window = lifted_window


@dataclass
class KdmdState:
    """Operator state for one stream; single-writer, snapshot by value to read."""

    P: np.ndarray                # (s, s)
    A: np.ndarray                # (s, s)
    lifted_window: np.ndarray    # (s, m+1), oldest to newest
    physical_window: np.ndarray  # (p*d, m+1), same order
    epsilon: float
    p: int
    d: int
    step_count: int = 0          # slides applied since the last batch init
    refresh_count: int = 0       # scheduled batch rebuilds
    reinit_count: int = 0        # recovery batch rebuilds (singular / non-finite)

    @property
    def s(self) -> int:
        return self.P.shape[0]

    @property
    def m(self) -> int:
        return self.lifted_window.shape[1] - 1

    @property
    def input_dim(self) -> int:
        return self.physical_window.shape[0]


@dataclass
class UpdatePair:
    """Rank-2 update factors: discard column pair and admit column pair."""

    U: np.ndarray  # (s, 2): [psi(oldest), psi(newest in window)]
    V: np.ndarray  # (s, 2): [psi(second oldest), psi(incoming)]
    C: np.ndarray = field(default_factory=lambda: np.diag([-1.0, 1.0]))


@dataclass
class GammaMatrix:
    """Inverse of the 2x2 update core, with a |det|-based reciprocal condition."""

    value: np.ndarray
    condition_estimate: float


def spectral_norm_symmetric(G: np.ndarray, max_iter: int = 50,
                            tol: float = 1e-6) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by fixed power iteration.

    Deterministic recipe (so derived quantities are reproducible): start from
    the normalized all-ones vector, run at most ``max_iter`` steps, stop early
    once successive Rayleigh quotients agree to relative ``tol``.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ (G @ v))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


def init_batch(psi_x: np.ndarray, psi_y: np.ndarray, physical: SnapshotPair,
               latest_lifted: np.ndarray, epsilon: float | None = None) -> KdmdState:
    """Batch initialization of (P, A) and the window buffers.

    When ``epsilon`` is not given it is set to 1e-6 times the spectral norm of
    Psi_X Psi_X^T (estimated by :func:`spectral_norm_symmetric`).
    """
    psi_x = np.asarray(psi_x, dtype=float)
    psi_y = np.asarray(psi_y, dtype=float)
    latest_lifted = np.asarray(latest_lifted, dtype=float).ravel()
    if psi_x.ndim != 2 or psi_x.shape != psi_y.shape:
        raise ValueError(f"lifted snapshots must share a shape, got {psi_x.shape} and {psi_y.shape}")
    s, m = psi_x.shape
    if m < 1:
        raise ValueError("need at least one snapshot pair")
    if latest_lifted.size != s:
        raise ValueError(f"latest lifted column has length {latest_lifted.size}, expected {s}")
    if physical.X.shape[1] != m:
        raise ValueError(f"physical pair has m={physical.X.shape[1]}, lifted has m={m}")

    G = psi_x @ psi_x.T
    if epsilon is None:
        top = spectral_norm_symmetric(G)
        if not np.isfinite(top) or top <= 0.0:
            raise ValueError(f"cannot derive regularization: Gram spectral norm {top!r}")
        epsilon = 1e-6 * top
    P = np.linalg.inv(G + epsilon * np.eye(s))
    P = 0.5 * (P + P.T)
    A = psi_y @ (psi_x.T @ P)
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(A))):
        raise ValueError("non-finite entries in batch initialization")

    lifted_window = np.hstack([psi_x, latest_lifted[:, None]])
    physical_window = np.hstack([physical.X, physical.latest_column[:, None]])
    return KdmdState(P=P, A=A, lifted_window=lifted_window,
                     physical_window=physical_window, epsilon=float(epsilon),
                     p=physical.p, d=physical.d)


def batch_oracle(psi_x: np.ndarray, psi_y: np.ndarray,
                 epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Direct recomputation of (P, A) for a window with a fixed epsilon.

    Test oracle for the sliding update: exact to dense-solver precision and
    independent of the incremental path.
    """
    psi_x = np.asarray(psi_x, dtype=float)
    psi_y = np.asarray(psi_y, dtype=float)
    if psi_x.shape != psi_y.shape:
        raise ValueError(f"lifted snapshots must share a shape, got {psi_x.shape} and {psi_y.shape}")
    s = psi_x.shape[0]
    P = np.linalg.inv(psi_x @ psi_x.T + epsilon * np.eye(s))
    A = psi_y @ (psi_x.T @ P)
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(A))):
        raise ValueError("non-finite entries in batch recomputation")
    return P, A


def build_update(state: KdmdState, new_physical_col, rff_map: RffMap) -> UpdatePair:
    """Assemble U, V for one slide; lifts the incoming column exactly once."""
    col = np.asarray(new_physical_col, dtype=float).ravel()
    if col.size != state.input_dim:
        raise ValueError(f"new column has length {col.size}, expected {state.input_dim}")
    psi_new = lift(rff_map, col)
    U = np.column_stack([state.lifted_window[:, 0], state.lifted_window[:, -1]])
    V = np.column_stack([state.lifted_window[:, 1], psi_new])
    return UpdatePair(U=U, V=V)


def gamma_matrix(P: np.ndarray, U: np.ndarray) -> GammaMatrix:
    """Invert the 2x2 core C^(-1) + U^T P U directly (C^(-1) = C).

    Raises :class:`SingularUpdate` when |det| falls below ``GAMMA_DET_GUARD``
    relative to the squared Frobenius norm of the core; the caller should then
    rebuild by batch rather than pseudo-invert.
    """
    M = np.diag([-1.0, 1.0]) + U.T @ (P @ U)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    scale = float(np.sum(M * M))
    cond_est = abs(det) / scale if scale > 0.0 else 0.0
    if abs(det) <= GAMMA_DET_GUARD * max(scale, 1e-300):
        raise SingularUpdate(
            f"update core singular: |det|={abs(det):.3e} vs scale {scale:.3e}"
        )
    inv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det
    return GammaMatrix(value=inv, condition_estimate=cond_est)


def slide(state: KdmdState, new_physical_col, rff_map: RffMap,
          refresh_period: int = 0) -> KdmdState:
    """Advance the window one step with a rank-2 Sherman-Morrison update.

    Returns a new state; the input state is not modified. When the scheduled
    refresh fires or the update core is singular the state is rebuilt by
    batch on the slid window (epsilon recomputed). A non-finite update raises
    :class:`ReinitRequired` carrying the slid window buffers.
    """
    pair = build_update(state, new_physical_col, rff_map)
    psi_new = pair.V[:, 1]
    col = np.asarray(new_physical_col, dtype=float).ravel()
    lifted_next = np.hstack([state.lifted_window[:, 1:], psi_new[:, None]])
    physical_next = np.hstack([state.physical_window[:, 1:], col[:, None]])

    step_next = state.step_count + 1
    if refresh_period > 0 and step_next % refresh_period == 0:
        st = rebuild_state(physical_next, lifted_next, state.p, state.d)
        st.refresh_count = state.refresh_count + 1
        st.reinit_count = state.reinit_count
        return st

    try:
        gamma = gamma_matrix(state.P, pair.U)
    except SingularUpdate:
        st = rebuild_state(physical_next, lifted_next, state.p, state.d)
        st.refresh_count = state.refresh_count
        st.reinit_count = state.reinit_count + 1
        return st

    PU = state.P @ pair.U
    UtP = pair.U.T @ state.P
    P_next = state.P - PU @ (gamma.value @ UtP)
    A_next = state.A + (pair.V - state.A @ pair.U) @ (gamma.value @ UtP)
    if not (np.all(np.isfinite(P_next)) and np.all(np.isfinite(A_next))):
        raise ReinitRequired("non-finite entries after rank-2 update",
                             physical_window=physical_next,
                             lifted_window=lifted_next)
    P_next = 0.5 * (P_next + P_next.T)
    return KdmdState(P=P_next, A=A_next, lifted_window=lifted_next,
                     physical_window=physical_next, epsilon=state.epsilon,
                     p=state.p, d=state.d, step_count=step_next,
                     refresh_count=state.refresh_count,
                     reinit_count=state.reinit_count)


def rebuild_state(physical_window: np.ndarray, lifted_window: np.ndarray,
                  p: int, d: int) -> KdmdState:
    """Batch re-initialization from existing window buffers (no re-lifting)."""
    m = lifted_window.shape[1] - 1
    pair = SnapshotPair(X=physical_window[:, :m].copy(),
                        Y=physical_window[:, 1:].copy(),
                        latest_column=physical_window[:, -1].copy(),
                        p=p, d=d)
    return init_batch(lifted_window[:, :m], lifted_window[:, 1:], pair,
                      lifted_window[:, -1])


def check_window_integrity(state: KdmdState, rff_map: RffMap) -> float:
    """Max abs deviation between stored lifts and re-lifted physical columns.

    Debug helper; re-lifts the whole window, so it perturbs the map's
    monitoring counter and should not run inside the streaming loop.
    """
    from .rff import lift_matrix

    relifted = lift_matrix(rff_map, state.physical_window)
    return float(np.max(np.abs(relifted - state.lifted_window)))


def save_state(state: KdmdState, path, rff_map: RffMap | None = None) -> None:
    """Checkpoint state (and optionally its map) to an .npz file, bit-exactly."""
    arrays = {
        "P": state.P,
        "A": state.A,
        "lifted_window": state.lifted_window,
        "physical_window": state.physical_window,
        "epsilon": np.array(state.epsilon, dtype=float),
        "counters": np.array([state.step_count, state.refresh_count,
                              state.reinit_count, state.p, state.d], dtype=np.int64),
    }
    if rff_map is not None:
        arrays["map_frequencies"] = rff_map.frequencies
        arrays["map_phases"] = rff_map.phases
        arrays["map_gamma"] = np.array(rff_map.gamma, dtype=float)
        arrays["map_cov_scale"] = np.array(rff_map.cov_scale, dtype=float)
        arrays["map_ints"] = np.array([rff_map.s, rff_map.seed, rff_map.input_dim],
                                      dtype=np.int64)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_state(path) -> tuple[KdmdState, RffMap | None]:
    """Load a checkpoint written by :func:`save_state`."""
    with np.load(path) as data:
        counters = data["counters"]
        state = KdmdState(
            P=data["P"], A=data["A"],
            lifted_window=data["lifted_window"],
            physical_window=data["physical_window"],
            epsilon=float(data["epsilon"]),
            step_count=int(counters[0]), refresh_count=int(counters[1]),
            reinit_count=int(counters[2]), p=int(counters[3]), d=int(counters[4]),
        )
        rff_map = None
        if "map_frequencies" in data:
            ints = data["map_ints"]
            rff_map = RffMap(frequencies=data["map_frequencies"],
                             phases=data["map_phases"],
                             s=int(ints[0]), gamma=float(data["map_gamma"]),
                             seed=int(ints[1]), input_dim=int(ints[2]),
                             cov_scale=float(data["map_cov_scale"]))
    return state, rff_map
