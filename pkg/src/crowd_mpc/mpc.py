"""Condensed MPC: stacked prediction, speed-tracking cost and constraint rows.

Decision variable is U = [u(k), ..., u(k+N-1)]; predicted states are
X = S_x x_k + S_u U for steps k+1 .. k+N. Constraints are assembled in the
form G U >= h, block order: input bounds (2N rows, interleaved upper/lower),
rate upper (N), rate lower (N), speed upper (N), speed lower (N), gap (N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MpcParams, VehicleParams
from .predictor import FrontGapSequence
from .qp import QpProblem
from .vehicle import DiscreteModel, VehicleState

VACUOUS = -1e12
BLOCKS = ("u_bound", "rate_upper", "rate_lower", "speed_upper", "speed_lower", "gap")


@dataclass(frozen=True)
class PredictionMatrices:
    S_x: np.ndarray  # (2N, 2)
    S_u: np.ndarray  # (2N, N)
    A_r: np.ndarray  # (N, 2N) picks speeds
    M_x: np.ndarray  # (N, 2N) picks positions

    @property
    def N(self) -> int:
        return self.S_u.shape[1]


def build_prediction(model: DiscreteModel, N: int) -> PredictionMatrices:
    if N < 1:
        raise ValueError(f"horizon must be >= 1, got {N}")
    A, B = model.A, model.B.reshape(2, 1)
    powers = [np.eye(2)]
    for _ in range(N):
        powers.append(A @ powers[-1])
    S_x = np.vstack(powers[1:])
    S_u = np.zeros((2 * N, N))
    for i in range(N):
        for j in range(i + 1):
            S_u[2 * i:2 * i + 2, j] = (powers[i - j] @ B).ravel()
    A_r = np.zeros((N, 2 * N))
    M_x = np.zeros((N, 2 * N))
    A_r[np.arange(N), 2 * np.arange(N) + 1] = 1.0
    M_x[np.arange(N), 2 * np.arange(N)] = 1.0
    return PredictionMatrices(S_x, S_u, A_r, M_x)


def build_cost(mats: PredictionMatrices, x_k: VehicleState, v_r: float,
               Q: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """(H, F, Y) with J(U) = U'HU + 2FU + Y = ||A_r X - V_r||_Q^2."""
    N = mats.N
    Q = np.eye(N) if Q is None else np.asarray(Q, dtype=float)
    V = mats.A_r @ mats.S_u  # (N, N) speed response to inputs
    free = mats.A_r @ mats.S_x @ x_k.as_array() - v_r
    QV = Q @ V
    H = V.T @ QV
    H = 0.5 * (H + H.T)
    F = free @ QV
    Y = float(free @ Q @ free)
    return H, F, Y


def difference_matrix(N: int) -> np.ndarray:
    """Rows give u(k) and u(k+i) - u(k+i-1); paired with u0 = [u(k-1), 0, ...]."""
    return np.eye(N) - np.eye(N, k=-1)


def build_constraints(mats: PredictionMatrices, x_k: VehicleState, u_prev: float,
                      X_p: FrontGapSequence | np.ndarray, params: VehicleParams,
                      d_safe: float) -> tuple[np.ndarray, np.ndarray]:
    N = mats.N
    x = x_k.as_array()
    x_p = np.asarray(getattr(X_p, "x_p", X_p), dtype=float)
    if x_p.shape != (N,):
        raise ValueError(f"front-pedestrian sequence must have length {N}")
    ones = np.ones(N)

    A_u = np.zeros((2 * N, N))
    A_u[2 * np.arange(N), np.arange(N)] = -1.0
    A_u[2 * np.arange(N) + 1, np.arange(N)] = 1.0
    M_u = difference_matrix(N)
    u0 = np.zeros(N)
    u0[0] = u_prev
    V_u = mats.A_r @ mats.S_u
    v_free = mats.A_r @ mats.S_x @ x
    P_u = mats.M_x @ mats.S_u
    p_free = mats.M_x @ mats.S_x @ x

    present = x_p < 1e9 - 1.0
    gap_h = np.where(present, d_safe - x_p + p_free, VACUOUS)

    G = np.vstack([A_u, -M_u, M_u, -V_u, V_u, -P_u])
    h = np.concatenate([
        -params.u_max * np.ones(2 * N),
        -params.du_max * ones - u0,
        -params.du_max * ones + u0,
        -params.v_max * ones + v_free,
        params.v_min * ones - v_free,
        gap_h,
    ])
    return G, h


def block_slices(N: int) -> dict[str, slice]:
    sizes = [2 * N] + [N] * 5
    starts = np.concatenate([[0], np.cumsum(sizes)])
    return {name: slice(int(a), int(b)) for name, a, b in zip(BLOCKS, starts[:-1], starts[1:])}


def assemble_qp(model: DiscreteModel, x_k: VehicleState, u_prev: float,
                X_p: FrontGapSequence | np.ndarray, params: VehicleParams, mpc: MpcParams,
                mats: PredictionMatrices | None = None, step: int = 0) -> QpProblem:
    mats = mats if mats is not None else build_prediction(model, mpc.horizon)
    H, F, Y = build_cost(mats, x_k, mpc.v_ref, mpc.q_weight * np.eye(mats.N))
    G, h = build_constraints(mats, x_k, u_prev, X_p, params, mpc.d_safe)
    gap_rows = np.arange(G.shape[0])[block_slices(mats.N)["gap"]]
    active_gap = gap_rows[h[gap_rows] > VACUOUS]
    meta = {"step": step, "vacuous_rows": int(len(gap_rows) - len(active_gap)),
            "gap_rows": active_gap.tolist()}
    return QpProblem(H=H, F=F, G=G, h=h, Y=Y, meta=meta)
