"""Dense strictly convex QP solver.

Solves::

    minimize    U'HU + 2F'U
    subject to  G U >= h

with the Goldfarb-Idnani dual active-set method. The method starts from the
unconstrained minimum and adds violated constraints one at a time while
keeping the multipliers dual feasible, so no separate feasibility phase is
needed and an empty feasible set shows up as a Farkas certificate
(y >= 0, G'y = 0, h'y > 0).

Internally the variables are scaled so that H has a unit diagonal and every
constraint row has unit norm; tolerances apply in those units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class QpProblem:
    H: np.ndarray
    F: np.ndarray
    G: np.ndarray
    h: np.ndarray
    Y: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.F = np.atleast_1d(np.asarray(self.F, dtype=float))
        n = self.F.shape[0]
        self.G = np.asarray(self.G, dtype=float).reshape(-1, n)
        self.h = np.atleast_1d(np.asarray(self.h, dtype=float)).reshape(-1)
        if self.H.shape != (n, n) or self.G.shape[0] != self.h.shape[0]:
            raise ValueError("inconsistent QP dimensions")

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def objective(self, U: np.ndarray) -> float:
        U = np.asarray(U, dtype=float)
        return float(U @ self.H @ U + 2.0 * self.F @ U)


@dataclass
class QpSolution:
    status: str
    U: np.ndarray
    objective: float
    active_set: list[int]
    iterations: int
    kkt_residual: float
    multipliers: np.ndarray
    certificate: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _Scaled:
    """Problem in scaled coordinates z = U / d with unit-norm rows."""

    d: np.ndarray
    P: np.ndarray
    q: np.ndarray
    G: np.ndarray
    h: np.ndarray
    row_norm: np.ndarray
    valid: np.ndarray


def _scale(qp: QpProblem) -> _Scaled:
    diag = np.diag(qp.H).copy()
    ref = max(float(diag.max(initial=0.0)), 0.0)
    d = np.where(diag > 1e-300 + 1e-14 * ref, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
    P = 2.0 * (d[:, None] * qp.H * d[None, :])
    P = 0.5 * (P + P.T)
    q = 2.0 * d * qp.F
    Gs = qp.G * d[None, :]
    norms = np.sqrt((Gs * Gs).sum(axis=1))
    valid = norms > 0.0
    safe = np.where(valid, norms, 1.0)
    return _Scaled(d, P, q, Gs / safe[:, None], qp.h / safe, norms, valid)


def _residual(sc: _Scaled, z: np.ndarray, mult: np.ndarray) -> float:
    slack = sc.G @ z - sc.h
    slack = np.where(sc.valid, slack, 0.0)
    stat = sc.P @ z + sc.q - sc.G.T @ mult
    primal = np.maximum(0.0, -slack)
    comp = np.abs(mult * np.minimum(slack, 1e6))
    return float(max(np.abs(stat).max(initial=0.0), primal.max(initial=0.0),
                     comp.max(initial=0.0), np.maximum(0.0, -mult).max(initial=0.0)))


def kkt_residual(qp: QpProblem, sol: QpSolution) -> float:
    """Largest of stationarity, primal violation, complementarity (scaled units)."""
    if sol.status != OPTIMAL:
        raise ValueError(f"KKT residual needs an optimal solution, got {sol.status}")
    sc = _scale(qp)
    z = np.asarray(sol.U, dtype=float) / sc.d
    mult = np.asarray(sol.multipliers, dtype=float) * sc.row_norm
    return _residual(sc, z, mult)


class ActiveSetSolver:
    """Goldfarb-Idnani solver; keeps the last active set for warm starts."""

    def __init__(self, max_iter: int = 500, feas_tol: float = 1e-8, kkt_tol: float = 1e-8):
        self.max_iter = max_iter
        self.feas_tol = feas_tol
        self.kkt_tol = kkt_tol
        self.last_active: list[int] = []

    def solve(self, qp: QpProblem, warm_start: Sequence[int] | None = None) -> QpSolution:
        sol = solve(qp, warm_start, self.max_iter, self.feas_tol, self.kkt_tol)
        if sol.optimal:
            self.last_active = list(sol.active_set)
        return sol


def _factor(P: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        # positive semidefinite input: smallest regularization that factors
        eps = 1e-12 * max(1.0, float(np.abs(P).max()))
        while True:
            try:
                return np.linalg.cholesky(P + eps * np.eye(len(P)))
            except np.linalg.LinAlgError:
                eps *= 10.0


def solve(qp: QpProblem, warm_start: Sequence[int] | None = None, max_iter: int = 500,
          feas_tol: float = 1e-8, kkt_tol: float = 1e-8) -> QpSolution:
    n, m = qp.n, qp.m
    sc = _scale(qp)

    def finish(status, z, active, u_active, iterations, certificate=None):
        mult = np.zeros(m)
        if active:
            mult[active] = u_active
        U = sc.d * z
        res = _residual(sc, z, mult) if status == OPTIMAL else float("inf")
        norms = np.where(sc.valid, sc.row_norm, 1.0)
        cert = None if certificate is None else certificate / norms
        order = np.argsort(active) if active else []
        return QpSolution(
            status=status, U=U, objective=qp.objective(U),
            active_set=[int(active[i]) for i in order], iterations=iterations,
            kkt_residual=res, multipliers=mult / norms,
            certificate=cert)

    # zero rows: either vacuous or a direct contradiction
    bad_zero = np.flatnonzero(~sc.valid & (qp.h > feas_tol))
    if bad_zero.size:
        cert = np.zeros(m)
        cert[bad_zero[0]] = 1.0
        return finish(INFEASIBLE, np.zeros(n), [], np.zeros(0), 0, cert)

    L = _factor(sc.P)
    LG = solve_triangular(L, sc.G.T, lower=True) if m else np.zeros((n, 0))  # L^{-1} G'
    y0 = -solve_triangular(L, sc.q, lower=True)

    def to_z(y):
        return solve_triangular(L.T, y, lower=False)

    active: list[int] = []
    u = np.zeros(0)
    iterations = 0

    if warm_start:
        for idx in dict.fromkeys(int(i) for i in warm_start):
            if not (0 <= idx < m) or not sc.valid[idx]:
                continue
            W = LG[:, active + [idx]]
            if np.linalg.matrix_rank(W, tol=1e-10 * max(1.0, np.abs(W).max())) == len(active) + 1:
                active.append(idx)
        # equality-constrained minimizer; drop negative multipliers until dual feasible
        while active:
            W = LG[:, active]
            u = np.linalg.solve(W.T @ W, sc.h[active] - W.T @ y0)
            worst = int(np.argmin(u))
            if u[worst] >= 0.0:
                break
            active.pop(worst)
            iterations += 1
        if active:
            y = y0 + LG[:, active] @ u
        else:
            u = np.zeros(0)
            y = y0
    else:
        y = y0
    z = to_z(y)

    Gv = np.where(sc.valid[:, None], sc.G, 0.0)
    hv = np.where(sc.valid, sc.h, -np.inf)

    while True:
        slack = Gv @ z - hv
        p = int(np.argmin(slack)) if m else -1
        if m == 0 or slack[p] >= -feas_tol:
            return finish(OPTIMAL, z, active, u, iterations)
        s_p = float(slack[p])
        u_p = 0.0
        dp = LG[:, p]
        while True:
            if iterations >= max_iter:
                return finish(ITERATION_LIMIT, z, active, u, iterations)
            if active:
                Qw, Rw = np.linalg.qr(LG[:, active])
                proj = Qw.T @ dp
                r = solve_triangular(Rw, proj, lower=False)
                zt = dp - Qw @ proj
            else:
                r = np.zeros(0)
                zt = dp
            step_dir = to_z(zt)
            curvature = float(zt @ zt)

            t1, k = np.inf, -1
            pos = np.flatnonzero(r > 1e-12 * max(1.0, np.abs(r).max(initial=0.0)))
            if pos.size:
                ratios = u[pos] / r[pos]
                j = int(np.argmin(ratios))
                t1, k = float(ratios[j]), int(pos[j])
            dependent = curvature <= 1e-18 * float(dp @ dp)
            t2 = np.inf if dependent else -s_p / curvature

            if np.isinf(t1) and np.isinf(t2):
                cert = np.zeros(m)
                cert[p] = 1.0
                if active:
                    cert[active] = np.maximum(-r, 0.0)
                return finish(INFEASIBLE, z, active, u, iterations, cert)

            if np.isinf(t2):
                # partial step in dual space only
                u = u - t1 * r
                u_p += t1
                active.pop(k)
                u = np.delete(u, k)
                iterations += 1
                continue

            t = min(t1, t2)
            z = z + t * step_dir
            u = u - t * r
            u_p += t
            if t2 <= t1:
                active.append(p)
                u = np.append(u, u_p)
                iterations += 1
                break
            active.pop(k)
            u = np.delete(u, k)
            iterations += 1
            s_p = float(Gv[p] @ z - hv[p])
