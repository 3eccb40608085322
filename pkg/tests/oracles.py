"""Independent reference computations used by the tests."""

import itertools

import numpy as np

from crowd_mpc.vehicle import VehicleState, step_vehicle


def rollout(model, x0: VehicleState, U) -> np.ndarray:
    """Stacked [s1, v1, s2, v2, ...] by iterating the one-step model."""
    out = []
    x = x0
    for u in U:
        x = step_vehicle(model, x, float(u))
        out.extend([x.s, x.v])
    return np.array(out)


def enumerate_active_sets(H, F, G, h, tol=1e-9):
    """Exact QP optimum by trying every active set of size <= n.

    Returns (U, objective) or None when no KKT point exists (infeasible).
    """
    H, F, G, h = (np.asarray(a, dtype=float) for a in (H, F, G, h))
    n, m = len(F), len(h)
    P, q = 2 * H, 2 * F
    best = None
    for k in range(0, min(n, m) + 1):
        for rows in itertools.combinations(range(m), k):
            rows = list(rows)
            A = G[rows]
            if k and np.linalg.matrix_rank(A) < k:
                continue
            K = np.block([[P, -A.T], [A, np.zeros((k, k))]]) if k else P
            rhs = np.concatenate([-q, h[rows]]) if k else -q
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            U, lam = sol[:n], sol[n:]
            if np.all(G @ U >= h - tol) and np.all(lam >= -tol):
                obj = float(U @ H @ U + 2 * F @ U)
                if best is None or obj < best[1]:
                    best = (U, obj)
    return best


def dual_projected_gradient(Hs, Fs, Gs, hs, iterations=20_000):
    """Batched accelerated projected gradient on the QP dual.

    For min U'HU + 2F'U s.t. GU >= h the dual over lambda >= 0 is concave with
    a trivial projection (clip at zero). Problems are padded to a common size:
    padded variables have unit curvature and no coupling, padded rows are
    0 >= 0. Returns (objective, dual_value, growth) per problem. The dual of an
    infeasible problem is unbounded, so it keeps climbing: growth is the dual
    increase over the second half of the run.
    """
    B = len(Hs)
    n = max(len(F) for F in Fs)
    m = max(len(h) for h in hs)
    Pinv = np.zeros((B, n, n))
    q = np.zeros((B, n))
    G = np.zeros((B, m, n))
    h = np.zeros((B, m))
    for b in range(B):
        k, r = len(Fs[b]), len(hs[b])
        P = np.eye(n)
        P[:k, :k] = 2 * np.asarray(Hs[b])
        Pinv[b] = np.linalg.inv(P)
        q[b, :k] = 2 * np.asarray(Fs[b])
        G[b, :r, :k] = Gs[b]
        h[b, :r] = hs[b]
    # dual: g(lam) = -1/2 (G'lam - q)' Pinv (G'lam - q) + h'lam
    GP = np.einsum("bmn,bnk->bmk", G, Pinv)
    Q = np.einsum("bmn,bkn->bmk", GP, G)  # G Pinv G'
    c = h + np.einsum("bmn,bn->bm", GP, q)  # h + G Pinv q
    L = np.linalg.eigvalsh(Q).max(axis=1)
    step = 1.0 / np.maximum(L, 1e-12)
    lam = np.zeros((B, m))
    prev = lam.copy()
    t = 1.0
    half = None
    for it in range(iterations):
        if it == iterations // 2:
            half = _dual(lam, Q, c, q, Pinv)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = lam + ((t - 1.0) / t_next) * (lam - prev)
        grad = c - np.einsum("bmk,bk->bm", Q, y)
        prev = lam
        lam = np.maximum(0.0, y + step[:, None] * grad)
        t = t_next
    U = np.einsum("bnk,bk->bn", Pinv, np.einsum("bmn,bm->bn", G, lam) - q)
    dual = _dual(lam, Q, c, q, Pinv)
    objectives = []
    for b in range(B):
        k = len(Fs[b])
        Ub = U[b, :k]
        objectives.append(float(Ub @ Hs[b] @ Ub + 2 * np.asarray(Fs[b]) @ Ub))
    return np.array(objectives), dual, dual - half


def _dual(lam, Q, c, q, Pinv):
    return (-0.5 * np.einsum("bm,bmk,bk->b", lam, Q, lam) + np.einsum("bm,bm->b", c, lam)
            - 0.5 * np.einsum("bn,bnk,bk->b", q, Pinv, q))
