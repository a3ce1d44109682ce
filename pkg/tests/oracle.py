"""Dense interior-point oracle (cvxpy + Clarabel), used only by the tests."""

from __future__ import annotations

import cvxpy as cp
import numpy as np


def dense_sdp(p, sense: str = "primal") -> float:
    """Optimal value of min <C,X> s.t. <A_i,X> = b_i with X PSD on each declared block."""
    C, A, b = p.dense_data()
    blocks = p.blocks()
    Xs = [cp.Variable((len(c), len(c)), symmetric=True) for c in blocks]
    cons = [X >> 0 for X in Xs]

    def inner(M, X, c):
        return cp.sum(cp.multiply(M[np.ix_(c, c)], X))

    for Ai, bi in zip(A, b):
        cons.append(sum(inner(Ai, X, c) for X, c in zip(Xs, blocks)) == bi)
    obj = cp.Minimize(sum(inner(C, X, c) for X, c in zip(Xs, blocks)))
    prob = cp.Problem(obj, cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"oracle status {prob.status}")
    return float(prob.value)


def lmi_feasible(C, A, margin: float = 0.0) -> bool:
    """Is there y with C - sum y_k A_k PSD? Decided by maximizing the smallest eigenvalue slack."""
    C = np.asarray(C, float)
    y = cp.Variable(len(A))
    t = cp.Variable()
    M = C - sum(y[k] * A[k] for k in range(len(A))) if A else C
    M = (M + M.T) / 2
    prob = cp.Problem(cp.Maximize(t), [M - t * np.eye(C.shape[0]) >> 0, t <= 1, cp.norm(y, "inf") <= 1e4])
    prob.solve(solver=cp.CLARABEL)
    return prob.status in ("optimal", "optimal_inaccurate") and t.value >= -margin


def lyapunov_feasible(A: np.ndarray, sizes, eps: float = 1e-6) -> bool:
    """Block-diagonal P with P >= eps I and -(A'P + PA) >= eps I, solved densely with a scaling slack."""
    N = A.shape[0]
    P = cp.Variable((N, N), symmetric=True)
    t = cp.Variable()
    cons = []
    off = 0
    mask = np.zeros((N, N))
    for s in sizes:
        mask[off:off + s, off:off + s] = 1
        off += s
    cons.append(cp.multiply(1 - mask, P) == 0)
    cons.append(P - eps * np.eye(N) >> t * np.eye(N))
    cons.append(-(A.T @ P + P @ A) - eps * np.eye(N) >> t * np.eye(N))
    cons.append(cp.trace(P) <= 1e3 * N)
    cons.append(t <= 1)
    prob = cp.Problem(cp.Maximize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.status in ("optimal", "optimal_inaccurate") and t.value >= 0


def clique_sum_margin(Z, cliques) -> float:
    """max t such that Z - tI is a sum of PSD matrices supported on the given cliques."""
    Z = np.asarray(Z, float)
    n = Z.shape[0]
    Xs = [cp.Variable((len(c), len(c)), symmetric=True) for c in cliques]
    t = cp.Variable()
    total = 0
    for X, c in zip(Xs, cliques):
        E = np.zeros((len(c), n))
        E[np.arange(len(c)), list(c)] = 1.0
        total = total + E.T @ X @ E
    cons = [X >> 0 for X in Xs] + [total == Z - t * np.eye(n), t <= 1]
    prob = cp.Problem(cp.Maximize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return -np.inf
    return float(t.value)
