"""Loop-heavy graph and factorization kernels.

Each kernel exists twice: a scalar-loop version compiled with numba ``@njit``
and a vectorized pure-numpy version. Set ``CSDP_DISABLE_JIT=1`` to force the
numpy versions (numba is also skipped automatically when it cannot be imported).
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("CSDP_DISABLE_JIT", "").strip().lower()
JIT_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_JIT = JIT_REQUESTED and HAVE_NUMBA


# ---------------------------------------------------------------- scalar loops

def _mcs_loop(indptr, indices, n):
    weight = np.zeros(n, np.int64)
    numbered = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    for i in range(n - 1, -1, -1):
        best = -1
        bw = -1
        for v in range(n):
            if not numbered[v] and weight[v] > bw:
                bw = weight[v]
                best = v
        numbered[best] = True
        order[i] = best
        for p in range(indptr[best], indptr[best + 1]):
            u = indices[p]
            if not numbered[u]:
                weight[u] += 1
    return order


def _eliminate_loop(adj, order, min_degree):
    # adj: n x n bool, modified in place to the filled graph
    n = adj.shape[0]
    alive = np.ones(n, np.bool_)
    deg = np.zeros(n, np.int64)
    for v in range(n):
        c = 0
        for u in range(n):
            if adj[v, u]:
                c += 1
        deg[v] = c
    elim = np.empty(n, np.int64)
    nb = np.empty(n, np.int64)
    for step in range(n):
        if min_degree:
            v = -1
            bd = n + 1
            for u in range(n):
                if alive[u] and deg[u] < bd:
                    bd = deg[u]
                    v = u
        else:
            v = order[step]
        elim[step] = v
        alive[v] = False
        k = 0
        for u in range(n):
            if alive[u] and adj[v, u]:
                nb[k] = u
                k += 1
        for a in range(k):
            x = nb[a]
            for b in range(a + 1, k):
                y = nb[b]
                if not adj[x, y]:
                    adj[x, y] = True
                    adj[y, x] = True
                    deg[x] += 1
                    deg[y] += 1
        for a in range(k):
            deg[nb[a]] -= 1
    return elim


def _cholesky_loop(W, hn_ptr, hn_idx, tol, ztol):
    # W is overwritten; only its lower triangle is read. Pivots below -tol are indefinite,
    # pivots in [-tol, ztol] count as exact zeros.
    n = W.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        d = W[j, j]
        if d < -tol:
            return L, j
        if d <= ztol:
            continue
        s = np.sqrt(d)
        L[j, j] = s
        for p in range(hn_ptr[j], hn_ptr[j + 1]):
            r = hn_idx[p]
            L[r, j] = W[r, j] / s
        for p in range(hn_ptr[j], hn_ptr[j + 1]):
            r = hn_idx[p]
            lr = L[r, j]
            for q in range(hn_ptr[j], p + 1):
                c = hn_idx[q]
                W[r, c] -= lr * L[c, j]
    return L, -1


def _projected_inverse_loop(L, hn_ptr, hn_idx):
    n = L.shape[0]
    S = np.zeros((n, n))
    for j in range(n - 1, -1, -1):
        d = L[j, j]
        lo = hn_ptr[j]
        hi = hn_ptr[j + 1]
        for p in range(lo, hi):
            r = hn_idx[p]
            acc = 0.0
            for q in range(lo, hi):
                c = hn_idx[q]
                acc += S[r, c] * L[c, j]
            S[r, j] = -acc / d
            S[j, r] = S[r, j]
        acc = 0.0
        for p in range(lo, hi):
            r = hn_idx[p]
            acc += L[r, j] * S[r, j]
        S[j, j] = 1.0 / (d * d) - acc / d
    return S


# ------------------------------------------------------------- numpy versions

def _mcs_numpy(indptr, indices, n):
    weight = np.zeros(n, np.int64)
    numbered = np.zeros(n, bool)
    order = np.empty(n, np.int64)
    for i in range(n - 1, -1, -1):
        best = int(np.argmax(np.where(numbered, -1, weight)))
        numbered[best] = True
        order[i] = best
        nbrs = indices[indptr[best]:indptr[best + 1]]
        weight[nbrs[~numbered[nbrs]]] += 1
    return order


def _eliminate_numpy(adj, order, min_degree):
    n = adj.shape[0]
    alive = np.ones(n, bool)
    elim = np.empty(n, np.int64)
    for step in range(n):
        if min_degree:
            deg = np.where(alive, (adj & alive).sum(axis=1), n + 1)
            v = int(np.argmin(deg))
        else:
            v = int(order[step])
        elim[step] = v
        alive[v] = False
        nb = np.flatnonzero(adj[v] & alive)
        if nb.size > 1:
            adj[np.ix_(nb, nb)] = True
            adj[nb, nb] = False
    return elim


def _cholesky_numpy(W, hn_ptr, hn_idx, tol, ztol):
    n = W.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        d = W[j, j]
        if d < -tol:
            return L, j
        if d <= ztol:
            continue
        s = np.sqrt(d)
        L[j, j] = s
        R = hn_idx[hn_ptr[j]:hn_ptr[j + 1]]
        if R.size:
            col = W[R, j] / s
            L[R, j] = col
            W[np.ix_(R, R)] -= np.outer(col, col)
    return L, -1


def _projected_inverse_numpy(L, hn_ptr, hn_idx):
    n = L.shape[0]
    S = np.zeros((n, n))
    for j in range(n - 1, -1, -1):
        d = L[j, j]
        R = hn_idx[hn_ptr[j]:hn_ptr[j + 1]]
        if R.size:
            ell = L[R, j] / d
            col = -S[np.ix_(R, R)] @ ell
            S[R, j] = col
            S[j, R] = col
            S[j, j] = 1.0 / (d * d) - ell @ col
        else:
            S[j, j] = 1.0 / (d * d)
    return S


NUMPY_KERNELS = {
    "mcs": _mcs_numpy,
    "eliminate": _eliminate_numpy,
    "cholesky": _cholesky_numpy,
    "projected_inverse": _projected_inverse_numpy,
}

if HAVE_NUMBA:
    JIT_KERNELS = {
        "mcs": njit(cache=True)(_mcs_loop),
        "eliminate": njit(cache=True)(_eliminate_loop),
        "cholesky": njit(cache=True)(_cholesky_loop),
        "projected_inverse": njit(cache=True)(_projected_inverse_loop),
    }
else:  # pragma: no cover
    JIT_KERNELS = dict(NUMPY_KERNELS)

_ACTIVE = JIT_KERNELS if USE_JIT else NUMPY_KERNELS


def backend() -> str:
    return "numba" if USE_JIT else "numpy"


def mcs_order(indptr, indices, n):
    return _ACTIVE["mcs"](np.asarray(indptr, np.int64), np.asarray(indices, np.int64), int(n))


def eliminate(adj, order=None, min_degree=False):
    """Symbolic elimination; returns (filled adjacency, elimination order)."""
    A = np.array(adj, dtype=np.bool_, copy=True)
    n = A.shape[0]
    ordr = np.arange(n, dtype=np.int64) if order is None else np.asarray(order, np.int64)
    elim = _ACTIVE["eliminate"](A, ordr, bool(min_degree))
    return A, elim


def cholesky(W, hn_ptr, hn_idx, tol, ztol=None):
    W = np.array(W, dtype=np.float64, copy=True)
    return _ACTIVE["cholesky"](W, np.asarray(hn_ptr, np.int64), np.asarray(hn_idx, np.int64), float(tol),
                                 float(tol if ztol is None else ztol))


def projected_inverse(L, hn_ptr, hn_idx):
    return _ACTIVE["projected_inverse"](np.ascontiguousarray(L, np.float64),
                                        np.asarray(hn_ptr, np.int64), np.asarray(hn_idx, np.int64))
