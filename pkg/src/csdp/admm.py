"""ADMM for domain- and range-space decomposed SDPs.

Matrices live in symmetric-vectorized form over the chordal pattern (off-diagonals
scaled by √2), so clique copies are gathers from one global vector and the
X-update Hessian is ρD with D the per-entry clique-membership count.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import InfeasibleCompletion, SingularKkt
from .graph import clique_tree
from .sdp import DecomposedSdp, SdpProblem, decompose_with_cliques
from .sparse import SparseSymMatrix, max_det_complete

log = logging.getLogger(__name__)
_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AdmmSettings:
    rho: float = 1.0
    eps_abs: float = 1e-5
    eps_rel: float = 1e-5
    max_iter: int = 20000
    adaptive_rho: bool = False
    check_every: int = 25
    allow_dependent: bool = False
    log_path: str | None = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not (self.eps_abs > 0 and self.eps_rel > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.check_every < 1:
            raise ValueError("max_iter and check_every must be positive")

    def with_(self, **kw) -> "AdmmSettings":
        return replace(self, **kw)


@dataclass
class AdmmState:
    clique_vars: list[np.ndarray]
    multipliers: list[np.ndarray]
    iter: int
    X: np.ndarray | None = None  # domain mode: global svec vector
    y: np.ndarray | None = None  # range mode


@dataclass
class Solution:
    objective: float
    status: str
    primal_res: float
    dual_res: float
    iterations: int
    mode: str
    y: np.ndarray
    X_partial: SparseSymMatrix | None = None
    X_completed: np.ndarray | None = None
    clique_vars: list[np.ndarray] = field(default_factory=list)
    dual_objective: float = float("nan")
    history: list[tuple] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "Solved"


# --------------------------------------------------------------- projections

def psd_project(M) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)):
        raise ValueError("psd_project requires a symmetric matrix")
    w, V = np.linalg.eigh((M + M.T) / 2)
    return (V * np.maximum(w, 0.0)) @ V.T


class _CliqueLayout:
    """Index bookkeeping between the global svec vector and stacked clique svecs."""

    def __init__(self, n: int, pattern_entries: list[tuple[int, int]], cliques):
        self.entries = pattern_entries
        self.index = {e: k for k, e in enumerate(pattern_entries)}
        self.N = len(pattern_entries)
        self.scale = np.array([1.0 if i == j else _SQ2 for i, j in pattern_entries])
        self.cliques = [list(c) for c in cliques]
        gidx, starts = [], []
        pos = 0
        for c in self.cliques:
            starts.append(pos)
            for a in range(len(c)):
                for b in range(a, len(c)):
                    gidx.append(self.index[(c[a], c[b])])
            pos += len(c) * (len(c) + 1) // 2
        self.gidx = np.asarray(gidx, np.int64)
        self.starts = np.asarray(starts, np.int64)
        self.total = pos
        self.D = np.bincount(self.gidx, minlength=self.N).astype(float)
        self.groups = {}
        for k, c in enumerate(self.cliques):
            self.groups.setdefault(len(c), []).append(k)
        self._group_idx = {}
        for s, ks in self.groups.items():
            d = s * (s + 1) // 2
            self._group_idx[s] = (self.starts[ks][:, None] + np.arange(d)[None, :])
        self._tri = {}
        for s in self.groups:
            iu, ju = np.triu_indices(s)
            w = np.where(iu == ju, 1.0, _SQ2)
            self._tri[s] = (iu, ju, w)

    def svec_matrix(self, M: SparseSymMatrix) -> np.ndarray:
        v = np.zeros(self.N)
        for i, j, val in zip(M.rows.tolist(), M.cols.tolist(), M.vals.tolist()):
            v[self.index[(i, j)]] = val * (1.0 if i == j else _SQ2)
        return v

    def scatter(self, z: np.ndarray) -> np.ndarray:
        return np.bincount(self.gidx, weights=z, minlength=self.N)

    def project(self, z: np.ndarray) -> np.ndarray:
        out = np.empty_like(z)
        for s, idx in self._group_idx.items():
            iu, ju, w = self._tri[s]
            vals = z[idx] / w
            M = np.zeros((idx.shape[0], s, s))
            M[:, iu, ju] = vals
            M[:, ju, iu] = vals
            lam, V = np.linalg.eigh(M)
            P = (V * np.maximum(lam, 0.0)[:, None, :]) @ np.swapaxes(V, 1, 2)
            out[idx] = P[:, iu, ju] * w
        return out

    def seg_norms(self, z: np.ndarray) -> np.ndarray:
        if z.size == 0:
            return np.zeros(0)
        return np.sqrt(np.add.reduceat(z * z, self.starts)) if self.starts.size else np.zeros(0)

    def clique_matrix(self, z: np.ndarray, k: int) -> np.ndarray:
        c = self.cliques[k]
        s = len(c)
        iu, ju = np.triu_indices(s)
        w = np.where(iu == ju, 1.0, _SQ2)
        seg = z[self.starts[k]:self.starts[k] + s * (s + 1) // 2] / w
        M = np.zeros((s, s))
        M[iu, ju] = seg
        M[ju, iu] = seg
        return M

    def to_sparse(self, n: int, pattern, x: np.ndarray) -> SparseSymMatrix:
        ent = {e: x[k] / self.scale[k] for k, e in enumerate(self.entries)}
        return SparseSymMatrix.from_entries(n, ent, pattern)


def _layout(d: DecomposedSdp) -> _CliqueLayout:
    n = d.base.n
    entries = sorted({(i, i) for i in range(n)} | set(d.pattern.edges()))
    return _CliqueLayout(n, entries, d.cliques)


class _Kkt:
    """Cached solver for (A D⁻¹ Aᵀ) u = r."""

    def __init__(self, A: np.ndarray, D: np.ndarray, allow_dependent: bool):
        self.m = A.shape[0]
        if self.m == 0:
            self.kind = "empty"
            return
        M = (A / D) @ A.T
        scale = max(1.0, float(np.max(np.abs(np.diag(M)))))
        _, R, piv = sla.qr((A / np.sqrt(D)).T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > 1e-10 * max(1.0, diag[0] if diag.size else 1.0)))
        if rank < self.m:
            dep = sorted(int(i) for i in piv[rank:])
            if not allow_dependent:
                raise SingularKkt(f"A D^-1 A' is rank deficient ({rank} < {self.m}); "
                                  f"dependent constraint rows: {dep[:10]}", dep)
            w, V = np.linalg.eigh(M)
            keep = w > 1e-10 * scale
            self.kind = "pinv"
            self.pinv = (V[:, keep] / w[keep]) @ V[:, keep].T
        else:
            self.kind = "chol"
            self.fac = sla.cho_factor(M, lower=True)

    def solve(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "empty":
            return np.zeros(0)
        if self.kind == "chol":
            return sla.cho_solve(self.fac, r)
        return self.pinv @ r


def _constraint_matrix(lay: _CliqueLayout, p: SdpProblem) -> np.ndarray:
    A = np.zeros((p.m, lay.N))
    for i, a in enumerate(p.A):
        A[i] = lay.svec_matrix(a)
    return A


def _open_log(settings: AdmmSettings):
    if not settings.log_path:
        return None, None
    fh = open(settings.log_path, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["iter", "primal_res", "dual_res", "objective", "rho"])
    return fh, w


def _converged(lay, a, bvec, r_clique, settings, dual_res, dual_scale):
    na = lay.seg_norms(a)
    nb = lay.seg_norms(bvec)
    sizes = np.array([len(c) for c in lay.cliques], float)
    tol = settings.eps_abs * np.sqrt(sizes) + settings.eps_rel * np.maximum(na, nb)
    primal_ok = bool(np.all(r_clique <= tol))
    dual_ok = dual_res <= settings.eps_abs * math.sqrt(lay.N) + settings.eps_rel * dual_scale
    return primal_ok and dual_ok


def solve_domain(d: DecomposedSdp, settings: AdmmSettings = AdmmSettings(),
                 complete: bool = False) -> Solution:
    if d.mode != "domain":
        raise ValueError("solve_domain requires a domain-mode decomposition")
    p = d.base
    lay = _layout(d)
    c = lay.svec_matrix(p.C)
    A = _constraint_matrix(lay, p)
    kkt = _Kkt(A, lay.D, settings.allow_dependent)
    b = p.b
    rho = settings.rho
    x = np.zeros(lay.N)
    Xk = np.zeros(lay.total)
    lam = np.zeros(lay.total)
    fh, writer = _open_log(settings)
    status, pr, dr, hist = "MaxIter", math.inf, math.inf, []
    it = 0
    try:
        for it in range(1, settings.max_iter + 1):
            r = rho * lay.scatter(Xk + lam) - c
            mu = kkt.solve(A @ (r / lay.D) - rho * b)
            x = (r - A.T @ mu) / (rho * lay.D) if p.m else r / (rho * lay.D)
            Sx = x[lay.gidx]
            X_old = Xk
            Xk = lay.project(Sx - lam)
            lam = lam + Xk - Sx
            if it % settings.check_every == 0 or it == settings.max_iter:
                r_cl = lay.seg_norms(Xk - Sx)
                pr = float(np.sqrt(np.sum(r_cl ** 2)))
                dr = float(rho * np.linalg.norm(lay.scatter(Xk - X_old)))
                obj = float(c @ x)
                hist.append((it, pr, dr, obj, rho))
                if writer:
                    writer.writerow([it, repr(pr), repr(dr), repr(obj), repr(rho)])
                log.debug("iter %d primal %.3e dual %.3e obj %.8g rho %g", it, pr, dr, obj, rho)
                dual_scale = float(np.linalg.norm(rho * lay.scatter(lam)))
                if _converged(lay, Xk, Sx, r_cl, settings, dr, dual_scale):
                    status = "Solved"
                    break
                if settings.adaptive_rho:
                    if pr > 10 * dr:
                        rho *= 2.0
                        lam /= 2.0
                    elif dr > 10 * pr:
                        rho /= 2.0
                        lam *= 2.0
    finally:
        if fh:
            fh.close()
    y = -mu if p.m else np.zeros(0)
    X_partial = lay.to_sparse(p.n, d.pattern, x)
    sol = Solution(objective=float(c @ x), status=status, primal_res=pr, dual_res=dr, iterations=it,
                   mode="domain", y=y, X_partial=X_partial,
                   clique_vars=[lay.clique_matrix(Xk, k) for k in range(len(lay.cliques))],
                   dual_objective=float(b @ y) if p.m else 0.0, history=hist)
    if complete:
        sol.X_completed = _complete(d, X_partial)
    return sol


def solve_range(d: DecomposedSdp, settings: AdmmSettings = AdmmSettings(),
                complete: bool = False) -> Solution:
    if d.mode != "range":
        raise ValueError("solve_range requires a range-mode decomposition")
    p = d.base
    lay = _layout(d)
    c = lay.svec_matrix(p.C)
    A = _constraint_matrix(lay, p)
    kkt = _Kkt(A, lay.D, settings.allow_dependent)
    b = p.b
    rho = settings.rho
    y = np.zeros(p.m)
    z = np.zeros(lay.total)
    lam = np.zeros(lay.total)
    u = np.zeros(lay.N)
    fh, writer = _open_log(settings)
    status, pr, dr, hist = "MaxIter", math.inf, math.inf, []
    it = 0
    try:
        for it in range(1, settings.max_iter + 1):
            w = z + lam
            s = lay.scatter(w)
            if p.m:
                y = kkt.solve(b / rho - A @ ((s - c) / lay.D))
                u = rho * (A.T @ y + s - c) / lay.D
            else:
                u = rho * (s - c) / lay.D
            v = w - u[lay.gidx] / rho
            z_old = z
            z = lay.project(v - lam)
            lam = lam + z - v
            if it % settings.check_every == 0 or it == settings.max_iter:
                r_cl = lay.seg_norms(z - v)
                pr = float(np.sqrt(np.sum(r_cl ** 2)))
                dr = float(rho * np.linalg.norm(lay.scatter(z - z_old)))
                obj = float(b @ y)
                hist.append((it, pr, dr, obj, rho))
                if writer:
                    writer.writerow([it, repr(pr), repr(dr), repr(obj), repr(rho)])
                log.debug("iter %d primal %.3e dual %.3e obj %.8g rho %g", it, pr, dr, obj, rho)
                dual_scale = float(np.linalg.norm(rho * lay.scatter(lam)))
                if _converged(lay, z, v, r_cl, settings, dr, dual_scale):
                    status = "Solved"
                    break
                if settings.adaptive_rho:
                    if pr > 10 * dr:
                        rho *= 2.0
                        lam /= 2.0
                    elif dr > 10 * pr:
                        rho /= 2.0
                        lam *= 2.0
    finally:
        if fh:
            fh.close()
    X_partial = lay.to_sparse(p.n, d.pattern, u)
    sol = Solution(objective=float(b @ y), status=status, primal_res=pr, dual_res=dr, iterations=it,
                   mode="range", y=y, X_partial=X_partial,
                   clique_vars=[lay.clique_matrix(z, k) for k in range(len(lay.cliques))],
                   dual_objective=float(b @ y), history=hist)
    if complete:
        sol.X_completed = _complete(d, X_partial)
    return sol


def solve(d: DecomposedSdp, settings: AdmmSettings = AdmmSettings(), complete: bool = False) -> Solution:
    return (solve_domain if d.mode == "domain" else solve_range)(d, settings, complete)


def solve_dense(p: SdpProblem, mode: str = "domain", settings: AdmmSettings = AdmmSettings()) -> Solution:
    """ADMM without decomposition: one clique per declared PSD block."""
    d = decompose_with_cliques(p, p.blocks(), mode)
    return solve(d, settings)


def _complete(d: DecomposedSdp, X: SparseSymMatrix) -> np.ndarray | None:
    # clip tiny negative eigenvalues from finite-precision iterates before completing
    D = X.to_dense()
    for c in d.cliques:
        idx = np.ix_(c, c)
        D[idx] = psd_project(D[idx])
    Xc = SparseSymMatrix.from_dense(D, d.pattern)
    try:
        return max_det_complete(Xc, d.tree)
    except InfeasibleCompletion:
        return None
