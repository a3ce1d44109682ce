"""Feasibility of block-diagonal programs: find PSD blocks S_k with linear rows A x = b.

The ADMM iterate is polished by alternating affine and PSD projections, and the
reported residual is always measured on exactly PSD blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .admm import AdmmSettings, _constraint_matrix, _Kkt, _layout, solve_domain
from .errors import DimensionMismatch
from .graph import CliqueSet
from .sdp import SdpProblem, decompose_blocks
from .sparse import SparseSymMatrix

FEAS_SETTINGS = AdmmSettings(eps_abs=1e-9, eps_rel=1e-9, max_iter=20000, check_every=25)


@dataclass
class BlockFeasibility:
    status: str  # Feasible | Infeasible
    residual: float
    blocks: list[np.ndarray]
    iterations: int
    admm_status: str
    objective: float = 0.0
    history: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"


def block_feasibility(p: SdpProblem, settings: AdmmSettings = FEAS_SETTINGS, tol: float | None = None,
                      polish_iters: int = 200) -> BlockFeasibility:
    """Solve over the declared PSD blocks; Feasible iff max|A x - b| <= tol on PSD blocks."""
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.max(np.abs(p.b), initial=0.0)))
    d = decompose_blocks(p, "domain")
    sol = solve_domain(d, settings)
    lay = _layout(d)
    A = _constraint_matrix(lay, p)
    b = p.b
    z = np.concatenate([_svec(S) for S in sol.clique_vars]) if sol.clique_vars else np.zeros(0)
    x = lay.scatter(z) / lay.D

    def resid(xv):
        return float(np.max(np.abs(A @ xv - b), initial=0.0))

    best_x, best_r = x, resid(x)
    if best_r > tol and p.m and polish_iters:
        kkt = _Kkt(A, np.ones(lay.N), allow_dependent=True)
        for _ in range(polish_iters):
            x = x - A.T @ kkt.solve(A @ x - b)
            x = lay.scatter(lay.project(x[lay.gidx])) / lay.D
            r = resid(x)
            if r < best_r:
                best_x, best_r = x, r
            if r <= tol:
                break
    zb = best_x[lay.gidx]
    blocks = [lay.clique_matrix(zb, k) for k in range(len(lay.cliques))]
    return BlockFeasibility("Feasible" if best_r <= tol else "Infeasible", best_r, blocks,
                            sol.iterations, sol.status, sol.objective, sol.history)


def _svec(S: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(S.shape[0])
    return S[iu, ju] * np.where(iu == ju, 1.0, np.sqrt(2.0))


def clique_sum_problem(Z: np.ndarray, cliques, margin: bool = False
                       ) -> tuple[SdpProblem, list[tuple[int, int]], float]:
    """Block program for  Z - t I = sum_k inflate(X_k, C_k)  (t only when ``margin``).

    Returns the program, the entries of Z matched by its rows, and the diagonal shift
    used for the margin (t = tau - shift). Entries no clique covers are not rows;
    callers must check those are zero.
    """
    Z = np.asarray(Z, float)
    n = Z.shape[0]
    cs = cliques if isinstance(cliques, CliqueSet) else CliqueSet.of(cliques)
    if any(v < 0 or v >= n for c in cs for v in c):
        raise DimensionMismatch("clique index outside the matrix")
    sizes = [len(c) for c in cs]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    N = int(offsets[-1]) + (1 if margin else 0)
    occ: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for k, c in enumerate(cs):
        for a in range(len(c)):
            for b in range(a, len(c)):
                u, v = c[a], c[b]
                key = (min(u, v), max(u, v))
                la, lb = offsets[k] + a, offsets[k] + b
                occ.setdefault(key, []).append((min(la, lb), max(la, lb)))
    shift = 0.0
    if margin:
        # t = tau - shift with tau >= 0; Z + shift I is diagonally dominant, so tau = 0 is feasible
        off = np.sum(np.abs(Z), axis=1) - np.abs(np.diag(Z))
        shift = float(max(0.0, np.max(off - np.diag(Z), initial=0.0))) + 1.0
    keys = sorted(occ)
    A, b = [], []
    for (u, v) in keys:
        w = 1.0 if u == v else 0.5
        ent = {pos: w for pos in occ[(u, v)]}
        if margin and u == v:
            ent[(N - 1, N - 1)] = 1.0
        A.append(SparseSymMatrix.from_entries(N, ent))
        b.append(Z[u, v] + (shift if u == v else 0.0))
    C = SparseSymMatrix.from_entries(N, {(N - 1, N - 1): -1.0}) if margin else SparseSymMatrix.from_entries(N, {})
    bs = tuple(sizes) + ((1,) if margin else ())
    return SdpProblem(N, C, tuple(A), np.array(b), bs or None), keys, shift


def assemble_clique_sum(blocks: Sequence[np.ndarray], cliques, n: int) -> np.ndarray:
    Z = np.zeros((n, n))
    for S, c in zip(blocks, cliques):
        Z[np.ix_(list(c), list(c))] += S
    return Z
