"""Factor-width-k and block factor-width-two cones: membership, dual checks and bound programs."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .admm import AdmmSettings, solve_domain
from .errors import DimensionMismatch
from .feasibility import assemble_clique_sum, clique_sum_problem
from .graph import CliqueSet, Partition, partition_refines
from .sdp import SdpProblem, decompose_blocks
from .sparse import SparseSymMatrix, extract, min_eig, psd_tol

__all__ = [
    "FwStructure",
    "FwMembership",
    "FwDualCheck",
    "fw_cliques",
    "fw_membership",
    "fw_dual_check",
    "fw_bound_program",
    "partition_refines",
    "convert_with_cliques",
    "MAX_WIDTH_CLIQUES",
]

MAX_WIDTH_CLIQUES = 20000
MEMBERSHIP_SETTINGS = AdmmSettings(eps_abs=1e-7, eps_rel=1e-7, max_iter=20000)


@dataclass(frozen=True)
class FwStructure:
    n: int
    k: int | None
    partition: Partition | None
    cliques: CliqueSet

    @property
    def mode(self) -> str:
        return "width" if self.k is not None else "block2"


def fw_cliques(n: int, mode: int | Partition | Sequence[int]) -> FwStructure:
    """All k-subsets (integer mode) or all pairwise block unions (partition mode), lexicographic."""
    if isinstance(mode, (int, np.integer)):
        k = int(mode)
        if k < 1 or k > n:
            raise DimensionMismatch(f"width k={k} must satisfy 1 <= k <= n={n}")
        if comb(n, k) > MAX_WIDTH_CLIQUES:
            raise ValueError(f"C({n},{k}) = {comb(n, k)} cliques exceeds {MAX_WIDTH_CLIQUES}; "
                             "use a block partition instead")
        return FwStructure(n, k, None, CliqueSet.of(combinations(range(n), k)))
    part = mode if isinstance(mode, Partition) else Partition.of(mode)
    if part.n != n:
        raise DimensionMismatch(f"partition {part.sizes} does not sum to n={n}")
    if part.p == 1:
        # a single block has no pairs; the cone is then the full PSD cone
        cl = [tuple(range(n))]
    else:
        cl = [tuple(part.block(i)) + tuple(part.block(j)) for i, j in combinations(range(part.p), 2)]
    return FwStructure(n, None, part, CliqueSet.of(cl))


@dataclass
class FwMembership:
    status: str  # Feasible | Infeasible | Unknown
    margin: float
    certificate: list[np.ndarray] | None
    cliques: CliqueSet

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"


def _check_sym(Z) -> np.ndarray:
    Z = np.asarray(Z, float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1] or not np.allclose(Z, Z.T, atol=1e-12):
        raise ValueError("expected a symmetric matrix")
    return (Z + Z.T) / 2


def repair_certificate(Z: np.ndarray, blocks: list[np.ndarray], cliques: CliqueSet) -> list[np.ndarray]:
    """Move the residual Z - sum inflate(X_k) onto the first clique owning each entry."""
    R = Z - assemble_clique_sum(blocks, cliques, Z.shape[0])
    out = [B.copy() for B in blocks]
    done = np.zeros(Z.shape, bool)
    for k, c in enumerate(cliques):
        idx = np.ix_(c, c)
        mask = ~done[idx]
        out[k][mask] += R[idx][mask]
        done[idx] = True
    return out


def fw_membership(Z, fw: FwStructure, settings: AdmmSettings = MEMBERSHIP_SETTINGS) -> FwMembership:
    """Decide Z in FW via the margin program  max t  s.t.  Z - tI = sum_k inflate(X_k)."""
    Z = _check_sym(Z)
    if Z.shape[0] != fw.n:
        raise DimensionMismatch(f"matrix is {Z.shape[0]}x{Z.shape[0]}, structure is for n={fw.n}")
    scale = max(1.0, float(np.max(np.abs(Z), initial=0.0)))
    p, keys, shift = clique_sum_problem(Z, fw.cliques, margin=True)
    covered = np.zeros(Z.shape, bool)
    for u, v in keys:
        covered[u, v] = covered[v, u] = True
    if np.any(np.abs(Z[~covered]) > 0):
        return FwMembership("Infeasible", -np.inf, None, fw.cliques)
    sol = solve_domain(decompose_blocks(p, "domain"), settings)
    t = float(sol.clique_vars[-1][0, 0]) - shift
    blocks = repair_certificate(Z, [np.asarray(B) for B in sol.clique_vars[:-1]], fw.cliques)
    cert_ok = all(min_eig(B) >= -1e-6 * scale for B in blocks)
    if cert_ok and t >= -1e-4 * scale:
        return FwMembership("Feasible", t, blocks, fw.cliques)
    if sol.status == "Solved" and t < -1e-4 * scale:
        return FwMembership("Infeasible", t, None, fw.cliques)
    return FwMembership("Unknown", t, None, fw.cliques)


def verify_certificate(Z, blocks: Sequence[np.ndarray], cliques, tol: float = 1e-8) -> bool:
    Z = np.asarray(Z, float)
    scale = max(1.0, float(np.max(np.abs(Z), initial=0.0)))
    S = assemble_clique_sum(blocks, cliques, Z.shape[0])
    return bool(np.max(np.abs(S - Z), initial=0.0) <= tol * scale
                and all(min_eig(B) >= -psd_tol(B) for B in blocks))


@dataclass
class FwDualCheck:
    feasible: bool
    min_eigenvalues: list[float]


def fw_dual_check(Z, fw: FwStructure) -> FwDualCheck:
    """Z in the dual cone iff every clique principal submatrix is PSD."""
    Z = _check_sym(Z)
    tol = psd_tol(Z)
    eigs = [min_eig(Z[np.ix_(c, c)]) for c in fw.cliques]
    return FwDualCheck(all(e >= -tol for e in eigs), eigs)


def convert_with_cliques(p: SdpProblem, cliques) -> SdpProblem:
    """Standard-form program over X_k = E_k X E_k' ⪰ 0 for every clique, with star consistency.

    Data entries go to the first clique containing them; each shared entry ties the first
    clique holding it to every other one, so the consistency rows are independent.
    """
    cs = cliques if isinstance(cliques, CliqueSet) else CliqueSet.of(cliques)
    sizes = [len(c) for c in cs]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    N = int(offsets[-1])
    local = [{v: a for a, v in enumerate(c)} for c in cs]
    holders: dict[tuple[int, int], list[int]] = {}
    for k, c in enumerate(cs):
        for a in range(len(c)):
            for b in range(a, len(c)):
                u, v = sorted((c[a], c[b]))
                holders.setdefault((u, v), []).append(k)

    def pos(k, u, v):
        a, b = sorted((offsets[k] + local[k][u], offsets[k] + local[k][v]))
        return a, b

    def split(M: SparseSymMatrix) -> SparseSymMatrix:
        ent = {}
        for u, v, val in zip(M.rows.tolist(), M.cols.tolist(), M.vals.tolist()):
            if (u, v) not in holders:
                raise DimensionMismatch(f"data entry ({u}, {v}) lies in no clique")
            ent[pos(holders[(u, v)][0], u, v)] = val
        return SparseSymMatrix.from_entries(N, ent)

    rows = []
    for (u, v), ks in sorted(holders.items()):
        w = 1.0 if u == v else 1.0 / np.sqrt(2.0)
        for k in ks[1:]:
            rows.append(SparseSymMatrix.from_entries(N, {pos(ks[0], u, v): w, pos(k, u, v): -w}))
    A = [split(a) for a in p.A] + rows
    return SdpProblem(N, split(p.C), tuple(A), np.concatenate([p.b, np.zeros(len(rows))]), tuple(sizes))


def fw_bound_program(p: SdpProblem, fw: FwStructure, side: str = "upper") -> SdpProblem:
    """Upper: X restricted to FW (per-clique variables, data by extraction). Lower: X in the dual cone."""
    if fw.n != p.n:
        raise DimensionMismatch(f"structure is for n={fw.n}, program has n={p.n}")
    if side == "upper":
        blocks = [list(c) for c in fw.cliques]
        sizes = [len(c) for c in blocks]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        N = int(offsets[-1])

        def restrict(M: SparseSymMatrix) -> SparseSymMatrix:
            D = M.to_dense()
            ent = {}
            for k, c in enumerate(blocks):
                sub = extract(D, c)
                o = offsets[k]
                for a in range(len(c)):
                    for b in range(a, len(c)):
                        if sub[a, b] != 0:
                            ent[(o + a, o + b)] = sub[a, b]
            return SparseSymMatrix.from_entries(N, ent)

        return SdpProblem(N, restrict(p.C), tuple(restrict(a) for a in p.A), p.b.copy(), tuple(sizes))
    if side == "lower":
        return convert_with_cliques(p, fw.cliques)
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
