"""Gram SDPs with clique-based decompositions, and their solution.

A program has PSD blocks S_k whose rows and columns carry labels (an exponent, or a
(matrix row, exponent) pair) and an optional polynomial weight g. Coefficient rows
match the weighted sum of the quadratic forms to a target polynomial (or matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from ..admm import AdmmSettings
from ..errors import SupportNotCovered
from ..feasibility import FEAS_SETTINGS, block_feasibility
from ..graph import CliqueSet, Graph
from ..sdp import SdpProblem
from ..sparse import SparseSymMatrix
from .poly import Exponent, ExponentSet, Polynomial, add


@dataclass(frozen=True)
class GramBlock:
    labels: tuple  # exponents, or (row, exponent) pairs in matrix mode
    weight: Polynomial | None = None
    group: int = 0
    clique: int = 0


@dataclass
class GramSdp:
    basis: ExponentSet | None
    sparsity: Graph | None
    cliques: CliqueSet | None
    blocks: list[GramBlock]
    keys: list[Hashable]
    targets: list[Fraction]
    rows: list[dict[tuple[int, int, int], float]]  # (block, a, b) with a <= b -> coefficient on S[a, b]
    matrix_mode: bool = False
    n_vars: int = 0

    @property
    def block_sizes(self) -> list[int]:
        return [len(b.labels) for b in self.blocks]

    def to_sdp(self) -> SdpProblem:
        sizes = self.block_sizes
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        N = int(offsets[-1])
        A = []
        for row in self.rows:
            ent = {}
            for (k, a, b), c in row.items():
                o = offsets[k]
                ent[(o + a, o + b)] = c if a == b else c / 2.0
            A.append(SparseSymMatrix.from_entries(N, ent))
        b = np.array([float(t) for t in self.targets])
        return SdpProblem(N, SparseSymMatrix.from_entries(N, {}), tuple(A), b, tuple(sizes) or None)


def _form_terms(block: GramBlock, matrix_mode: bool):
    """Yield (a, b, key, coef) for each upper entry: S[a,b] contributes coef to coefficient key."""
    labels = block.labels
    wt = block.weight.terms.items() if block.weight is not None else None
    for a in range(len(labels)):
        for b in range(a, len(labels)):
            if matrix_mode:
                (r, ea), (s, eb) = labels[a], labels[b]
                mult = 2.0 if (a != b and r == s) else 1.0
                base_key = (min(r, s), max(r, s))
                e = add(ea, eb)
            else:
                mult = 1.0 if a == b else 2.0
                base_key = None
                e = add(labels[a], labels[b])
            if wt is None:
                yield a, b, (base_key, e) if matrix_mode else e, mult
            else:
                for d, c in wt:
                    ed = add(e, d)
                    yield a, b, (base_key, ed) if matrix_mode else ed, mult * float(c)


def assemble(blocks: Sequence[GramBlock], target: dict[Hashable, Fraction], *, basis=None, sparsity=None,
             cliques=None, matrix_mode: bool = False, n_vars: int = 0) -> GramSdp:
    """Rows for every key reached by some block; target keys nobody reaches raise SupportNotCovered."""
    rows: dict[Hashable, dict[tuple[int, int, int], float]] = {}
    for k, blk in enumerate(blocks):
        for a, b, key, c in _form_terms(blk, matrix_mode):
            r = rows.setdefault(key, {})
            r[(k, a, b)] = r.get((k, a, b), 0.0) + c
    uncovered = sorted(k for k, v in target.items() if v != 0 and k not in rows)
    if uncovered:
        raise SupportNotCovered(uncovered)
    keys = sorted(rows)
    return GramSdp(basis, sparsity, cliques, list(blocks), keys, [target.get(k, Fraction(0)) for k in keys],
                   [{kk: v for kk, v in rows[k].items() if v != 0} for k in keys], matrix_mode, n_vars)


def gram_sdp(f: Polynomial, B: ExponentSet, edges: Graph | None = None,
             cliques: CliqueSet | None = None) -> GramSdp:
    """Gram program for f over basis B with Q = sum_k E_k' S_k E_k on the cliques of ``edges``."""
    from .sparsity import graph_cliques

    if edges is None:
        edges = Graph.complete(len(B))
    if edges.n != len(B):
        raise ValueError(f"edge graph has {edges.n} vertices, basis has {len(B)}")
    reach = {add(b, b) for b in B} | {add(B[i], B[j]) for i, j in edges.edges()}
    missing = sorted(e for e in f.terms if e not in reach)
    if missing:
        raise SupportNotCovered(missing)
    cs = cliques if cliques is not None else graph_cliques(edges)
    blocks = [GramBlock(tuple(B[i] for i in c), None, 0, k) for k, c in enumerate(cs)]
    return assemble(blocks, dict(f.terms), basis=B, sparsity=edges, cliques=cs, n_vars=f.n)


@dataclass
class GramSolution:
    status: str  # Feasible | Infeasible
    residual: float  # solver residual on the coefficient rows
    certificate_residual: float  # independent ‖target - Σ weighted σ‖∞ on coefficients
    blocks: list[np.ndarray]
    program: GramSdp
    iterations: int = 0
    tolerance: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"

    def sigmas(self) -> list[dict]:
        """Float coefficient maps of each weighted block term g_k σ_k."""
        return [block_polynomial(blk, S, self.program.matrix_mode)
                for blk, S in zip(self.program.blocks, self.blocks)]


def block_polynomial(blk: GramBlock, S: np.ndarray, matrix_mode: bool = False) -> dict:
    """Expand g · (labels)' S (labels) into a coefficient map, independently of the row assembly."""
    out: dict = {}
    L = blk.labels
    for a in range(len(L)):
        for b in range(len(L)):
            v = float(S[a, b])
            if v == 0.0:
                continue
            if matrix_mode:
                (r, ea), (s, eb) = L[a], L[b]
                if r > s:
                    continue
                key0, e = (r, s), add(ea, eb)
            else:
                key0, e = None, add(L[a], L[b])
            terms = blk.weight.terms.items() if blk.weight is not None else [((0,) * len(e), Fraction(1))]
            for d, c in terms:
                key = (key0, add(e, d)) if matrix_mode else add(e, d)
                out[key] = out.get(key, 0.0) + v * float(c)
    return out


def certificate_residual(program: GramSdp, blocks: Sequence[np.ndarray]) -> float:
    total: dict = {}
    for blk, S in zip(program.blocks, blocks):
        for k, v in block_polynomial(blk, S, program.matrix_mode).items():
            total[k] = total.get(k, 0.0) + v
    target = {k: float(t) for k, t in zip(program.keys, program.targets)}
    keys = set(total) | set(target)
    return max((abs(total.get(k, 0.0) - target.get(k, 0.0)) for k in keys), default=0.0)


def solve_gram(program: GramSdp, settings: AdmmSettings = FEAS_SETTINGS, tol: float | None = None) -> GramSolution:
    """Feasible iff the PSD certificate reproduces the target to 1e-6 (1 + max|target|)."""
    scale = max((abs(float(t)) for t in program.targets), default=0.0)
    if tol is None:
        tol = 1e-6 * (1.0 + scale)
    if not program.blocks:
        res = max((abs(float(t)) for t in program.targets), default=0.0)
        return GramSolution("Feasible" if res <= tol else "Infeasible", res, res, [], program, 0, tol)
    r = block_feasibility(program.to_sdp(), settings, tol=tol)
    cert = certificate_residual(program, r.blocks)
    ok = r.residual <= tol and cert <= tol
    return GramSolution("Feasible" if ok else "Infeasible", r.residual, cert, r.blocks, program, r.iterations, tol)
