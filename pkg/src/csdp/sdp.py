"""Standard-form SDP data, aggregate sparsity, decompositions and clique-tree conversion.

Primal:  min <C, X>  s.t.  <A_i, X> = b_i,  X ⪰ 0
Dual:    max b'y     s.t.  Z + sum_i y_i A_i = C,  Z ⪰ 0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import sqrt
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .graph import (
    CliqueSet,
    CliqueTree,
    Graph,
    Ordering,
    chordal_extension,
    clique_tree,
    is_chordal,
    maximal_cliques,
    mcs,
    merge_cliques,
)
from .sparse import SparseSymMatrix

_ISQ2 = 1.0 / sqrt(2.0)


@dataclass(frozen=True, eq=False)
class SdpProblem:
    n: int
    C: SparseSymMatrix
    A: tuple[SparseSymMatrix, ...]
    b: np.ndarray
    block_structure: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        if self.C.n != self.n or any(a.n != self.n for a in self.A):
            raise DimensionMismatch("all data matrices must be n x n")
        if self.b.size != len(self.A):
            raise DimensionMismatch(f"b has length {self.b.size} but there are {len(self.A)} constraints")
        if self.block_structure is not None:
            bs = tuple(int(s) for s in self.block_structure)
            if sum(abs(s) for s in bs) != self.n or any(s == 0 for s in bs):
                raise DimensionMismatch(f"block structure {bs} does not cover n={self.n}")
            object.__setattr__(self, "block_structure", bs)

    @property
    def m(self) -> int:
        return len(self.A)

    def blocks(self) -> list[list[int]]:
        """Index sets of the PSD blocks (diagonal blocks expand to singletons)."""
        bs = self.block_structure or (self.n,)
        out, off = [], 0
        for s in bs:
            if s > 0:
                out.append(list(range(off, off + s)))
            else:
                out.extend([[off + k] for k in range(-s)])
            off += abs(s)
        return out

    def block_pattern(self) -> Graph:
        return Graph.from_edges(self.n, (e for blk in self.blocks() for e in combinations(blk, 2)))

    def objective(self, X: np.ndarray) -> float:
        return float(np.sum(self.C.to_dense() * X))

    def constraint_values(self, X: np.ndarray) -> np.ndarray:
        return np.array([np.sum(a.to_dense() * X) for a in self.A])

    def dense_data(self):
        return self.C.to_dense(), [a.to_dense() for a in self.A], self.b.copy()

    @classmethod
    def from_dense(cls, C, A: Sequence, b, block_structure=None) -> "SdpProblem":
        C = np.asarray(C, float)
        n = C.shape[0]
        return cls(n, SparseSymMatrix.from_dense(C), tuple(SparseSymMatrix.from_dense(a) for a in A),
                   np.asarray(b, float), block_structure)


@dataclass(frozen=True, eq=False)
class DecomposedSdp:
    base: SdpProblem
    pattern: Graph
    cliques: CliqueSet
    tree: CliqueTree
    mode: str
    order: Ordering | None = None

    def __post_init__(self):
        if self.mode not in ("domain", "range"):
            raise ValueError(f"mode must be 'domain' or 'range', got {self.mode!r}")


@dataclass(frozen=True, eq=False)
class ConvertedSdp:
    variables: tuple[int, ...]
    data: SdpProblem
    consistency_rows: tuple[int, ...]
    cliques: CliqueSet
    tree: CliqueTree
    offsets: tuple[int, ...] = field(default=())

    def block_of(self, X_blocks: np.ndarray, k: int) -> np.ndarray:
        o, s = self.offsets[k], self.variables[k]
        return X_blocks[o:o + s, o:o + s]


def aggregate_pattern(p: SdpProblem) -> Graph:
    edges = set()
    for M in (p.C, *p.A):
        off = M.rows != M.cols
        edges.update(zip(M.rows[off].tolist(), M.cols[off].tolist()))
    return Graph.from_edges(p.n, edges)


def _chordal_cliques(g: Graph, ext: str, merge_threshold: float):
    pattern = g if is_chordal(g) else chordal_extension(g, ext)
    order = mcs(pattern)
    cs = maximal_cliques(pattern, order)
    ct = clique_tree(cs)
    if not np.isinf(merge_threshold):
        cs = merge_cliques(ct, merge_threshold)
        pattern = cs.covered_pattern(g.n)
        order = mcs(pattern)
        cs = maximal_cliques(pattern, order)
        ct = clique_tree(cs)
    return pattern, order, cs, ct


def _decompose(p: SdpProblem, ext: str, mode: str, merge_threshold: float) -> DecomposedSdp:
    pattern, order, cs, ct = _chordal_cliques(aggregate_pattern(p), ext, merge_threshold)
    return DecomposedSdp(p, pattern, cs, ct, mode, order)


def domain_decompose(p: SdpProblem, ext: str = "min-degree",
                     merge_threshold: float = float("inf")) -> DecomposedSdp:
    return _decompose(p, ext, "domain", merge_threshold)


def range_decompose(p: SdpProblem, ext: str = "min-degree",
                    merge_threshold: float = float("inf")) -> DecomposedSdp:
    return _decompose(p, ext, "range", merge_threshold)


def decompose_with_cliques(p: SdpProblem, cliques, mode: str = "domain") -> DecomposedSdp:
    """Decomposition over a caller-supplied clique set (need not be chordal)."""
    cs = cliques if isinstance(cliques, CliqueSet) else CliqueSet.of(cliques)
    covered = cs.covered_pattern(p.n)
    if not covered.contains(aggregate_pattern(p)):
        raise DimensionMismatch("cliques do not cover the aggregate sparsity pattern")
    missing = set(range(p.n)) - {v for c in cs for v in c}
    if missing:
        raise DimensionMismatch(f"vertices {sorted(missing)} belong to no clique")
    return DecomposedSdp(p, covered, cs, clique_tree(cs), mode, None)


def decompose_blocks(p: SdpProblem, mode: str = "domain") -> DecomposedSdp:
    """Use the declared PSD blocks as cliques."""
    return decompose_with_cliques(p, p.blocks(), mode)


def clique_tree_convert(p: SdpProblem, ext: str = "min-degree", drop_redundant: bool = True,
                        decomposition: DecomposedSdp | None = None) -> ConvertedSdp:
    d = decomposition or domain_decompose(p, ext)
    cs, ct = d.cliques, d.tree
    sizes = tuple(len(c) for c in cs)
    offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(sizes)[:-1]])) if sizes else ()
    N = int(sum(sizes))
    local = [{v: a for a, v in enumerate(c)} for c in cs]
    sets = [set(c) for c in cs]

    def owner(u, v):
        return next(k for k, s in enumerate(sets) if u in s and v in s)

    def split(M: SparseSymMatrix) -> SparseSymMatrix:
        ent = {}
        for u, v, val in zip(M.rows.tolist(), M.cols.tolist(), M.vals.tolist()):
            k = owner(u, v)
            ent[(offsets[k] + local[k][u], offsets[k] + local[k][v])] = val
        return SparseSymMatrix.from_entries(N, ent)

    C = split(p.C)
    A = [split(a) for a in p.A]
    if drop_redundant:
        pairs = sorted((min(c, q), max(c, q)) for c, q in ct.edges())
    else:
        pairs = [(j, k) for j, k in combinations(range(len(cs)), 2) if sets[j] & sets[k]]
    rows = []
    for j, k in pairs:
        common = sorted(sets[j] & sets[k])
        for a, u in enumerate(common):
            for v in common[a:]:
                w = 1.0 if u == v else _ISQ2
                ent = {(offsets[j] + local[j][u], offsets[j] + local[j][v]): w,
                       (offsets[k] + local[k][u], offsets[k] + local[k][v]): -w}
                rows.append(SparseSymMatrix.from_entries(N, ent))
    data = SdpProblem(N, C, tuple(A + rows), np.concatenate([p.b, np.zeros(len(rows))]), sizes or None)
    cons = tuple(range(p.m, p.m + len(rows)))
    return ConvertedSdp(sizes, data, cons, cs, ct, offsets)
