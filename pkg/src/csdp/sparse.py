"""Sparse symmetric matrices on a pattern and the chordal matrix machinery:
zero-fill Cholesky, clique decomposition, completion and barrier helpers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    InfeasibleCompletion,
    NotChordal,
    NotPerfectOrdering,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    ParseError,
    SingularSeparator,
)
from .graph import (
    CliqueSet,
    CliqueTree,
    Graph,
    Ordering,
    Partition,
    SparsityPattern,
    chordal_extension,
    is_chordal,
    mcs,
    verify_peo,
)

PSD_RTOL = 1e-8


def psd_tol(M: np.ndarray) -> float:
    """Scale-aware tolerance used for every PSD decision in the package."""
    scale = float(np.max(np.abs(M))) if np.size(M) else 0.0
    return PSD_RTOL * max(1.0, scale)


def zero_pivot_tol(M: np.ndarray) -> float:
    """Pivots at rounding level are exact zeros; larger ones keep their column so L L' stays exact."""
    scale = float(np.max(np.abs(M))) if np.size(M) else 0.0
    return 64.0 * np.finfo(float).eps * max(1, np.shape(M)[0]) * max(1.0, scale)


def min_eig(M: np.ndarray) -> float:
    if np.size(M) == 0:
        return 0.0
    return float(np.linalg.eigvalsh(M)[0])


def is_psd(M: np.ndarray) -> bool:
    return min_eig(M) >= -psd_tol(M)


@dataclass(frozen=True, eq=False)
class SparseSymMatrix:
    """Symmetric matrix with upper-triangle triplets (i <= j) on ``pattern``."""

    pattern: SparsityPattern
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        for i, j in zip(self.rows, self.cols):
            if i > j or not self.pattern.has_edge(int(i), int(j)):
                raise DimensionMismatch(f"entry ({i}, {j}) is not on the pattern")

    @property
    def n(self) -> int:
        return self.pattern.n

    @classmethod
    def from_entries(cls, n: int, entries: Mapping[tuple[int, int], float] | Iterable,
                     pattern: Graph | None = None) -> "SparseSymMatrix":
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict[tuple[int, int], float] = {}
        for (i, j), v in items:
            i, j = (int(i), int(j)) if i <= j else (int(j), int(i))
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionMismatch(f"entry ({i}, {j}) out of range for n={n}")
            acc[(i, j)] = acc.get((i, j), 0.0) + float(v)
        keys = sorted(k for k, v in acc.items() if v != 0.0)
        if pattern is None:
            pattern = Graph.from_edges(n, [k for k in keys if k[0] != k[1]])
        r = np.array([k[0] for k in keys], np.int64)
        c = np.array([k[1] for k in keys], np.int64)
        v = np.array([acc[k] for k in keys], float)
        return cls(pattern, r, c, v)

    @classmethod
    def from_dense(cls, D, pattern: Graph | None = None) -> "SparseSymMatrix":
        D = np.asarray(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise DimensionMismatch("expected a square matrix")
        n = D.shape[0]
        if pattern is not None and pattern.n != n:
            raise DimensionMismatch("pattern size does not match matrix")
        iu, ju = np.triu_indices(n)
        vals = D[iu, ju]
        keep = vals != 0.0
        if pattern is not None:
            onp = np.array([pattern.has_edge(int(i), int(j)) for i, j in zip(iu, ju)], bool)
            keep &= onp
        entries = {(int(i), int(j)): float(v) for i, j, v in zip(iu[keep], ju[keep], vals[keep])}
        return cls.from_entries(n, entries, pattern)

    @classmethod
    def zeros(cls, pattern: Graph) -> "SparseSymMatrix":
        e = np.zeros(0, np.int64)
        return cls(pattern, e, e.copy(), np.zeros(0))

    def entries(self) -> dict[tuple[int, int], float]:
        return {(int(i), int(j)): float(v) for i, j, v in zip(self.rows, self.cols, self.vals)}

    def entry(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        hit = np.flatnonzero((self.rows == i) & (self.cols == j))
        return float(self.vals[hit[0]]) if hit.size else 0.0

    def to_dense(self) -> np.ndarray:
        D = np.zeros((self.n, self.n))
        D[self.rows, self.cols] = self.vals
        D[self.cols, self.rows] = self.vals
        return D

    def support(self) -> Graph:
        off = self.rows != self.cols
        return Graph.from_edges(self.n, zip(self.rows[off].tolist(), self.cols[off].tolist()))

    def with_pattern(self, pattern: Graph) -> "SparseSymMatrix":
        """Same values viewed on a larger pattern."""
        if not pattern.contains(self.support()):
            raise DimensionMismatch("new pattern does not contain the matrix support")
        return SparseSymMatrix(pattern, self.rows, self.cols, self.vals)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.vals))) if self.vals.size else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseSymMatrix):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols) and np.array_equal(self.vals, other.vals))

    def __repr__(self) -> str:
        return f"SparseSymMatrix(n={self.n}, nnz={self.vals.size})"


@dataclass(frozen=True)
class CholeskyFactor:
    """Zero-fill factor P Z Pᵀ = L Lᵀ; ``L`` is stored densely in permuted coordinates."""

    perm: Ordering
    L: np.ndarray
    higher: tuple[tuple[int, ...], ...]  # permuted row indices below each diagonal

    def pattern_ptr(self):
        ptr = np.zeros(len(self.higher) + 1, np.int64)
        ptr[1:] = np.cumsum([len(h) for h in self.higher])
        idx = np.fromiter((r for h in self.higher for r in h), np.int64, count=int(ptr[-1]))
        return ptr, idx


@dataclass(frozen=True)
class CliqueDecomposition:
    cliques: CliqueSet
    terms: tuple[np.ndarray, ...]

    def total(self, n: int) -> np.ndarray:
        Z = np.zeros((n, n))
        for c, T in zip(self.cliques, self.terms):
            Z[np.ix_(c, c)] += T
        return Z


@dataclass(frozen=True)
class CompletionReport:
    feasible: bool
    min_eigenvalues: tuple[float, ...]
    cliques: CliqueSet

    @property
    def worst_clique(self) -> int:
        return int(np.argmin(self.min_eigenvalues))


# ------------------------------------------------------------ basic operations

def project_pattern(dense, p: Graph) -> SparseSymMatrix:
    D = np.asarray(dense, dtype=float)
    if D.shape != (p.n, p.n):
        raise DimensionMismatch(f"matrix shape {D.shape} does not match pattern size {p.n}")
    return SparseSymMatrix.from_dense(D, p)


def extract(X: SparseSymMatrix | np.ndarray, c: Sequence[int]) -> np.ndarray:
    idx = np.asarray(sorted(c), np.int64)
    n = X.n if isinstance(X, SparseSymMatrix) else np.asarray(X).shape[0]
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise DimensionMismatch(f"clique index out of range for n={n}")
    D = X.to_dense() if isinstance(X, SparseSymMatrix) else np.asarray(X, float)
    return D[np.ix_(idx, idx)]


def inflate(Y, c: Sequence[int], n: int) -> SparseSymMatrix:
    Y = np.asarray(Y, dtype=float)
    c = sorted(int(v) for v in c)
    if Y.shape != (len(c), len(c)):
        raise DimensionMismatch(f"block of shape {Y.shape} for clique of size {len(c)}")
    if c and (c[0] < 0 or c[-1] >= n):
        raise DimensionMismatch(f"clique index out of range for n={n}")
    pattern = Graph.from_edges(n, combinations(c, 2))
    entries = {(c[a], c[b]): Y[a, b] for a in range(len(c)) for b in range(a, len(c))}
    return SparseSymMatrix.from_entries(n, entries, pattern)


def _lift(cs: CliqueSet, order: Ordering | None, part: Partition | None):
    if part is None:
        return cs, order
    lifted = CliqueSet.of(part.lift(c) for c in cs)
    lorder = None
    if order is not None:
        lorder = Ordering(tuple(v for b in order.perm for v in part.block(b)))
    return lifted, lorder


def _check_chordal_cover(n: int, cs: CliqueSet) -> Graph:
    G = cs.covered_pattern(n)
    if not is_chordal(G):
        raise NotChordal("clique set does not describe a chordal pattern")
    return G


# ------------------------------------------------------------------- Cholesky

def sparse_cholesky(Z: SparseSymMatrix, order: Ordering | None = None) -> CholeskyFactor:
    """Zero-fill Cholesky along a perfect elimination ordering of Z's pattern."""
    G = Z.pattern
    order = mcs(G) if order is None else order
    if len(order) != G.n:
        raise DimensionMismatch("ordering length does not match matrix size")
    if not verify_peo(G, order):
        raise NotPerfectOrdering("ordering is not a perfect elimination ordering of the pattern")
    perm = np.asarray(order.perm, np.int64)
    pos = order.position
    D = Z.to_dense()
    W = D[np.ix_(perm, perm)]
    higher = tuple(tuple(sorted(int(pos[u]) for u in G.adjacency[v] if pos[u] > pos[v])) for v in perm)
    fac = CholeskyFactor(order, np.zeros((G.n, G.n)), higher)
    ptr, idx = fac.pattern_ptr()
    L, bad = _kernels.cholesky(W, ptr, idx, psd_tol(D), zero_pivot_tol(D))
    if bad >= 0:
        raise NotPositiveSemidefinite(f"negative pivot at vertex {int(perm[bad])}")
    return CholeskyFactor(order, L, higher)


def chordal_decompose(Z: SparseSymMatrix, cs: CliqueSet, order: Ordering | None = None,
                      part: Partition | None = None) -> CliqueDecomposition:
    """Split a PSD matrix into PSD clique terms via the Cholesky columns."""
    cs_s, order_s = _lift(cs, order, part)
    G = _check_chordal_cover(Z.n, cs_s)
    if not G.contains(Z.support()):
        raise NotChordal("matrix support is not covered by the cliques")
    if order_s is None:
        order_s = mcs(G)
    elif not verify_peo(G, order_s):
        raise NotPerfectOrdering("ordering is not a perfect elimination ordering of the clique pattern")
    fac = sparse_cholesky(Z.with_pattern(G), order_s)
    perm = np.asarray(order_s.perm)
    sets = [set(c) for c in cs_s]
    local = [{v: a for a, v in enumerate(c)} for c in cs_s]
    terms = [np.zeros((len(c), len(c))) for c in cs_s]
    for j in range(Z.n):
        col = fac.L[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        verts = perm[nz]
        k = next((k for k, s in enumerate(sets) if s.issuperset(verts.tolist())), None)
        if k is None:  # cannot happen for a zero-fill factor
            raise NotChordal("Cholesky column not contained in any clique")
        loc = [local[k][int(v)] for v in verts]
        terms[k][np.ix_(loc, loc)] += np.outer(col[nz], col[nz])
    return CliqueDecomposition(cs_s, tuple(terms))


def completion_check(X: SparseSymMatrix, cs: CliqueSet, part: Partition | None = None) -> CompletionReport:
    cs_s, _ = _lift(cs, None, part)
    _check_chordal_cover(X.n, cs_s)
    D = X.to_dense()
    tol = psd_tol(D)
    eigs = tuple(min_eig(D[np.ix_(c, c)]) for c in cs_s)
    return CompletionReport(all(e >= -tol for e in eigs), eigs, cs_s)


def max_det_complete(X: SparseSymMatrix, ct: CliqueTree) -> np.ndarray:
    """Fill the unspecified entries clique by clique along the tree (parents first)."""
    rep = completion_check(X, ct.nodes)
    if not rep.feasible:
        raise InfeasibleCompletion(
            f"clique {list(ct.nodes[rep.worst_clique])} has min eigenvalue {min(rep.min_eigenvalues):.3g}")
    F = X.to_dense()
    tol = psd_tol(F)
    placed: dict[int, list[int]] = {}  # root -> vertices already completed in that subtree
    root_of = {}
    for k in ct.topological_order():
        c = list(ct.nodes[k])
        p = ct.parent[k]
        root_of[k] = k if p < 0 else root_of[p]
        done = placed.setdefault(root_of[k], [])
        if p >= 0:
            S = sorted(set(c) & set(ct.nodes[p]))
            U = sorted(set(c) - set(S))
            inside = set(c)
            others = sorted(v for v in done if v not in inside)
            if U and others:
                XSS = F[np.ix_(S, S)]
                if S and min_eig(XSS) <= tol:
                    warnings.warn(SingularSeparator(f"singular separator {S}; using pseudoinverse"),
                                  stacklevel=2)
                if S:
                    block = F[np.ix_(U, S)] @ np.linalg.pinv(XSS) @ F[np.ix_(S, others)]
                else:
                    block = np.zeros((len(U), len(others)))
                F[np.ix_(U, others)] = block
                F[np.ix_(others, U)] = block.T
        done.extend(v for v in c if v not in set(done))
    return F


# ------------------------------------------------------------------- barrier

def barrier_value(Z: SparseSymMatrix, fac: CholeskyFactor | None = None) -> float:
    """-log det Z computed from the zero-fill factor."""
    if fac is None:
        Z, order = _chordal_view(Z)
        fac = sparse_cholesky(Z, order)
    d = np.diag(fac.L)
    if np.any(d <= 0.0):
        raise NotPositiveDefinite("matrix is singular or indefinite")
    return float(-2.0 * np.sum(np.log(d)))


def projected_inverse(Z: SparseSymMatrix) -> SparseSymMatrix:
    """Entries of Z⁻¹ on Z's pattern (the barrier gradient is the negation)."""
    Zc, order = _chordal_view(Z)
    try:
        fac = sparse_cholesky(Zc, order)
    except NotPositiveSemidefinite as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    if np.any(np.diag(fac.L) <= 0.0):
        raise NotPositiveDefinite("matrix is singular")
    ptr, idx = fac.pattern_ptr()
    Sp = _kernels.projected_inverse(fac.L, ptr, idx)
    perm = np.asarray(order.perm)
    S = np.zeros_like(Sp)
    S[np.ix_(perm, perm)] = Sp
    return project_pattern(S, Z.pattern)


def _chordal_view(Z: SparseSymMatrix):
    G = Z.pattern
    order = mcs(G)
    if not verify_peo(G, order):
        G = chordal_extension(G, "min-degree")
        order = mcs(G)
        Z = Z.with_pattern(G)
    return Z, order


# ------------------------------------------------------------------- text I/O

def read_matrix(text: str) -> SparseSymMatrix:
    lines = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, t) for k, t in lines if t and not t[0].startswith(("#", "%"))]
    if not lines:
        raise ParseError("empty matrix file", 1)
    k0, head = lines[0]
    try:
        n, nnz = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise ParseError("expected header 'n nnz'", k0) from None
    if len(lines) - 1 != nnz:
        raise ParseError(f"header declares {nnz} entries, found {len(lines) - 1}", k0)
    entries = {}
    for k, tok in lines[1:]:
        try:
            i, j, v = int(tok[0]), int(tok[1]), float(tok[2])
        except (ValueError, IndexError):
            raise ParseError("expected triplet 'i j value'", k) from None
        if not (1 <= i <= j <= n):
            raise ParseError(f"entry ({i}, {j}) must satisfy 1 <= i <= j <= {n}", k)
        entries[(i - 1, j - 1)] = v
    return SparseSymMatrix.from_entries(n, entries)


def write_matrix(X: SparseSymMatrix) -> str:
    out = [f"{X.n} {X.vals.size}"]
    out += [f"{i + 1} {j + 1} {float(v)!r}" for i, j, v in zip(X.rows, X.cols, X.vals)]
    return "\n".join(out) + "\n"
