"""Undirected graphs, elimination orderings, maximal cliques and clique trees.

Vertices are 0-based throughout the library; the text formats and the CLI
translate to and from 1-based labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, DisconnectedCliques, NotPerfectOrdering, ParseError

HEURISTICS = ("mcs-fill", "min-degree", "complete-components")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with sorted neighbour tuples. Self-loops are implicit."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise DimensionMismatch(f"adjacency has {len(self.adjacency)} rows, expected {self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionMismatch(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                continue
            nbrs[i].add(j)
            nbrs[j].add(i)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def from_adjacency_matrix(cls, adj) -> "Graph":
        A = np.asarray(adj, dtype=bool)
        A = A | A.T
        np.fill_diagonal(A, False)
        return cls(A.shape[0], tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in A))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, combinations(range(n), 2))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.adjacency[i] if i < j]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return True
        row = self.adjacency[i]
        k = np.searchsorted(row, j)
        return k < len(row) and row[k] == j

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=bool)
        for i, row in enumerate(self.adjacency):
            A[i, list(row)] = True
        return A

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(self.n + 1, np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
        indices = np.fromiter((j for a in self.adjacency for j in a), np.int64, count=int(indptr[-1]))
        return indptr, indices

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise DimensionMismatch("graph sizes differ")
        return Graph.from_edges(self.n, self.edges() + other.edges())

    def contains(self, other: "Graph") -> bool:
        return other.n == self.n and all(self.has_edge(i, j) for i, j in other.edges())

    def components(self) -> list[list[int]]:
        seen = np.zeros(self.n, bool)
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self.adjacency[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps


# A sparsity pattern is a graph whose diagonal is implicitly present.
SparsityPattern = Graph


@dataclass(frozen=True)
class Ordering:
    """Elimination ordering: ``perm[k]`` is the vertex eliminated k-th."""

    perm: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise DimensionMismatch("ordering is not a permutation")

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.perm)

    @property
    def position(self) -> np.ndarray:
        pos = np.empty(len(self.perm), np.int64)
        pos[list(self.perm)] = np.arange(len(self.perm))
        return pos


@dataclass(frozen=True)
class CliqueSet:
    cliques: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, cliques: Iterable[Iterable[int]]) -> "CliqueSet":
        return cls(tuple(tuple(sorted(int(v) for v in c)) for c in cliques))

    def __len__(self) -> int:
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def __getitem__(self, k):
        return self.cliques[k]

    def sizes(self) -> list[int]:
        return [len(c) for c in self.cliques]

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(c) for c in self.cliques}

    def covered_pattern(self, n: int) -> Graph:
        return Graph.from_edges(n, (e for c in self.cliques for e in combinations(c, 2)))


@dataclass(frozen=True)
class CliqueTree:
    nodes: CliqueSet
    parent: tuple[int, ...]  # -1 for roots
    separators: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def roots(self) -> list[int]:
        return [k for k, p in enumerate(self.parent) if p < 0]

    @property
    def is_forest(self) -> bool:
        return len(self.roots) > 1

    def children(self, k: int) -> list[int]:
        return [c for c, p in enumerate(self.parent) if p == k]

    def edges(self) -> list[tuple[int, int]]:
        """Tree edges as (child, parent) pairs."""
        return [(c, p) for c, p in enumerate(self.parent) if p >= 0]

    def topological_order(self) -> list[int]:
        """Parents before children."""
        kids: list[list[int]] = [[] for _ in self.parent]
        for c, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(c)
        out = []
        for r in self.roots:
            stack = [r]
            while stack:
                k = stack.pop()
                out.append(k)
                stack.extend(reversed(kids[k]))
        return out

    def path(self, i: int, j: int) -> list[int] | None:
        """Clique indices on the tree path from i to j (inclusive); None if disconnected."""
        def up(k):
            chain = [k]
            while self.parent[chain[-1]] >= 0:
                chain.append(self.parent[chain[-1]])
            return chain
        a, b = up(i), up(j)
        if a[-1] != b[-1]:
            return None
        common = set(a) & set(b)
        lca = next(k for k in a if k in common)
        return a[: a.index(lca) + 1] + list(reversed(b[: b.index(lca)]))


@dataclass(frozen=True)
class Partition:
    """Integer partition of n into consecutive blocks."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if not self.sizes or any(int(s) < 1 for s in self.sizes):
            raise ValueError("partition sizes must be positive")

    @classmethod
    def of(cls, sizes: Iterable[int]) -> "Partition":
        return cls(tuple(int(s) for s in sizes))

    @classmethod
    def unit(cls, n: int) -> "Partition":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def p(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.sizes)[:-1]]))

    def block(self, i: int) -> list[int]:
        o = self.offsets[i]
        return list(range(o, o + self.sizes[i]))

    def lift(self, block_clique: Iterable[int]) -> tuple[int, ...]:
        return tuple(v for i in sorted(block_clique) for v in self.block(i))

    def lifted_size(self, block_clique: Iterable[int]) -> int:
        return sum(self.sizes[i] for i in block_clique)

    def refines(self, coarse: "Partition") -> bool:
        return partition_refines(self, coarse)


def partition_refines(fine: Partition, coarse: Partition) -> bool:
    """True iff every block of ``coarse`` is a contiguous union of blocks of ``fine``."""
    if fine.n != coarse.n:
        raise DimensionMismatch(f"partitions of different totals: {fine.n} vs {coarse.n}")
    cuts_fine = set(np.cumsum(fine.sizes).tolist())
    return set(np.cumsum(coarse.sizes).tolist()) <= cuts_fine


# ------------------------------------------------------------------- orderings

def mcs(g: Graph) -> Ordering:
    """Maximum cardinality search; ties go to the smallest vertex index."""
    if g.n == 0:
        return Ordering(())
    indptr, indices = g.csr()
    return Ordering(tuple(int(v) for v in _kernels.mcs_order(indptr, indices, g.n)))


def higher_neighbors(g: Graph, order: Ordering) -> list[list[int]]:
    pos = order.position
    return [[u for u in g.adjacency[v] if pos[u] > pos[v]] for v in range(g.n)]


def verify_peo(g: Graph, order: Ordering) -> bool:
    if len(order) != g.n:
        raise DimensionMismatch(f"ordering of length {len(order)} for a graph with {g.n} vertices")
    pos = order.position
    for v in order.perm:
        later = [u for u in g.adjacency[v] if pos[u] > pos[v]]
        if len(later) < 2:
            continue
        first = min(later, key=lambda u: pos[u])
        adj_first = set(g.adjacency[first])
        if any(u != first and u not in adj_first for u in later):
            return False
    return True


def is_chordal(g: Graph) -> bool:
    return verify_peo(g, mcs(g))


def chordal_extension(g: Graph, heuristic: str = "min-degree") -> Graph:
    if heuristic == "complete-components":
        return Graph.from_edges(g.n, (e for comp in g.components() for e in combinations(comp, 2)))
    if heuristic == "mcs-fill":
        filled, _ = _kernels.eliminate(g.adjacency_matrix(), order=mcs(g).perm)
    elif heuristic == "min-degree":
        filled, _ = _kernels.eliminate(g.adjacency_matrix(), min_degree=True)
    else:
        raise ValueError(f"unknown heuristic {heuristic!r}; choose from {HEURISTICS}")
    return Graph.from_adjacency_matrix(filled)


def maximal_cliques(g: Graph, order: Ordering) -> CliqueSet:
    """Maximal cliques read off a perfect elimination ordering."""
    if not verify_peo(g, order):
        raise NotPerfectOrdering("ordering is not a perfect elimination ordering")
    pos = order.position
    cands = []
    for v in order.perm:
        cands.append(frozenset([v, *(u for u in g.adjacency[v] if pos[u] > pos[v])]))
    out: list[frozenset[int]] = []
    for i, c in enumerate(cands):
        # c is maximal unless it sits inside the candidate of an earlier vertex
        if any(c < d for d in cands[:i]) or c in out:
            continue
        out.append(c)
    return CliqueSet.of(out)


def cliques_of(g: Graph) -> tuple[Ordering, CliqueSet]:
    order = mcs(g)
    return order, maximal_cliques(g, order)


def clique_tree(cs: CliqueSet, strict: bool = False) -> CliqueTree:
    """Maximum-weight spanning tree (forest) over clique intersection sizes."""
    t = len(cs)
    sets = [set(c) for c in cs]
    cand = []
    for i in range(t):
        for j in range(i + 1, t):
            w = len(sets[i] & sets[j])
            if w:
                cand.append((-w, i, j))
    cand.sort()
    root = list(range(t))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    nbrs: list[list[int]] = [[] for _ in range(t)]
    for _, i, j in cand:
        a, b = find(i), find(j)
        if a != b:
            root[a] = b
            nbrs[i].append(j)
            nbrs[j].append(i)
    parent = [-1] * t
    seen = [False] * t
    n_roots = 0
    for r in range(t):
        if seen[r]:
            continue
        n_roots += 1
        seen[r] = True
        stack = [r]
        while stack:
            k = stack.pop()
            for c in sorted(nbrs[k]):
                if not seen[c]:
                    seen[c] = True
                    parent[c] = k
                    stack.append(c)
    if strict and n_roots > 1:
        raise DisconnectedCliques(f"cliques form a forest with {n_roots} components")
    seps = tuple(tuple(sorted(sets[c] & sets[p])) if p >= 0 else () for c, p in enumerate(parent))
    return CliqueTree(cs, tuple(parent), seps)


def merge_cliques(ct: CliqueTree, threshold: float = float("inf")) -> CliqueSet:
    """Greedy parent-child merging, leaves first."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if np.isinf(threshold):
        return ct.nodes
    sets = [set(c) for c in ct.nodes]
    parent = list(ct.parent)
    alive = [True] * len(sets)
    for c in reversed(ct.topological_order()):
        p = parent[c]
        if p < 0:
            continue
        inter = len(sets[c] & sets[p])
        if len(sets[c] | sets[p]) <= len(sets[c]) + len(sets[p]) - threshold * inter:
            sets[p] |= sets[c]
            alive[c] = False
            for k, q in enumerate(parent):
                if q == c:
                    parent[k] = p
    return CliqueSet.of(s for s, a in zip(sets, alive) if a)


def lift_partition_graph(g: Graph, part: Partition) -> tuple[Graph, list[tuple[int, ...]]]:
    """Scalar graph induced by a block graph; also returns each block's scalar indices."""
    if g.n != part.p:
        raise DimensionMismatch(f"block graph has {g.n} vertices but partition has {part.p} blocks")
    blocks = [tuple(part.block(i)) for i in range(part.p)]
    edges = [e for b in blocks for e in combinations(b, 2)]
    for i, j in g.edges():
        edges.extend((u, v) for u in blocks[i] for v in blocks[j])
    return Graph.from_edges(part.n, edges), blocks


# -------------------------------------------------------------------- text I/O

def read_graph(text: str) -> Graph:
    lines = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, t) for k, t in lines if t and not t[0].startswith(("#", "%"))]
    if not lines:
        raise ParseError("empty graph file", 1)
    k0, head = lines[0]
    try:
        n, m = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise ParseError("expected header 'n m'", k0) from None
    if len(lines) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(lines) - 1}", k0)
    edges = []
    for k, tok in lines[1:]:
        try:
            i, j = int(tok[0]), int(tok[1])
        except (ValueError, IndexError):
            raise ParseError("expected edge 'i j'", k) from None
        if not (1 <= i < j <= n):
            raise ParseError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {n}", k)
        edges.append((i - 1, j - 1))
    return Graph.from_edges(n, edges)


def write_graph(g: Graph) -> str:
    es = g.edges()
    return "\n".join([f"{g.n} {len(es)}"] + [f"{i + 1} {j + 1}" for i, j in es]) + "\n"


def clique_intersection_property(ct: CliqueTree) -> bool:
    sets = [set(c) for c in ct.nodes]
    for i, j in combinations(range(len(sets)), 2):
        inter = sets[i] & sets[j]
        if not inter:
            continue
        path = ct.path(i, j)
        if path is None or any(not inter <= sets[k] for k in path):
            return False
    return True


def ordering_from_labels(labels: Sequence[int]) -> Ordering:
    """Build an Ordering from 1-based vertex labels."""
    return Ordering(tuple(int(v) - 1 for v in labels))
