"""Correlative and term sparsity: csp graphs, csp cliques and the TSSOS edge hierarchies."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from ..graph import CliqueSet, Graph, chordal_extension, is_chordal, maximal_cliques, mcs
from .poly import Exponent, ExponentSet, Polynomial, add, nnz


def graph_cliques(g: Graph) -> CliqueSet:
    """Maximal cliques: via a perfect elimination ordering when chordal, else Bron-Kerbosch."""
    if is_chordal(g):
        return maximal_cliques(g, mcs(g))
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    return CliqueSet.of(sorted(tuple(sorted(c)) for c in nx.find_cliques(G)))


def _support(obj) -> list[Exponent]:
    if isinstance(obj, Polynomial):
        return list(obj.terms)
    return [tuple(e) for e in obj]


def csp_graph(A, joint: bool = False, n: int | None = None) -> Graph:
    """Variable coupling graph. ``joint``: A = [f, g1, ..., gm], where each g_i couples all its variables."""
    if joint:
        polys = list(A)
        if not polys:
            raise ValueError("joint mode needs at least the objective polynomial")
        n = polys[0].n
        edges = {(i, j) for a in polys[0].terms for i, j in combinations(sorted(nnz(a)), 2)}
        for g in polys[1:]:
            edges.update(combinations(sorted(g.used_variables()), 2))
        return Graph.from_edges(n, edges)
    supp = _support(A)
    if n is None:
        n = A.n if isinstance(A, Polynomial) else (len(supp[0]) if supp else 0)
    return Graph.from_edges(n, {(i, j) for a in supp for i, j in combinations(sorted(nnz(a)), 2)})


def csp_cliques(B: ExponentSet, csp: CliqueSet | Graph) -> CliqueSet:
    """C_k = {beta in B : nnz(beta) within J_k}, as index sets into B."""
    J = graph_cliques(csp) if isinstance(csp, Graph) else csp
    out = []
    for jk in J:
        s = frozenset(jk)
        out.append(tuple(i for i, b in enumerate(B) if nnz(b) <= s))
    return CliqueSet.of(out)


def csp_admissible(e: Exponent, csp: Graph) -> bool:
    return all(csp.has_edge(i, j) for i, j in combinations(sorted(nnz(e)), 2))


def csp_edge_graph(B: ExponentSet, csp: Graph) -> Graph:
    """E_csp over basis indices: pairs whose sum only couples csp-adjacent variables."""
    return Graph.from_edges(len(B), ((i, j) for i, j in combinations(range(len(B)), 2)
                                     if csp_admissible(add(B[i], B[j]), csp)))


def _complete_components(g: Graph) -> Graph:
    return Graph.from_edges(g.n, (e for comp in g.components() for e in combinations(sorted(comp), 2)))


def _extend(g: Graph, ext: str) -> Graph:
    if ext == "block":
        return _complete_components(g)
    if ext == "chordal":
        return g if is_chordal(g) else chordal_extension(g, "min-degree")
    raise ValueError(f"extension must be 'block' or 'chordal', got {ext!r}")


def _support_graph(B: ExponentSet, target: set[Exponent]) -> Graph:
    return Graph.from_edges(len(B), ((i, j) for i, j in combinations(range(len(B)), 2)
                                     if add(B[i], B[j]) in target))


def _sums(B: ExponentSet, g: Graph) -> set[Exponent]:
    out = {add(b, b) for b in B}
    out.update(add(B[i], B[j]) for i, j in g.edges())
    return out


def tssos_edges(A, B: ExponentSet, ext: str = "block", max_iter: int | None = None,
                restrict: Graph | None = None) -> list[Graph]:
    """E_1, E_2, ... up to stabilization (the last graph repeats if iterated once more).

    Every basis element carries a self-loop, so 2B is always part of each support set.
    ``restrict`` intersects each E_k with a fixed edge set before the next support update.
    """
    supp = set(_support(A))
    target = {add(b, b) for b in B} | supp
    cap = max_iter if max_iter is not None else max(1, len(B) ** 2)
    out: list[Graph] = []
    for _ in range(cap):
        E = _extend(_support_graph(B, target), ext)
        if restrict is not None:
            E = Graph.from_edges(E.n, (e for e in E.edges() if restrict.has_edge(*e)))
        if out and E == out[-1]:
            break
        out.append(E)
        target = _sums(B, E)
    return out


def cs_tssos_edges(A, B: ExponentSet, ext: str = "block", csp: Graph | None = None,
                   max_iter: int | None = None, restrict_support: bool = False
                   ) -> tuple[ExponentSet, list[Graph]]:
    """TSSOS edges intersected with E_csp, after dropping csp-violating exponents from B.

    By default the support update uses the unrestricted E_k, so the result is literally
    E_k ∩ E_csp; ``restrict_support`` feeds the intersected graph back instead.
    """
    supp = _support(A)
    if csp is None:
        csp = csp_graph(supp, n=len(B[0]) if len(B) else 0)
    Bc = ExponentSet(b for b in B if csp_admissible(add(b, b), csp))
    Ecsp = csp_edge_graph(Bc, csp)
    if restrict_support:
        return Bc, tssos_edges(supp, Bc, ext, max_iter, restrict=Ecsp)
    seq = []
    for E in tssos_edges(supp, Bc, ext, max_iter):
        G = Graph.from_edges(E.n, (e for e in E.edges() if Ecsp.has_edge(*e)))
        if seq and G == seq[-1]:
            continue
        seq.append(G)
    return Bc, seq


def block_sizes(g: Graph) -> list[int]:
    return sorted((len(c) for c in graph_cliques(g)), reverse=True)


def sign_symmetries(f: Polynomial) -> list[tuple[int, ...]]:
    """All s in {±1}^n with f(s∘x) = f(x), as 0/1 flip masks (brute force; small n only)."""
    out = []
    for mask in range(1 << f.n):
        flips = tuple((mask >> i) & 1 for i in range(f.n))
        if all(sum(a * s for a, s in zip(e, flips)) % 2 == 0 for e in f.terms):
            out.append(flips)
    return out


def sign_orbit_partition(f: Polynomial, B: Sequence[Exponent]) -> list[list[int]]:
    """Group basis elements by their parity signature under every sign symmetry of f."""
    syms = sign_symmetries(f)
    groups: dict[tuple, list[int]] = {}
    for i, b in enumerate(B):
        key = tuple(sum(a * s for a, s in zip(b, flips)) % 2 for flips in syms)
        groups.setdefault(key, []).append(i)
    return sorted(groups.values())
