"""End-to-end SOS pipelines: global sparse SOS, weighted SOS on semialgebraic sets,
sparse polynomial-matrix SOS and block-SDSOS."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from ..admm import AdmmSettings
from ..errors import ConstraintOutsideClique, NotChordal
from ..factorwidth import fw_cliques
from ..feasibility import FEAS_SETTINGS
from ..graph import CliqueSet, Graph, Partition, chordal_extension, is_chordal
from .gram import GramBlock, GramSdp, GramSolution, assemble, gram_sdp, solve_gram
from .newton import newton_basis
from .poly import ExponentSet, Polynomial, full_basis, nnz
from .sparsity import csp_cliques, csp_graph, cs_tssos_edges, graph_cliques, tssos_edges

STRATEGIES = ("dense", "newton", "csp", "tssos", "chordal-tssos", "cs-tssos")


@dataclass
class SosResult:
    strategy: str
    status: str
    basis: ExponentSet
    cliques: CliqueSet
    solution: GramSolution
    edges: list[Graph] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"

    @property
    def block_sizes(self) -> list[int]:
        return [len(c) for c in self.cliques]

    @property
    def residual(self) -> float:
        return self.solution.certificate_residual


def _tssos_cliques(edges: Graph, basis: ExponentSet) -> CliqueSet:
    return graph_cliques(edges)


def sos_program(f: Polynomial, strategy: str = "newton", step: int | None = None, newton: bool = True):
    """Basis, edge sequence and Gram program for a strategy; ``step`` picks a hierarchy level (1-based)."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    if f.degree() % 2:
        raise ValueError(f"SOS check needs even degree, got {f.degree()}")
    d = f.degree() // 2
    if strategy == "dense" or not newton:
        B = full_basis(f.n, d)
    else:
        B = newton_basis(f)
    seq: list[Graph] = []
    if strategy in ("dense", "newton"):
        E = Graph.complete(len(B))
        cs = CliqueSet.of([tuple(range(len(B)))]) if len(B) else CliqueSet.of([])
    elif strategy == "csp":
        g = csp_graph(f)
        cs = CliqueSet.of(c for c in csp_cliques(B, g) if c)
        E = cs.covered_pattern(len(B))
    elif strategy in ("tssos", "chordal-tssos"):
        seq = tssos_edges(f, B, "block" if strategy == "tssos" else "chordal")
        E = seq[(step or len(seq)) - 1] if seq else Graph(len(B), ())
        cs = graph_cliques(E)
    else:
        B, seq = cs_tssos_edges(f, B, "block", csp_graph(f))
        E = seq[(step or len(seq)) - 1] if seq else Graph(len(B), ())
        cs = graph_cliques(E)
    return B, seq, gram_sdp(f, B, E, cs)


def sos_check(f: Polynomial, strategy: str = "newton", settings: AdmmSettings = FEAS_SETTINGS,
              step: int | None = None, newton: bool = True) -> SosResult:
    B, seq, prog = sos_program(f, strategy, step, newton)
    sol = solve_gram(prog, settings)
    return SosResult(strategy, sol.status, B, prog.cliques, sol, seq)


# ---------------------------------------------------------------- weighted SOS

@dataclass(frozen=True)
class SemialgebraicSet:
    inequalities: tuple[Polynomial, ...]
    radii: tuple[float, ...] | None = None

    def __init__(self, inequalities: Sequence[Polynomial], radii=None):
        object.__setattr__(self, "inequalities", tuple(inequalities))
        object.__setattr__(self, "radii", tuple(radii) if radii is not None else None)


def _restricted_basis(n: int, deg: int, clique: frozenset[int] | None) -> tuple:
    B = full_basis(n, max(deg, 0)) if deg >= 0 else ExponentSet()
    return tuple(b for b in B if clique is None or nnz(b) <= clique)


def weighted_sos_assemble(f: Polynomial, K: SemialgebraicSet, omega: int, sparse: bool = False,
                          cliques: Sequence[Sequence[int]] | None = None) -> GramSdp:
    """f = sum_i g_i σ_i (dense) or sum_i sum_{k in N_i} g_i σ_{i,k}(x_{J_k}) (sparse), g_0 = 1.

    ``cliques`` overrides the maximal cliques of the joint csp graph in sparse mode.
    """
    gs = (Polynomial.constant(f.n, 1),) + tuple(K.inequalities)
    if 2 * omega < max([f.degree()] + [g.degree() for g in gs]):
        raise ValueError(f"relaxation order {omega} too small for the data degrees")
    orders = [omega - (g.degree() + 1) // 2 for g in gs]
    blocks: list[GramBlock] = []
    if not sparse:
        for i, (g, w) in enumerate(zip(gs, orders)):
            labels = _restricted_basis(f.n, w, None)
            if labels and w >= 0:
                blocks.append(GramBlock(labels, None if i == 0 else g, i, 0))
        return assemble(blocks, dict(f.terms), n_vars=f.n)
    if cliques is None:
        G = csp_graph([f, *K.inequalities], joint=True)
        if not is_chordal(G):
            G = chordal_extension(G, "min-degree")
        J = [frozenset(c) for c in graph_cliques(G)]
    else:
        J = [frozenset(c) for c in cliques]
    for i, (g, w) in enumerate(zip(gs, orders)):
        Ni = [k for k, jk in enumerate(J) if g.used_variables() <= jk]
        if not Ni:
            raise ConstraintOutsideClique(f"g_{i} depends on variables {sorted(g.used_variables())} "
                                          "that no clique contains")
        if w < 0:
            continue
        for k in Ni:
            labels = _restricted_basis(f.n, w, J[k])
            if labels:
                blocks.append(GramBlock(labels, None if i == 0 else g, i, k))
    return assemble(blocks, dict(f.terms), cliques=CliqueSet.of(sorted(tuple(sorted(j)) for j in J)), n_vars=f.n)


# ---------------------------------------------------------------- matrix SOS

def _matrix_graph(P: Sequence[Sequence[Polynomial]]) -> Graph:
    r = len(P)
    return Graph.from_edges(r, ((i, j) for i, j in combinations(range(r), 2) if not P[i][j].is_zero()))


def matrix_sos_assemble(P: Sequence[Sequence[Polynomial]], cliques: CliqueSet | Sequence | None = None,
                        nu: int = 0, multiplier: str = "norm-power", K: SemialgebraicSet | None = None) -> GramSdp:
    """m(x) P(x) = sum_k E_k' S_k(x) E_k with SOS matrices S_k (Gram over I ⊗ x^B).

    Constrained mode (K given): P = sum_k E_k'(S_0k + sum_i g_i S_ik)E_k with S_ik of degree
    at most 2 nu - deg g_i; the multiplier is not used.
    """
    r = len(P)
    if any(len(row) != r for row in P):
        raise ValueError("P must be square")
    for i in range(r):
        for j in range(i + 1, r):
            if P[i][j] != P[j][i]:
                raise ValueError(f"P is not symmetric at ({i + 1}, {j + 1})")
    n = P[0][0].n
    G = _matrix_graph(P)
    if not is_chordal(G):
        raise NotChordal("sparsity graph of P is not chordal")
    cs = graph_cliques(G) if cliques is None else (cliques if isinstance(cliques, CliqueSet)
                                                   else CliqueSet.of(cliques))
    if not cs.covered_pattern(r).contains(G):
        raise ValueError("cliques do not cover the sparsity pattern of P")
    if K is None:
        sq = sum((v * v for v in Polynomial.variables(n)), Polynomial.constant(n, 0))
        if multiplier == "norm-power":
            m = sq ** nu
        elif multiplier == "one-plus-norm":
            m = (1 + sq) ** nu
        else:
            raise ValueError(f"multiplier must be 'norm-power' or 'one-plus-norm', got {multiplier!r}")
        T = [[m * P[i][j] for j in range(r)] for i in range(r)]
        deg = max(p.degree() for row in T for p in row)
        gs = [(None, (deg + 1) // 2)]
    else:
        T = P
        gs = [(None, nu)] + [(g, nu - (g.degree() + 1) // 2) for g in K.inequalities]
    target = {}
    for i in range(r):
        for j in range(i, r):
            for e, c in T[i][j].terms.items():
                target[((i, j), e)] = c
    blocks = []
    for gi, (g, h) in enumerate(gs):
        if h < 0:
            continue
        mono = full_basis(n, h)
        for k, c in enumerate(cs):
            labels = tuple((row, e) for row in c for e in mono)
            blocks.append(GramBlock(labels, g, gi, k))
    return assemble(blocks, target, cliques=cs, matrix_mode=True, n_vars=n)


# ---------------------------------------------------------------- block SDSOS

@dataclass(frozen=True)
class SdsosConstraint:
    """Gram constraint Q in FW_{α,2} over basis B: Q = sum of PSD blocks on block pairs."""
    basis: ExponentSet
    partition: Partition
    cliques: CliqueSet

    def program(self, f: Polynomial) -> GramSdp:
        return gram_sdp(f, self.basis, self.cliques.covered_pattern(len(self.basis)), self.cliques)


def sdsos_gram_constraint(B: ExponentSet, part: Partition | Sequence[int]) -> SdsosConstraint:
    part = part if isinstance(part, Partition) else Partition.of(part)
    if part.n != len(B):
        raise ValueError(f"partition sums to {part.n} but the basis has {len(B)} elements")
    return SdsosConstraint(B, part, fw_cliques(len(B), part).cliques)


def sdsos_check(f: Polynomial, part: Partition | Sequence[int] | None = None, B: ExponentSet | None = None,
                settings: AdmmSettings = FEAS_SETTINGS) -> GramSolution:
    B = B if B is not None else newton_basis(f)
    part = part if part is not None else Partition.unit(len(B))
    return solve_gram(sdsos_gram_constraint(B, part).program(f), settings)
