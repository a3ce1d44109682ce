"""Problem generators: QCQP relaxations, Max-Cut and block-diagonal Lyapunov LMIs."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch
from .graph import Graph, Partition
from .sdp import SdpProblem
from .sparse import SparseSymMatrix

# The LMI is homogeneous in P, so any positive margin is equivalent; a unit margin keeps
# the trivial P = 0 from passing the solver tolerance.
LYAPUNOV_EPS = 1.0


def _sym(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return M


def gen_maxcut(W) -> SdpProblem:
    """min <W, Z>  s.t.  Z_ii = 1,  Z ⪰ 0."""
    W = _sym(W)
    if not np.array_equal(W, W.T):
        raise ValueError("weight matrix must be symmetric")
    if np.any(np.diag(W) != 0):
        raise ValueError("weight matrix must have a zero diagonal")
    n = W.shape[0]
    A = tuple(SparseSymMatrix.from_entries(n, {(i, i): 1.0}) for i in range(n))
    return SdpProblem(n, SparseSymMatrix.from_dense(W), A, np.ones(n), (n,))


def random_maxcut_weights(graph: Graph, rng: np.random.Generator, weighted: bool = False) -> np.ndarray:
    W = np.zeros((graph.n, graph.n))
    for i, j in graph.edges():
        W[i, j] = W[j, i] = rng.uniform(0.5, 2.0) if weighted else 1.0
    return W


def qcqp_relax(P: Sequence, q: Sequence, r: Sequence, equalities: Sequence[int] = ()) -> SdpProblem:
    """Lift  min x'P0x + 2q0'x + r0  s.t.  x'Pix + 2qi'x + ri <= 0  to an SDP in Z = [[1, x'], [x, X]].

    Constraints listed in ``equalities`` (1-based, as in P[1:]) are kept as equalities;
    the others get a nonnegative slack w_i stored in a diagonal block.
    """
    if not (len(P) == len(q) == len(r)) or len(P) == 0:
        raise DimensionMismatch("P, q and r must have the same nonzero length")
    Ps = [_sym(p) for p in P]
    n = Ps[0].shape[0]
    qs = [np.asarray(v, float).reshape(-1) for v in q]
    if any(p.shape != (n, n) for p in Ps) or any(v.size != n for v in qs):
        raise DimensionMismatch("inconsistent QCQP dimensions")
    eq = set(int(i) for i in equalities)
    ineq = [i for i in range(1, len(Ps)) if i not in eq]
    N = n + 1 + len(ineq)

    def lifted(i):
        M = np.zeros((N, N))
        M[0, 0] = float(r[i])
        M[0, 1:n + 1] = qs[i]
        M[1:n + 1, 0] = qs[i]
        M[1:n + 1, 1:n + 1] = (Ps[i] + Ps[i].T) / 2
        return M

    A, b = [], []
    for i in range(1, len(Ps)):
        M = lifted(i)
        if i not in eq:
            k = ineq.index(i)
            M[n + 1 + k, n + 1 + k] = 1.0
        A.append(SparseSymMatrix.from_dense(M))
        b.append(0.0)
    A.append(SparseSymMatrix.from_entries(N, {(0, 0): 1.0}))
    b.append(1.0)
    blocks = (n + 1,) + ((-len(ineq),) if ineq else ())
    return SdpProblem(N, SparseSymMatrix.from_dense(lifted(0)), tuple(A), np.array(b), blocks)


def assemble_network_matrix(blocks: Mapping[tuple[int, int], np.ndarray], network: Graph,
                            sizes: Partition) -> np.ndarray:
    if network.n != sizes.p:
        raise DimensionMismatch(f"network has {network.n} nodes but {sizes.p} block sizes")
    N = sizes.n
    A = np.zeros((N, N))
    for (i, j), Aij in blocks.items():
        if i != j and not network.has_edge(i, j):
            raise DimensionMismatch(f"block ({i}, {j}) given for a non-edge")
        Aij = np.atleast_2d(np.asarray(Aij, float))
        if Aij.shape != (sizes.sizes[i], sizes.sizes[j]):
            raise DimensionMismatch(f"block ({i}, {j}) has shape {Aij.shape}")
        A[np.ix_(sizes.block(i), sizes.block(j))] = Aij
    return A


def gen_lyapunov(blocks: Mapping[tuple[int, int], np.ndarray], network: Graph, sizes: Partition,
                 eps: float = LYAPUNOV_EPS) -> SdpProblem:
    """Feasibility SDP for a block-diagonal P with P ⪰ εI and -(A'P + PA) ⪰ εI.

    Dual standard form: y parametrizes the blocks of P, and
    Z = C - sum_k y_k A_k = blockdiag(P - εI, -(A'P + PA) - εI).
    """
    A = assemble_network_matrix(blocks, network, sizes)
    N = sizes.n
    Cmat = SparseSymMatrix.from_entries(2 * N, {(i, i): -eps for i in range(2 * N)})
    mats = []
    for blk in range(sizes.p):
        idx = sizes.block(blk)
        for a in range(len(idx)):
            for c in range(a, len(idx)):
                E = np.zeros((N, N))
                E[idx[a], idx[c]] = E[idx[c], idx[a]] = 1.0
                M = np.zeros((2 * N, 2 * N))
                M[:N, :N] = -E
                M[N:, N:] = A.T @ E + E @ A
                mats.append(SparseSymMatrix.from_dense(M))
    return SdpProblem(2 * N, Cmat, tuple(mats), np.zeros(len(mats)), tuple(sizes.sizes) + (N,))


def lyapunov_P(problem: SdpProblem, sizes: Partition, y: np.ndarray) -> np.ndarray:
    """Rebuild the block-diagonal P from a dual vector of :func:`gen_lyapunov`."""
    N = sizes.n
    P = np.zeros((N, N))
    k = 0
    for blk in range(sizes.p):
        idx = sizes.block(blk)
        for a in range(len(idx)):
            for c in range(a, len(idx)):
                P[idx[a], idx[c]] = P[idx[c], idx[a]] = y[k]
                k += 1
    return P


def star_network(l: int) -> Graph:
    return Graph.from_edges(l, [(0, i) for i in range(1, l)])


def chain_network(l: int) -> Graph:
    return Graph.from_edges(l, [(i, i + 1) for i in range(l - 1)])


def random_network_blocks(network: Graph, sizes: Partition, rng: np.random.Generator,
                          coupling: float = 0.3, margin: float = 1.0) -> dict[tuple[int, int], np.ndarray]:
    """Random stable subsystems A_ii (spectral abscissa <= -margin) plus random couplings."""
    blocks = {}
    for i in range(sizes.p):
        s = sizes.sizes[i]
        M = rng.standard_normal((s, s))
        shift = np.max(np.linalg.eigvals(M).real) + margin
        blocks[(i, i)] = M - shift * np.eye(s)
    for i, j in network.edges():
        blocks[(i, j)] = coupling * rng.standard_normal((sizes.sizes[i], sizes.sizes[j]))
        blocks[(j, i)] = coupling * rng.standard_normal((sizes.sizes[j], sizes.sizes[i]))
    return blocks
