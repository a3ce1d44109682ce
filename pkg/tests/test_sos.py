from fractions import Fraction

import numpy as np
import pytest

from csdp.errors import ConstraintOutsideClique, NotChordal, ParseError, SupportNotCovered
from csdp.graph import CliqueSet, Graph, is_chordal
from csdp.sos import (ExponentSet, Polynomial, SemialgebraicSet, block_sizes, cs_tssos_edges, csp_cliques,
                      csp_graph, format_polynomial, full_basis, gram_sdp, matrix_sos_assemble, newton_basis,
                      parse_polynomial, sign_orbit_partition, solve_gram, sos_check, sos_program, tssos_edges,
                      weighted_sos_assemble)

from golden import (chain_quartic, chordal_gap_poly, cs_tssos_quartic, csp_cycle_quartic, csp_cycle_sigmas,
                    tssos_quartic, xs)


def as_sets(cs):
    return {frozenset(c) for c in cs}


# ------------------------------------------------------------------ polynomials

def test_polynomial_arithmetic_is_exact():
    x, y = xs(2)
    f = Fraction(1, 3) * x * y + x**2 - x**2
    assert f.terms == {(1, 1): Fraction(1, 3)}
    assert (x + y)**2 == x**2 + 2 * x * y + y**2
    assert f.degree() == 2 and f.used_variables() == frozenset({0, 1})
    assert Polynomial.constant(2, 0).is_zero()


def test_polynomial_text_round_trip():
    f = chordal_gap_poly()
    assert parse_polynomial(format_polynomial(f)) == f
    g = parse_polynomial("# comment\n1/2 2 0\n-3, 0 1\n")
    assert g.coeff((2, 0)) == Fraction(1, 2) and g.coeff((0, 1)) == -3


@pytest.mark.parametrize("text, line", [("", 1), ("1 2\n1 2 3\n", 2), ("x 1\n", 1), ("1 -1\n", 1)])
def test_polynomial_parse_errors(text, line):
    with pytest.raises(ParseError) as e:
        parse_polynomial(text)
    assert e.value.line == line


# ------------------------------------------------------------------ Newton polytope

def test_newton_basis_examples():
    x, = xs(1)
    assert list(newton_basis(1 + x**4)) == [(0,), (1,), (2,)]
    x, y = xs(2)
    assert list(newton_basis(x**2 * y**2 + 1)) == [(0, 0), (1, 1)]
    with pytest.raises(ValueError):
        newton_basis(x**3 + 1)


def test_newton_basis_chain_quartic_is_homogeneous_degree_two():
    B = newton_basis(chain_quartic(50))
    assert len(B) == 1275
    assert all(sum(b) == 2 for b in B)


def test_newton_basis_keeps_full_basis_for_tssos_quartic():
    assert newton_basis(tssos_quartic()) == full_basis(3, 2)


# ------------------------------------------------------------------ Gram programs

def test_gram_sdp_single_square():
    x, = xs(1)
    sol = solve_gram(gram_sdp(x**2, ExponentSet([(1,)])))
    assert sol.feasible
    assert np.allclose(sol.blocks[0], [[1.0]], atol=1e-8)


def test_gram_sdp_support_not_covered():
    x, y = xs(2)
    B = ExponentSet([(1, 0), (0, 1)])
    with pytest.raises(SupportNotCovered) as e:
        gram_sdp((x + y)**2, B, Graph.from_edges(2, []))
    assert e.value.uncovered == ((1, 1),)


def test_chordal_gap_polynomial():
    f = chordal_gap_poly()
    B = ExponentSet([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1)])
    i = B.index
    chordal = Graph.from_edges(5, [(i((1, 0, 0)), i((1, 1, 0))), (i((1, 0, 0)), i((0, 1, 0))),
                                   (i((0, 1, 0)), i((1, 1, 0))), (i((0, 1, 0)), i((0, 0, 1))),
                                   (i((0, 1, 0)), i((0, 1, 1))), (i((0, 0, 1)), i((0, 1, 1)))])
    assert is_chordal(chordal)
    assert not solve_gram(gram_sdp(f, B, chordal)).feasible
    full = solve_gram(gram_sdp(f, B))
    assert full.feasible and full.certificate_residual <= 1e-6 * (1 + 142)


def test_csp_cycle_quartic():
    f = csp_cycle_quartic()
    g = csp_graph(f)
    assert set(g.edges()) == {(0, 1), (1, 2), (2, 3), (0, 3)}
    B = newton_basis(f)
    assert B == full_basis(4, 2) and len(B) == 15
    cs = csp_cliques(B, CliqueSet.of([(0, 1), (1, 2), (2, 3), (0, 3)]))
    assert [len(c) for c in cs] == [6, 6, 6, 6]
    res = sos_check(f, "csp")
    assert res.feasible and res.residual <= 1e-6 * (1 + f.max_abs())


def test_csp_cycle_printed_sigmas_reconstruct_exactly():
    f = csp_cycle_quartic()
    sig = csp_cycle_sigmas()
    total = sig[0] + sig[1] + sig[2] + sig[3]
    assert total == f
    for s, pair in zip(sig, [(0, 1), (1, 2), (2, 3), (3, 0)]):
        assert s.used_variables() == frozenset(pair)


def test_csp_graph_examples():
    assert Graph.complete(3).edges() == csp_graph(tssos_quartic()).edges()
    x1, x2 = xs(2)
    assert csp_graph(x1**2 + x2**2).num_edges == 0


def test_csp_cliques_chain_and_edgeless():
    n = 50
    f = chain_quartic(n)
    B = newton_basis(f)
    cs = csp_cliques(B, CliqueSet.of([(i - 1, i, i + 1) for i in range(1, n - 1)]))
    assert len(cs) == n - 2 and all(len(c) == 6 for c in cs)
    B1 = ExponentSet([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    cs = csp_cliques(B1, Graph.from_edges(3, []))
    assert sorted(cs) == [(0,), (1,), (2,)]


# ------------------------------------------------------------------ term sparsity

def test_tssos_block_mode_stabilizes_at_sign_groups():
    f = tssos_quartic()
    B = newton_basis(f)
    seq = tssos_edges(f, B, "block")
    assert len(seq) == 2
    assert block_sizes(seq[-1]) == [5, 2, 2, 1]
    comps = as_sets(seq[-1].components())
    assert comps == as_sets(sign_orbit_partition(f, B))
    x1, x2, x3 = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    groups = [{(0, 0, 2), (0, 2, 0), (2, 0, 0), (0, 0, 0), (0, 1, 1)}, {x1}, {x3, x2}, {(1, 1, 0), (1, 0, 1)}]
    assert comps == {frozenset(B.index(e) for e in g) for g in groups}


def test_tssos_chordal_mode_stabilizes_first_and_is_sparser():
    f = tssos_quartic()
    B = newton_basis(f)
    chordal = tssos_edges(f, B, "chordal")
    block = tssos_edges(f, B, "block")
    assert len(chordal) == 1
    assert chordal[0].num_edges < block[0].num_edges


def test_tssos_diagonal_support_stabilizes_immediately():
    x, y = xs(2)
    f = 1 + x**2 + y**2
    B = ExponentSet([(0, 0), (1, 0), (0, 1)])
    seq = tssos_edges(f, B, "block")
    assert len(seq) == 1 and seq[0].num_edges == 0


def test_tssos_printed_gram_matrix():
    f = tssos_quartic()
    order = [(0, 0, 2), (0, 2, 0), (2, 0, 0), (0, 1, 1), (0, 0, 0)]
    Q = [[8, 3, 4, 0, 0], [3, 8, 4, 0, 0], [4, 4, 8, 0, 0], [0, 0, 0, 2, 4], [0, 0, 0, 4, 8]]
    g = Polynomial.constant(3, 0)
    for a in range(5):
        for b in range(5):
            g = g + Fraction(Q[a][b], 8) * Polynomial.monomial(tuple(u + v for u, v in zip(order[a], order[b])))
    assert g == f
    assert np.linalg.eigvalsh(np.array(Q, float)).min() >= -1e-12


@pytest.mark.parametrize("strategy", ["tssos", "chordal-tssos", "cs-tssos"])
def test_tssos_quartic_is_certified(strategy):
    f = tssos_quartic()
    res = sos_check(f, strategy)
    assert res.feasible
    assert res.residual <= 1e-6 * (1 + f.max_abs())


def test_cs_tssos_first_step_blocks():
    f = cs_tssos_quartic()
    Bc, seq = cs_tssos_edges(f, newton_basis(f), "block", csp_graph(f))
    assert len(Bc) == 22
    assert sorted(block_sizes(seq[0])) == [2, 2, 2, 4, 5, 10]


def test_pure_tssos_first_step_blocks():
    # expected to fail: the block-completion iteration gives [2, 2, 7, 11]; see the decisions ledger
    f = cs_tssos_quartic()
    seq = tssos_edges(f, newton_basis(f), "block")
    assert sorted(s for s in block_sizes(seq[0]) if s > 1) == [2, 2, 2, 7, 10]


def test_cs_tssos_with_complete_csp_is_tssos():
    f = tssos_quartic()
    B = newton_basis(f)
    Bc, seq = cs_tssos_edges(f, B, "block", Graph.complete(3))
    assert Bc == B
    assert [E.edges() for E in seq] == [E.edges() for E in tssos_edges(f, B, "block")]


def test_cs_tssos_stabilized_partition_follows_sign_symmetry():
    f = cs_tssos_quartic()
    Bc, seq = cs_tssos_edges(f, newton_basis(f), "block", csp_graph(f))
    orbits = sign_orbit_partition(f, list(Bc))
    for comp in seq[-1].components():
        assert any(set(comp) <= set(o) for o in orbits)
    res = sos_check(f, "cs-tssos")
    assert res.feasible


def test_sos_check_dense_square():
    x, y = xs(2)
    f = (x**2 + y**2 - 1)**2
    res = sos_check(f, "dense")
    assert res.feasible and res.residual <= 1e-6 * (1 + f.max_abs())


def test_sos_check_chordal_gap_strategies():
    f = chordal_gap_poly()
    assert not sos_check(f, "csp").feasible
    assert sos_check(f, "dense").feasible


def test_sos_check_rejects_odd_degree_and_unknown_strategy():
    x, = xs(1)
    with pytest.raises(ValueError):
        sos_check(x**3, "dense")
    with pytest.raises(ValueError):
        sos_program(x**2, "nope")


def test_tssos_step_selection():
    f = tssos_quartic()
    B, seq, prog = sos_program(f, "tssos", step=1)
    assert prog.sparsity.edges() == seq[0].edges()


# ------------------------------------------------------------------ weighted SOS

def test_weighted_sos_univariate_examples():
    x, = xs(1)
    prog = weighted_sos_assemble(x, SemialgebraicSet([x]), 1)
    assert solve_gram(prog).feasible
    prog = weighted_sos_assemble(2 - x, SemialgebraicSet([1 - x**2]), 1)
    sol = solve_gram(prog)
    assert sol.feasible and sol.certificate_residual <= 1e-6 * 3
    with pytest.raises(ValueError):
        weighted_sos_assemble(x**4, SemialgebraicSet([x]), 1)


def test_weighted_sos_bilinear_on_box():
    x1, x2 = xs(2)
    f = x1 * x2 + 1
    K = SemialgebraicSet([1 - x1**2, 1 - x2**2])
    assert solve_gram(weighted_sos_assemble(f, K, 1)).feasible
    sparse = weighted_sos_assemble(f, K, 1, sparse=True)
    assert as_sets(sparse.cliques) == {frozenset({0, 1})}
    assert solve_gram(sparse).feasible


def test_weighted_sos_constraint_outside_clique():
    x1, x2, x3 = xs(3)
    f = 1 + x1**2 + x3**2
    K = SemialgebraicSet([1 - x1 * x3])
    with pytest.raises(ConstraintOutsideClique):
        weighted_sos_assemble(f, K, 1, sparse=True, cliques=[(0, 1), (1, 2)])


# ------------------------------------------------------------------ matrix SOS

def _chain_matrix():
    x, = xs(1)
    z = Polynomial.constant(1, 0)
    return [[2 + x**2, x + x**2, z], [x + x**2, 1 + 2 * x**2, x - x**2], [z, x - x**2, 2 + x**2]]


def test_matrix_sos_diagonal_and_dense():
    x, = xs(1)
    z = Polynomial.constant(1, 0)
    P = [[1 + x**2, z], [z, 1 + x**2]]
    assert solve_gram(matrix_sos_assemble(P, [(0,), (1,)])).feasible
    x, y = xs(2)
    P = [[2 * x**2 + y**2, x * y], [x * y, x**2 + 2 * y**2]]
    assert solve_gram(matrix_sos_assemble(P)).feasible


def test_matrix_sos_chain_counterexample_and_multiplier_scan():
    P = _chain_matrix()
    assert not solve_gram(matrix_sos_assemble(P, nu=0)).feasible
    found = None
    for nu in range(1, 4):
        if solve_gram(matrix_sos_assemble(P, nu=nu, multiplier="one-plus-norm")).feasible:
            found = nu
            break
    assert found is not None and found >= 1


def test_matrix_sos_errors():
    x, = xs(1)
    z = Polynomial.constant(1, 0)
    with pytest.raises(ValueError):
        matrix_sos_assemble([[1 + x**2, x], [z, 1 + x**2]])
    one = Polynomial.constant(1, 1)
    C4 = [[one if (i == j or abs(i - j) in (1, 3)) else z for j in range(4)] for i in range(4)]
    with pytest.raises(NotChordal):
        matrix_sos_assemble(C4)
    with pytest.raises(ValueError):
        matrix_sos_assemble(_chain_matrix(), multiplier="bogus")
