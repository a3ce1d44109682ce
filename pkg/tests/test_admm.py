import csv

import cvxpy as cp
import numpy as np
import pytest

from csdp.admm import AdmmSettings, psd_project, solve, solve_dense, solve_domain, solve_range
from csdp.errors import SingularKkt
from csdp.generators import gen_maxcut
from csdp.sdp import SdpProblem, decompose_with_cliques, domain_decompose, range_decompose
from csdp.sparse import extract

from golden import chain_graph, random_sparse_sdp
from oracle import dense_sdp

TRIANGLE = np.ones((3, 3)) - np.eye(3)
TIGHT = AdmmSettings(eps_abs=1e-7, eps_rel=1e-7, max_iter=50000)


def test_psd_project_examples():
    P = np.array([[2.0, 1], [1, 2]])
    assert np.allclose(psd_project(P), P, atol=1e-12)
    assert np.allclose(psd_project(np.diag([1.0, -2])), np.diag([1.0, 0]), atol=1e-12)
    assert np.allclose(psd_project([[0.0, 1], [1, 0]]), [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)
    with pytest.raises(ValueError):
        psd_project([[0.0, 1], [0, 0]])


def test_settings_validation():
    with pytest.raises(ValueError):
        AdmmSettings(rho=0)
    with pytest.raises(ValueError):
        AdmmSettings(eps_abs=0)
    assert AdmmSettings().with_(rho=2.0).rho == 2.0


def test_triangle_maxcut_both_modes():
    p = gen_maxcut(TRIANGLE)
    dom = solve_domain(domain_decompose(p))
    rng = solve_range(range_decompose(p))
    assert dom.solved and rng.solved
    assert dom.objective == pytest.approx(-3.0, abs=1e-3)
    assert rng.objective == pytest.approx(-3.0, abs=1e-3)
    with pytest.raises(Exception):
        solve_domain(range_decompose(p))


def _lmi_instance():
    # Z(x) = C - x1 A1 - x2 A2 on the 3x3 chain pattern; maximize x1 + x2
    C = np.diag([0.0, 5, 1])
    A1 = -np.array([[2.0, 1, 0], [1, -1, 1], [0, 1, 0]])
    A2 = -np.array([[0.0, 1, 0], [1, -1, 0], [0, 0, 1]])
    return SdpProblem.from_dense(C, [A1, A2], [1.0, 1.0])


def test_chain_lmi_decomposes_into_two_coupled_lmis():
    p = _lmi_instance()
    d = range_decompose(p)
    assert len(d.cliques) == 2
    sol = solve(d, TIGHT)
    x = cp.Variable(2)
    Z = cp.bmat([[2 * x[0], x[0] + x[1], 0], [x[0] + x[1], 5 - x[0] - x[1], x[0]], [0, x[0], x[1] + 1]])
    ref = cp.Problem(cp.Maximize(cp.sum(x)), [(Z + Z.T) / 2 >> 0]).solve(solver=cp.CLARABEL)
    assert sol.objective == pytest.approx(ref, abs=1e-4)
    x1, x2 = sol.y
    k = next(k for k, c in enumerate(d.cliques) if list(c) == [1, 2])
    d_val = sol.clique_vars[k][0, 0]
    lmi1 = np.array([[2 * x1, x1 + x2], [x1 + x2, 5 - x1 - x2 - d_val]])
    lmi2 = np.array([[d_val, x1], [x1, x2 + 1]])
    assert np.linalg.eigvalsh(lmi1).min() >= -1e-4
    assert np.linalg.eigvalsh(lmi2).min() >= -1e-4


def test_block_diagonal_matches_per_block_solve():
    C = np.zeros((4, 4))
    C[:2, :2] = [[2, 1], [1, 2]]
    C[2:, 2:] = [[1, 0.5], [0.5, 1]]
    A = [np.diag([1.0, 1, 0, 0]), np.diag([0.0, 0, 1, 1])]
    sol = solve(domain_decompose(SdpProblem.from_dense(C, A, [1.0, 1.0])), TIGHT)
    one = solve(domain_decompose(SdpProblem.from_dense(C[:2, :2], [np.eye(2)], [1.0])), TIGHT)
    two = solve(domain_decompose(SdpProblem.from_dense(C[2:, 2:], [np.eye(2)], [1.0])), TIGHT)
    assert sol.objective == pytest.approx(one.objective + two.objective, abs=1e-5)
    assert sol.objective == pytest.approx(1.0 + 0.5, abs=1e-5)


def test_single_clique_matches_dense_admm():
    p = gen_maxcut(TRIANGLE)
    a = solve(range_decompose(p), TIGHT)
    b = solve_dense(p, "range", TIGHT)
    assert a.objective == pytest.approx(b.objective, abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_chain_instances_match_oracle(seed):
    p = random_sparse_sdp(np.random.default_rng(seed), chain_graph(15), 5)
    ref = dense_sdp(p)
    for d in (domain_decompose(p), range_decompose(p)):
        sol = solve(d, TIGHT.with_(adaptive_rho=True))
        assert sol.solved
        assert abs(sol.objective - ref) <= 1e-3 * (1 + abs(ref))


def test_rho_invariance():
    p = random_sparse_sdp(np.random.default_rng(5), chain_graph(10), 4)
    vals = [solve(domain_decompose(p), TIGHT.with_(rho=r)).objective for r in (0.1, 1.0, 10.0)]
    assert max(vals) - min(vals) <= 1e-3
    vals = [solve(range_decompose(p), TIGHT.with_(rho=r)).objective for r in (0.1, 1.0, 10.0)]
    assert max(vals) - min(vals) <= 1e-3


def test_adaptive_rho_reaches_same_value():
    p = random_sparse_sdp(np.random.default_rng(6), chain_graph(10), 4)
    a = solve(domain_decompose(p), TIGHT.with_(adaptive_rho=True))
    assert a.objective == pytest.approx(dense_sdp(p), abs=1e-3)


def test_fixed_point_certificate_at_solved():
    p = random_sparse_sdp(np.random.default_rng(8), chain_graph(8), 3)
    d = domain_decompose(p)
    s = AdmmSettings()
    sol = solve(d, s)
    assert sol.solved
    X = sol.X_partial.to_dense()
    for Xk, c in zip(sol.clique_vars, d.cliques):
        bound = s.eps_abs * np.sqrt(len(c)) + s.eps_rel * max(np.linalg.norm(Xk), np.linalg.norm(extract(X, c)))
        assert np.linalg.norm(Xk - extract(X, c)) <= bound * 1.0001
    C, A, b = p.dense_data()
    for Ai, bi in zip(A, b):
        assert abs(np.sum(Ai * X) - bi) <= 1e-4 * (1 + abs(bi))


def test_residual_trend_on_golden_instances():
    p = random_sparse_sdp(np.random.default_rng(0), chain_graph(10), 4)
    sol = solve(domain_decompose(p), AdmmSettings(eps_abs=1e-12, eps_rel=1e-12, max_iter=2500, check_every=25))
    res = {it: max(pr, du) for it, pr, du, *_ in sol.history}
    assert res[250] <= res[25] and res[2500] <= res[250]


def test_completion_on_request():
    p = random_sparse_sdp(np.random.default_rng(3), chain_graph(6), 3)
    sol = solve(domain_decompose(p), TIGHT, complete=True)
    assert sol.X_completed is not None
    assert np.linalg.eigvalsh(sol.X_completed).min() >= -1e-6


def test_singular_kkt_and_allow_dependent():
    A = [np.eye(2), 2 * np.eye(2)]
    p = SdpProblem.from_dense(np.array([[2.0, 1], [1, 2]]), A, [1.0, 2.0])
    with pytest.raises(SingularKkt) as e:
        solve(domain_decompose(p))
    assert set(e.value.dependent_rows) and set(e.value.dependent_rows) <= {0, 1}
    sol = solve(domain_decompose(p), TIGHT.with_(allow_dependent=True))
    assert sol.objective == pytest.approx(1.0, abs=1e-4)


def test_max_iter_status():
    p = random_sparse_sdp(np.random.default_rng(1), chain_graph(10), 4)
    sol = solve(domain_decompose(p), AdmmSettings(max_iter=10))
    assert sol.status == "MaxIter" and sol.iterations == 10


def test_iteration_log(tmp_path):
    path = tmp_path / "log.csv"
    solve(domain_decompose(gen_maxcut(TRIANGLE)), AdmmSettings(log_path=str(path)))
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iter", "primal_res", "dual_res", "objective", "rho"]
    assert len(rows) > 1 and int(rows[1][0]) == 25


def test_explicit_cliques_decomposition():
    p = random_sparse_sdp(np.random.default_rng(2), chain_graph(5), 2)
    d = decompose_with_cliques(p, [[0, 1, 2], [2, 3, 4]], "domain")
    assert solve(d, TIGHT).objective == pytest.approx(dense_sdp(p), abs=1e-3)

