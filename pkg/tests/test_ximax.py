import cvxpy as cp
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import G1_LITERAL, G2_LITERAL, G3_LITERAL
from multisync import ximax
from multisync.errors import SolverError, ValidationError
from multisync.graphs import directed_cycle, laplacian
from multisync.instances import random_balanced_layer, random_circulant_family
from multisync.matrixcore import complete_laplacian
from multisync.sdp import LmiBlock, maximize_lmi
from multisync.ximax import (
    BracketError,
    SdpProblem,
    mu2,
    sdp_feasible,
    verify_certificate,
    xi_lower_bound,
    xi_max,
    xi_upper_bound,
)

EXAMPLE = [G1_LITERAL, G2_LITERAL, G3_LITERAL]
# mu2 oracles: smallest nonzero real root of each exact characteristic polynomial
# G1: x^5 - 10x^4 + 35x^3 - 49x^2 + 22x, G2: x^5 - 9x^4 + 29x^3 - 41x^2 + 21x,
# G3: x (x - 1)^2 (x - 3)^2
MU2_EXAMPLE = [0.852101, 1.225196, 1.0]
EXAMPLE_LOWER = 0.661667  # min over layers of lambda_min of the e-perp symmetric block


def _perp_basis(n):
    """An e-perp basis built differently from the package's Householder one."""
    return scipy.linalg.null_space(np.ones((1, n)))


def cvx_max_slack(G_list, xi, kappa=ximax.DEFAULT_KAPPA):
    """Same max-slack program written directly in U with cvxpy (oracle route)."""
    n = G_list[0].shape[0]
    Q = _perp_basis(n)
    U = cp.Variable((n, n), symmetric=True)
    s = cp.Variable()
    cons = [U @ np.ones(n) == 0, Q.T @ U @ Q >> np.eye(n - 1),
            cp.trace(Q.T @ U @ Q) <= n * kappa]
    cons += [U[i, j] <= 0 for i in range(n) for j in range(n) if i != j]
    for G in G_list:
        M = Q.T @ U @ (G - xi * np.eye(n)) @ Q
        cons.append((M + M.T) / 2 >> s * np.eye(n - 1))
    prob = cp.Problem(cp.Maximize(s), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(s.value)


class TestFrozenOracles:
    def test_mu2_roots(self):
        for G, value in zip(EXAMPLE, MU2_EXAMPLE):
            roots = np.roots(np.poly(G))
            nonzero = roots[np.abs(roots) > 1e-6]
            assert nonzero.real.min() == pytest.approx(value, abs=1e-5)

    def test_lower_bound_route(self):
        Q = _perp_basis(5)
        vals = [np.linalg.eigvalsh(Q.T @ (G + G.T) / 2 @ Q)[0] for G in EXAMPLE]
        assert min(vals) == pytest.approx(EXAMPLE_LOWER, abs=1e-6)


class TestSdpFeasible:
    def test_complete_graph_feasible(self):
        out = sdp_feasible(SdpProblem([complete_laplacian(3)], 2.0))
        assert out.feasible and out.certificate.verified

    def test_complete_graph_infeasible_above_mu2(self):
        assert not sdp_feasible(SdpProblem([complete_laplacian(3)], 3.5)).feasible

    def test_example_straddles_value(self):
        assert sdp_feasible(SdpProblem(EXAMPLE, 0.8)).feasible
        assert not sdp_feasible(SdpProblem(EXAMPLE, 0.9)).feasible

    def test_slack_bracket(self):
        out = sdp_feasible(SdpProblem(EXAMPLE, 0.8), maximize=True)
        assert out.slack_lower <= out.slack_upper
        assert out.slack_upper - out.slack_lower <= 1e-9

    @pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
    @pytest.mark.parametrize("xi", [0.5, 0.8, 0.83, 0.85, 0.9])
    def test_optimal_slack_matches_cvxpy(self, xi):
        ours = sdp_feasible(SdpProblem(EXAMPLE, xi), maximize=True)
        theirs = cvx_max_slack(EXAMPLE, xi)
        assert ours.slack_lower == pytest.approx(theirs, abs=1e-4 * max(1.0, abs(theirs)))

    def test_random_instances_agree_with_cvxpy(self, rng):
        for _ in range(4):
            n = int(rng.integers(3, 6))
            Gs = [random_balanced_layer(rng, n) for _ in range(2)]
            for xi in (0.5 * xi_lower_bound(Gs), xi_upper_bound(Gs) + 0.2):
                ours = sdp_feasible(SdpProblem(Gs, xi), maximize=True).slack_lower
                theirs = cvx_max_slack(Gs, xi)
                assert ours == pytest.approx(theirs, abs=1e-4 * max(1.0, abs(theirs)))
                assert (ours >= -ximax.FEAS_TOL) == (theirs >= -1e-6)

    def test_rejects_bad_layers(self):
        with pytest.raises(ValidationError):
            SdpProblem([np.eye(3)], 1.0)
        with pytest.raises(ValidationError):
            SdpProblem([complete_laplacian(3), complete_laplacian(4)], 1.0)


class TestVerifyCertificate:
    def test_complete_graph_at_zero(self):
        ok, report = verify_certificate(complete_laplacian(4),
                                        SdpProblem([complete_laplacian(4)], 0.0))
        assert ok and all(report["checks"].values())

    def test_zero_matrix_fails(self):
        ok, report = verify_certificate(np.zeros((4, 4)), SdpProblem([complete_laplacian(4)], 0.0))
        assert not ok and not report["checks"]["QtUQ_geq_I"]

    def test_solver_output_on_example(self):
        p = SdpProblem(EXAMPLE, 0.83)
        out = sdp_feasible(p)
        ok, report = verify_certificate(out.certificate.U, p)
        assert ok and report["irreducible"]

    def test_positive_offdiagonal_fails(self):
        U = complete_laplacian(3) + np.array([[0, 2, -2], [2, 0, -2], [-2, -2, 4]]) * 0.75
        ok, report = verify_certificate(U, SdpProblem([complete_laplacian(3)], 0.0))
        assert not report["checks"]["nonpositive_offdiag"]

    def test_wrong_order(self):
        with pytest.raises(ValidationError):
            verify_certificate(np.eye(3), SdpProblem([complete_laplacian(4)], 0.0))


class TestBounds:
    def test_lower_symmetric_laplacian_is_lambda2(self, rng):
        W = rng.uniform(0, 1, (5, 5))
        W = W + W.T
        np.fill_diagonal(W, 0)
        L = np.diag(W.sum(1)) - W
        assert xi_lower_bound([L]) == pytest.approx(np.linalg.eigvalsh(L)[1], abs=1e-10)

    def test_lower_directed_four_cycle(self):
        assert xi_lower_bound([laplacian(directed_cycle(4))]) == pytest.approx(1.0, abs=1e-12)

    def test_lower_example(self):
        assert xi_lower_bound(EXAMPLE) == pytest.approx(EXAMPLE_LOWER, abs=1e-6)
        assert xi_lower_bound(EXAMPLE) <= 0.838

    def test_upper_complete_graph(self):
        for n in (3, 5, 7):
            assert xi_upper_bound([complete_laplacian(n)]) == pytest.approx(n, abs=1e-10)

    def test_upper_directed_four_cycle(self):
        assert xi_upper_bound([laplacian(directed_cycle(4))]) == pytest.approx(1.0, abs=1e-12)

    def test_upper_example(self):
        assert xi_upper_bound(EXAMPLE) == pytest.approx(MU2_EXAMPLE[0], abs=1e-6)
        assert xi_upper_bound(EXAMPLE) >= 0.838

    def test_mu2_examples(self):
        assert mu2(complete_laplacian(5)) == pytest.approx(5.0, abs=1e-10)
        assert mu2(laplacian(directed_cycle(3))) == pytest.approx(1.5, abs=1e-12)
        for G, value in zip(EXAMPLE, MU2_EXAMPLE):
            # the double eigenvalue 1 of G3 is defective, so allow sqrt(eps) error
            assert mu2(G) == pytest.approx(value, abs=1e-6)

    def test_mu2_needs_zero_rows(self):
        with pytest.raises(ValidationError):
            mu2(np.eye(3))


class TestXiMax:
    def test_example(self):
        res = xi_max(EXAMPLE, 1e-3)
        assert res.value == pytest.approx(0.838, abs=0.01)
        assert res.bracket[1] - res.bracket[0] <= 1e-3
        assert res.certificate_at_lb.verified
        assert res.nonconverged_as_infeasible == 0

    def test_individual_minimum(self):
        values = [xi_max([G], 1e-3).value for G in EXAMPLE]
        assert min(values) == pytest.approx(0.852, abs=0.01)

    def test_directed_five_cycle(self):
        res = xi_max([laplacian(directed_cycle(5))], 1e-3)
        assert abs(res.value - (1 - np.cos(2 * np.pi / 5))) <= 2e-3

    def test_complete_graph(self):
        assert abs(xi_max([complete_laplacian(5)], 1e-3).value - 5.0) <= 2e-3

    def test_bisection_history(self):
        res = xi_max(EXAMPLE, 1e-2)
        lb, ub = ximax.initial_bracket(EXAMPLE)
        for xi, feasible in res.history:
            assert lb < xi < ub
            if feasible:
                lb = xi
            else:
                ub = xi
        assert (lb, ub) == res.bracket
        assert res.value == pytest.approx((lb + ub) / 2)

    def test_infeasible_lower_end(self):
        with pytest.raises(BracketError):
            xi_max(EXAMPLE, 1e-3, lb=0.9, ub=1.0)

    def test_feasible_upper_end(self):
        with pytest.raises(BracketError):
            xi_max(EXAMPLE, 1e-3, lb=0.5, ub=0.8)

    def test_empty_bracket(self):
        with pytest.raises(BracketError):
            xi_max(EXAMPLE, 1e-3, lb=0.8, ub=0.7)

    def test_solver_failure_is_flagged(self, monkeypatch):
        real = ximax.sdp_feasible
        calls = {"n": 0}

        def flaky(p, tol=ximax.FEAS_TOL, **kw):
            calls["n"] += 1
            if calls["n"] == 3:
                raise SolverError("simulated")
            return real(p, tol, **kw)

        monkeypatch.setattr(ximax, "sdp_feasible", flaky)
        res = xi_max(EXAMPLE, 1e-2)
        assert res.nonconverged_as_infeasible == 1
        assert res.history[0][1] is False


class TestProperties:
    @given(st.floats(0.0, 0.83))
    @settings(max_examples=15)
    def test_feasibility_is_downward_closed(self, xi):
        cert = sdp_feasible(SdpProblem(EXAMPLE, 0.83)).certificate
        ok, _ = verify_certificate(cert.U, SdpProblem(EXAMPLE, xi))
        assert ok

    def test_sandwich_and_positivity_on_balanced_layers(self, rng):
        for _ in range(6):
            n = int(rng.integers(4, 7))
            Gs = [random_balanced_layer(rng, n) for _ in range(int(rng.integers(1, 4)))]
            res = xi_max(Gs, 1e-3)
            assert xi_lower_bound(Gs) - 1e-3 <= res.value <= xi_upper_bound(Gs) + 1e-3
            assert res.value > 0
            assert res.certificate_at_lb.verified

    def test_normal_families_collapse_to_mu2(self, rng):
        for _ in range(3):
            Gs = random_circulant_family(rng, int(rng.integers(4, 7)), 2)
            assert abs(xi_max(Gs, 1e-3).value - xi_upper_bound(Gs)) <= 2e-3

    def test_joint_value_below_individuals(self, rng):
        n = 5
        Gs = [random_balanced_layer(rng, n) for _ in range(2)]
        joint = xi_max(Gs, 1e-3).value
        assert joint <= min(xi_max([G], 1e-3).value for G in Gs) + 2e-3


class TestBarrierSolver:
    def test_scalar_lmi(self):
        # maximize x subject to 1 - x > 0 and x + 1 > 0
        blocks = [LmiBlock(np.array([[1.0]]), np.array([[[-1.0]]])),
                  LmiBlock(np.array([[1.0]]), np.array([[[1.0]]]))]
        res = maximize_lmi(np.array([1.0]), blocks, np.array([0.0]))
        assert res.x[0] == pytest.approx(1.0, abs=1e-8)
        assert res.gap <= 1e-10

    def test_linear_constraints(self):
        blocks = [LmiBlock(np.eye(2), np.zeros((2, 2, 2)))]
        G = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        h = np.array([2.0, 0.0, 0.0])
        res = maximize_lmi(np.array([1.0, 2.0]), blocks, np.array([0.5, 0.5]), G, h)
        np.testing.assert_allclose(res.x, [0.0, 2.0], atol=1e-7)

    def test_infeasible_start(self):
        blocks = [LmiBlock(np.array([[1.0]]), np.array([[[-1.0]]]))]
        with pytest.raises(SolverError):
            maximize_lmi(np.array([1.0]), blocks, np.array([2.0]))

    def test_newton_cap(self):
        blocks = [LmiBlock(np.array([[1.0]]), np.array([[[-1.0]]]))]
        with pytest.raises(SolverError):
            maximize_lmi(np.array([1.0]), blocks, np.array([0.0]), max_newton=2)
