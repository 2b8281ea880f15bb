import math

import numpy as np
import pytest

from smoothreg.baselines import (
    Baseline, BaselineConfig, TikhonovSolver, cgls, landweber, normal_operator_norm,
    run_baseline, tikhonov_identity,
)
from smoothreg.operators import DenseOperator
from smoothreg.problems import make_numdiff_problem
from smoothreg.report import StopReason, StoppingRule


def spd(n, seed):
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    return q @ np.diag(np.linspace(0.5, 4, n)) @ q.T


def test_power_iteration():
    a = np.diag([3.0, 1.0, 0.5])
    assert normal_operator_norm(DenseOperator(a)) == pytest.approx(9.0, rel=1e-6)
    assert normal_operator_norm(DenseOperator(a), seed=5) == pytest.approx(9.0, rel=1e-6)


class TestLandweber:
    def test_identity_geometric_rate(self):
        tau = 0.3
        g = np.random.default_rng(0).standard_normal(8)
        _, report = landweber(DenseOperator(np.eye(8)), g, StoppingRule(0, 1, 30), tau)
        res = [report.initial.residual_norm] + [r.residual_norm for r in report.history]
        k = math.ceil(1 / tau)
        for m in range(len(res) - k):
            assert res[m + k] <= 0.5 * res[m] + 1e-15

    def test_two_by_two_limit(self):
        op = DenseOperator(np.diag([1.0, 0.1]))
        psi, _ = landweber(op, np.array([1.0, 1.0]), StoppingRule(0, 1, 10_000))
        np.testing.assert_allclose(psi, [1.0, 10.0], atol=1e-3)

    def test_step_range_enforced(self):
        op = DenseOperator(np.eye(3))
        with pytest.raises(ValueError):
            landweber(op, np.ones(3), StoppingRule(), tau_step=2.5)
        with pytest.raises(ValueError):
            landweber(op, np.ones(3), StoppingRule(), tau_step=0.0)

    def test_bounded_on_random_problems(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            a = rng.standard_normal((8, 6))
            op = DenseOperator(a)
            tau = 1.9 / normal_operator_norm(op)
            g = rng.standard_normal(8)
            psi, report = landweber(op, g, StoppingRule(0, 1, 300), tau)
            ls = np.linalg.lstsq(a, g, rcond=None)[0]
            assert np.all(np.isfinite(psi))
            assert np.linalg.norm(psi) <= 2 * np.linalg.norm(ls) + 1

    def test_numdiff(self):
        prob = make_numdiff_problem("g1", 200, 0.1, 0)
        _, report = landweber(prob.op, prob.g_noisy, StoppingRule(prob.delta),
                              phi_true=prob.phi_true)
        assert report.stopping is StopReason.DISCREPANCY
        assert np.isfinite(report.final_rel_error) and report.final_rel_error < 0.3


class TestCGLS:
    def test_finite_termination(self):
        a = spd(10, 1)
        phi = np.random.default_rng(1).standard_normal(10)
        psi, report = cgls(DenseOperator(a), a @ phi, StoppingRule(1e-10, 1, 10), phi_true=phi)
        assert report.stopping is StopReason.DISCREPANCY
        assert report.final.residual_norm < 1e-10 and report.iterations <= 10

    def test_residual_nonincreasing(self):
        prob = make_numdiff_problem("g2", 200, 0.1, 2)
        _, report = cgls(prob.op, prob.g_noisy, StoppingRule(0, 1, 60))
        res = [report.initial.residual_norm] + [r.residual_norm for r in report.history]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(res, res[1:]))

    @pytest.mark.parametrize("which,lo,hi", [("g1", 0.04, 0.16), ("g2", 0.15, 0.40)])
    def test_numdiff(self, which, lo, hi):
        prob = make_numdiff_problem(which, 200, 0.1, 0)
        _, report = cgls(prob.op, prob.g_noisy, StoppingRule(prob.delta), phi_true=prob.phi_true)
        assert lo <= report.final_rel_error <= hi

    def test_breakdown_stalls(self):
        _, report = cgls(DenseOperator(np.zeros((3, 3))), np.ones(3), StoppingRule(0, 1, 5))
        assert report.stopping is StopReason.STALLED


class TestTikhonov:
    def test_large_lambda(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((6, 6))
        g = rng.standard_normal(6)
        solver = TikhonovSolver(DenseOperator(a), g)
        assert np.linalg.norm(solver.solve(1e12)) < 1e-10
        assert solver.residual(1e12) == pytest.approx(np.linalg.norm(g), rel=1e-9)

    def test_small_lambda_is_least_squares(self):
        a = spd(6, 3)
        g = np.random.default_rng(3).standard_normal(6)
        np.testing.assert_allclose(TikhonovSolver(DenseOperator(a), g).solve(1e-14),
                                   np.linalg.solve(a, g), atol=1e-10)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((7, 5))
        g = rng.standard_normal(7)
        lam = 0.37
        direct = np.linalg.solve(a.T @ a + lam * np.eye(5), a.T @ g)
        solver = TikhonovSolver(DenseOperator(a), g)
        np.testing.assert_allclose(solver.solve(lam), direct, atol=1e-12)
        assert solver.residual(lam) == pytest.approx(np.linalg.norm(a @ direct - g), rel=1e-10)

    def test_residual_monotone_in_lambda(self):
        prob = make_numdiff_problem("g1", 120, 0.1, 1)
        solver = TikhonovSolver(prob.op, prob.g_noisy)
        res = [solver.residual(lam) for lam in np.logspace(-12, 4, 60)]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(res, res[1:]))

    def test_hits_discrepancy(self):
        prob = make_numdiff_problem("g1", 200, 0.1, 0)
        psi, report, lam = tikhonov_identity(prob.op, prob.g_noisy, StoppingRule(prob.delta),
                                             phi_true=prob.phi_true)
        assert report.stopping is StopReason.DISCREPANCY
        assert report.final.residual_norm == pytest.approx(prob.delta, rel=1e-3)
        assert 0.06 <= report.final_rel_error <= 0.24
        assert report.extra["lambda"] == lam and lam > 0

    def test_unreachable_target_flagged(self):
        a = np.vstack([np.eye(2), np.eye(2)])
        g = np.array([0.0, 0.0, 1.0, 1.0])  # residual floor is 1
        _, report, lam = tikhonov_identity(DenseOperator(a), g, StoppingRule(0.1))
        assert report.stopping is StopReason.MAX_ITER and report.extra["flag"]
        assert lam == 1e-12

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            tikhonov_identity(DenseOperator(np.eye(2)), np.ones(2), StoppingRule(0.1), (1.0, 0.5, 1e-3))


@pytest.mark.parametrize("method", list(Baseline))
def test_dispatch(method):
    prob = make_numdiff_problem("g1", 60, 0.1, 0)
    psi, report = run_baseline(BaselineConfig(method, StoppingRule(prob.delta)), prob.op,
                               prob.g_noisy, phi_true=prob.phi_true)
    assert report.method == f"baseline:{method.value}"
    assert psi.shape == (60,) and report.final_rel_error is not None
