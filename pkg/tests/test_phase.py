import math

import numpy as np
import pytest

import elpoly as ep
import elpoly.phase as ph
from elpoly import correlator as cm
from elpoly.errors import ValidationError
from elpoly.measures import FRSB, ONE_RSB, RS, ModelParams


class TestGFunction:
    def test_endpoint_is_stationary(self):
        params = ModelParams(1.0, 1.0, 1.0)
        corr = cm.exponential(1.0, 1.0)
        sb = ph.s_bar(params)
        h = 1e-7 * sb
        fd = (ph.g_function(params, corr, sb + h)
              - ph.g_function(params, corr, sb - h)) / (2 * h)
        assert abs(fd) < 1e-6

    def test_second_derivative_sign_matches_larkin(self):
        # sign(g''(s_bar)) = sign(B''(2/(beta sqrt(mu t))) 2/sqrt(mu^3 t) - 1)
        corr = cm.power_law(1.0, 1.0, 0.5)
        for beta, mu in ((0.5, 1e-7), (0.5, 1e-3), (2.0, 0.01), (2.0, 1.0)):
            params = ModelParams(beta, mu, 1.0)
            sb = ph.s_bar(params)
            h = 1e-5 * sb
            g2 = (ph.g_function(params, corr, sb + h)
                  - 2 * ph.g_function(params, corr, sb)
                  + ph.g_function(params, corr, sb - h)) / h ** 2
            crit = float(ph.larkin_condition(beta, 1.0, corr, mu))
            if abs(crit) > 1e-3:
                assert (g2 > 0) == (crit > 0)

    def test_zero_disorder_negative(self):
        params = ModelParams(1.0, 1.0, 1.0)
        s = np.geomspace(0.01, ph.s_bar(params), 50)
        g = ph.g_function(params, cm.zero(), s)
        assert np.all(g < 0)


class TestIsRs:
    def test_above_larkin_is_rs(self):
        for corr in (cm.exponential(1.0, 1.0), cm.power_law(1.0, 1.0, 0.5),
                     cm.power_law(1.0, 1.0, 2.0)):
            for beta, t in ((0.5, 1.0), (2.0, 1.0), (1.0, 2.0)):
                lar = ph.larkin_mass(beta, t, corr)
                if lar is None:
                    continue
                assert ph.is_rs(ModelParams(beta, lar * 1.5, t), corr)
                assert ph.classify(ModelParams(beta, lar * 1.5, t), corr) == RS

    def test_frsb_below_larkin_is_rsb(self):
        corr = cm.power_law(1.0, 1.0, 0.5)
        lar = ph.larkin_mass(2.0, 1.0, corr)
        assert not ph.is_rs(ModelParams(2.0, lar / 10, 1.0), corr)

    def test_zero_disorder_rs(self):
        assert ph.is_rs(ModelParams(1.0, 1.0, 1.0), cm.zero())


class TestLarkinMass:
    def test_figure_value(self):
        lar = ph.larkin_mass(0.5, 1.0, cm.power_law(1.0, 1.0, 0.5))
        assert lar == pytest.approx(4.8e-6, rel=0.05)

    def test_power_law_below_one_always_exists(self):
        for beta in (0.1, 1.0, 4.0):
            for t in (0.5, 2.0):
                assert ph.larkin_mass(beta, t, cm.power_law(1.0, 1.0, 0.7)) is not None

    def test_zero_disorder_absent(self):
        assert ph.larkin_mass(1.0, 1.0, cm.zero()) is None

    def test_solves_the_larkin_equation(self):
        corr = cm.exponential(1.0, 1.0)
        lar = ph.larkin_mass(3.0, 1.0, corr)
        assert lar is not None
        assert float(ph.larkin_condition(3.0, 1.0, corr, lar)) == pytest.approx(
            0.0, abs=1e-9)


class TestSolveRs:
    def test_exponential_point(self):
        params = ModelParams(1.0, 1.0, 1.0)
        sol = ep.solve_rs(params, cm.exponential(1.0, 1.0))
        assert sol.extras["q_star"] == pytest.approx(math.exp(-2.0), rel=1e-12)
        assert sol.q_c == pytest.approx(1.0 + math.exp(-2.0), rel=1e-12)
        assert sol.residuals.max_abs <= 1e-10

    def test_zero_disorder(self):
        params = ModelParams(2.0, 0.25, 1.0)
        sol = ep.solve_rs(params, cm.zero())
        assert sol.extras["q_star"] == 0.0
        assert sol.q_c == pytest.approx(1.0 / (2.0 * math.sqrt(0.25)), rel=1e-12)

    def test_refuses_outside_rs(self):
        corr = cm.power_law(1.0, 1.0, 0.5)
        lar = ph.larkin_mass(2.0, 1.0, corr)
        with pytest.raises(ValidationError):
            ep.solve_rs(ModelParams(2.0, lar / 10, 1.0), corr)


class TestSolve1Rsb:
    def test_jacobian_matches_finite_differences(self):
        corr = cm.exponential(1.0, 1.0)
        params = ModelParams(5.0, 0.01, 1.0)
        theta = np.array([0.05, 0.4, 0.6])
        r0, J, _ = ph._one_rsb_residuals(theta, params, corr)
        for j in range(3):
            h = 1e-7 * max(abs(theta[j]), 1e-3)
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            rp, _, _ = ph._one_rsb_residuals(tp, params, corr)
            rm, _, _ = ph._one_rsb_residuals(tm, params, corr)
            fd = (rp - rm) / (2 * h)
            assert np.allclose(J[:, j], fd, rtol=1e-5, atol=1e-7)

    def test_gamma_one_matches_closed_forms(self):
        corr = cm.power_law(1.0, 1.0, 1.0)
        beta, t = 2.0, 1.0
        lar = ph.larkin_mass(beta, t, corr)
        params = ModelParams(beta, lar / 10, t)
        sol = ep.solve_1rsb(params, corr)
        assert sol.extras["m"] == pytest.approx((2.0 / t) ** (1 / 3) / beta, abs=1e-10)
        trip = ph.frsb_triple(beta, t, corr, params.mu)
        assert sol.extras["q_0"] == pytest.approx(trip["q_0"], abs=1e-9)
        assert sol.extras["q_star"] == pytest.approx(trip["q_star"], abs=1e-9)
        assert sol.q_c == pytest.approx(trip["q_c"], abs=1e-9)

    def test_exponential_m_bounded_away_from_zero(self):
        corr = cm.exponential(1.0, 1.0)
        beta, t = 5.0, 1.0
        ms = []
        for mu in (1e-2, 1e-3, 1e-4):
            params = ModelParams(beta, mu, t)
            sol = ep.solve_1rsb(params, corr)
            assert sol.residuals.max_abs < 1e-8
            ms.append(sol.extras["m"])
        assert min(ms) > 0.05
        assert max(ms) <= 1.0

    def test_ordering_invariant(self):
        corr = cm.exponential(1.0, 1.0)
        sol = ep.solve_1rsb(ModelParams(5.0, 1e-3, 1.0), corr)
        q0, q1 = sol.extras["q_0"], sol.extras["q_star"]
        assert 0 < q0 < q1 < sol.q_c

    def test_gap_lower_bound(self):
        # beta (q_c - q_*) >= min(U(4B''(0)), mu/(4B''(0)), r1(mu)) with the
        # continuum kernels
        corr = cm.exponential(1.0, 1.0)
        params = ModelParams(5.0, 1e-3, 1.0)
        sol = ep.solve_1rsb(params, corr)
        ker = ep.continuum(params.t)
        b2 = cm.eval_b(corr, 0.0, 2)
        bound = min(ker.u_inv(4 * b2), params.mu / (4 * b2), ker.r1(params.mu))
        assert params.beta * (sol.q_c - sol.extras["q_star"]) >= bound - 1e-12


class TestSolveFrsb:
    @pytest.fixture(scope="class")
    def frsb_sol(self):
        corr = cm.power_law(1.0, 1.0, 0.5)
        lar = ph.larkin_mass(2.0, 1.0, corr)
        params = ModelParams(2.0, lar / 10, 1.0)
        return params, corr, ep.solve_frsb(params, corr)

    def test_residuals(self, frsb_sol):
        _, _, sol = frsb_sol
        assert abs(sol.residuals.larkin_residual) <= 1e-10
        assert sol.residuals.max_abs <= 1e-8

    def test_cdf_matches_explicit_formula(self, frsb_sol):
        params, corr, sol = frsb_sol
        q0, q1 = sol.extras["q_0"], sol.extras["q_star"]
        s = np.linspace(q0, q1 * (1 - 1e-12), 400)
        explicit = ph.frsb_cdf_explicit(params.beta, params.t, 0.5, sol.q_c, s)
        assert np.max(np.abs(sol.measure.cdf(s) - explicit)) < 1e-8

    def test_f_vanishes_on_support(self, frsb_sol):
        params, corr, sol = frsb_sol
        import elpoly.parisi as par
        ev = par.StationarityEvaluator(ep.continuum(params.t), params, corr,
                                       sol.q_c, sol.measure)
        s = np.linspace(sol.extras["q_0"], sol.extras["q_star"] * (1 - 1e-9), 64)
        assert np.max(np.abs(ev.big_f(s))) < 1e-8

    def test_stationarity_form_matches(self, frsb_sol):
        _, _, sol = frsb_sol
        assert sol.extras["matched_form"] == "stationarity"
        assert abs(sol.extras["q_0_residual_stationarity"]) < 1e-12
        assert abs(sol.extras["q_0_residual_printed"]) > 1e-3

    def test_degenerate_limit_toward_rs(self):
        corr = cm.power_law(1.0, 1.0, 0.5)
        beta, t = 2.0, 1.0
        lar = ph.larkin_mass(beta, t, corr)
        gaps = []
        for frac in (0.9, 0.99, 0.999):
            sol = ep.solve_frsb(ModelParams(beta, lar * frac, t), corr)
            gaps.append(sol.extras["q_star"] - sol.extras["q_0"])
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-2
        # free energy approaches the RS closed form
        params = ModelParams(beta, lar * 0.999, t)
        sol = ep.solve_frsb(params, corr)
        import elpoly.parisi as par
        assert sol.free_energy == pytest.approx(par.rs_free_energy(params, corr),
                                                abs=1e-6)

    def test_preconditions(self):
        with pytest.raises(ValidationError):
            ep.solve_frsb(ModelParams(2.0, 1.0, 1.0), cm.exponential(1.0, 1.0))
        corr = cm.power_law(1.0, 1.0, 0.5)
        lar = ph.larkin_mass(2.0, 1.0, corr)
        with pytest.raises(ValidationError):
            ep.solve_frsb(ModelParams(2.0, lar * 2.0, 1.0), corr)


class TestClassify:
    def test_dichotomies(self):
        corr2 = cm.power_law(1.0, 1.0, 2.0)
        lar2 = ph.larkin_mass(3.0, 1.0, corr2)
        assert ph.classify(ModelParams(3.0, lar2 / 5, 1.0), corr2) == ONE_RSB
        corr_h = cm.power_law(1.0, 1.0, 0.5)
        lar_h = ph.larkin_mass(2.0, 1.0, corr_h)
        assert ph.classify(ModelParams(2.0, lar_h / 10, 1.0), corr_h) == FRSB
        lar_e = ph.larkin_mass(1.0, 1.0, cm.exponential(1.0, 1.0))
        if lar_e is not None:
            assert ph.classify(ModelParams(1.0, lar_e * 2, 1.0),
                               cm.exponential(1.0, 1.0)) == RS

    def test_solve_dispatch(self):
        corr = cm.power_law(1.0, 1.0, 0.5)
        lar = ph.larkin_mass(2.0, 1.0, corr)
        sol = ep.solve(ModelParams(2.0, lar / 10, 1.0), corr)
        assert sol.phase == FRSB


class TestTranslationStationarity:
    def test_larkin_direction_is_linear(self):
        # P(q+r, zeta^r) - P(q, zeta) = r/2 (beta K(beta delta(0)) - beta mu):
        # vanishing slope exactly at the Larkin condition
        import elpoly.parisi as par
        params = ModelParams(1.0, 1.0, 1.0)
        corr = cm.exponential(1.0, 1.0)
        sol = ep.solve_rs(params, corr)
        ker = ep.continuum(1.0)
        v0 = par.eval_functional(ker, params, corr, sol.q_c, sol.measure)
        for r in (0.01, 0.05):
            zr = sol.measure.translate(r)
            vr = par.eval_functional(ker, params, corr, sol.q_c + r, zr)
            assert vr == pytest.approx(v0, abs=1e-8 + 1e-4 * r * r)


class TestBoundaryAndMassless:
    def test_massless_exponential_equals_cube_root_2e(self):
        val = ph.massless_transition_beta(1.0, cm.exponential(1.0, 1.0))
        assert val == pytest.approx((2 * math.e) ** (1 / 3), rel=1e-8)

    def test_massless_power_two_is_two(self):
        # tangency algebra gives exactly 2 for gamma = 2 (the figure's quoted
        # 1.7583... equals the exponential intercept; see the decisions ledger)
        val = ph.massless_transition_beta(1.0, cm.power_law(1.0, 1.0, 2.0))
        assert val == pytest.approx(2.0, rel=1e-8)

    def test_no_intercept_for_long_range(self):
        assert ph.massless_transition_beta(1.0, cm.power_law(1.0, 1.0, 0.5)) is None

    def test_boundary_curve_exponential(self):
        corr = cm.exponential(1.0, 1.0)
        curve = ph.phase_boundary(1.0, corr, [2.2, 2.6, 3.0],
                                  mu_lo=1e-6, mu_hi=1e2, per_decade=12)
        assert len(curve.points) == 3
        betas = [b for b, _ in curve.points]
        assert betas == sorted(betas)
        # the largest flip coincides with the Larkin mass where it exists
        for beta, mu_b in curve.points:
            lar = ph.larkin_mass(beta, 1.0, corr)
            assert lar is not None
            assert mu_b == pytest.approx(lar, rel=1e-2)

    def test_boundary_empty_when_rs_everywhere(self):
        corr = cm.exponential(1.0, 1.0)
        curve = ph.phase_boundary(1.0, corr, [0.5], mu_lo=1e-4, mu_hi=1e2,
                                  per_decade=8)
        assert curve.points == []
