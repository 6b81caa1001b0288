import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elpoly import correlator as cm
from elpoly.measures import (Atom, ClosedFormCdf, ConstantCdf, ModelParams,
                             ParisiMeasure, SampledCdf)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 1.0, lattice_size=0)
    p = ModelParams(1.0, 2.0, 3.0, lattice_size=4)
    assert p.lattice_size == 4


class TestDirac:
    def test_cdf_right_continuity(self):
        m = ParisiMeasure.dirac(0.6, 1.0)
        assert m.cdf(0.5) == 0.0
        assert m.cdf(0.6) == 1.0

    def test_delta(self):
        m = ParisiMeasure.dirac(0.6, 1.0)
        assert m.delta(0.0) == pytest.approx(0.4, abs=1e-15)
        assert m.delta(0.8) == pytest.approx(0.2, abs=1e-15)
        assert m.delta(1.0) == 0.0

    def test_q_star(self):
        assert ParisiMeasure.dirac(0.6, 1.0).q_star == 0.6


class TestTwoAtom:
    def test_cdf_and_delta(self):
        m = ParisiMeasure.two_atom(0.2, 0.6, 0.3, 1.0)
        assert m.cdf(0.4) == pytest.approx(0.3)
        assert m.delta(0.0) == pytest.approx(0.52)  # (q-q*) + m (q*-q0)

    def test_translate(self):
        m = ParisiMeasure.two_atom(0.2, 0.6, 0.3, 1.0)
        mt = m.translate(0.2)
        assert mt.q == pytest.approx(1.2)
        assert mt.cdf(0.4) == pytest.approx(0.3)
        assert mt.cdf(0.39) == pytest.approx(0.0)

    def test_translate_negative(self):
        m = ParisiMeasure.dirac(0.6, 1.0)
        mt = m.translate(-0.5)
        assert mt.q == pytest.approx(0.5)
        assert mt.q_star == pytest.approx(0.1)
        with pytest.raises(ValueError):
            m.translate(-0.7)

    def test_translate_delta_commutation(self):
        m = ParisiMeasure.two_atom(0.2, 0.6, 0.3, 1.0)
        mt = m.translate(0.15)
        for s in np.linspace(0.0, 1.0, 23):
            assert mt.delta(s + 0.15) == pytest.approx(m.delta(s), abs=1e-14)


def random_measure(draw_locs, draw_masses, q=1.0):
    locs = sorted(draw_locs)
    masses = np.asarray(draw_masses[: len(locs)])
    masses = masses / masses.sum()
    segs = [Atom(loc * q * 0.9, m) for loc, m in zip(locs, masses)]
    return ParisiMeasure(q, segs)


@settings(max_examples=50, deadline=None)
@given(locs=st.lists(st.floats(0.01, 0.99), min_size=1, max_size=5, unique=True),
       masses=st.lists(st.floats(0.05, 1.0), min_size=5, max_size=5))
def test_delta_properties_on_random_atomic_measures(locs, masses):
    m = random_measure(locs, masses)
    s = np.linspace(0.0, m.q, 101)
    d = m.delta(s)
    # nonincreasing, 1-Lipschitz, convex
    diffs = np.diff(d)
    h = s[1] - s[0]
    assert np.all(diffs <= 1e-12)
    assert np.all(np.abs(diffs) <= h + 1e-12)
    assert np.all(np.diff(d, 2) >= -1e-12)
    # lower bound q - max(s, q_*), equality for Dirac
    bound = m.q - np.maximum(s, m.q_star)
    assert np.all(d >= bound - 1e-12)
    # total mass within 1e-12
    assert m.cdf(m.q) == pytest.approx(1.0, abs=1e-12)


def test_dirac_delta_attains_lower_bound():
    m = ParisiMeasure.dirac(0.3, 1.0)
    s = np.linspace(0.0, 1.0, 41)
    assert np.allclose(m.delta(s), 1.0 - np.maximum(s, 0.3), atol=1e-14)


class TestSegmentKinds:
    def test_sampled_cdf(self):
        grid = (0.2, 0.4, 0.6)
        vals = (0.1, 0.5, 1.0)
        m = ParisiMeasure(1.0, [SampledCdf(0.2, 0.6, grid, vals)])
        assert m.cdf(0.4) == pytest.approx(0.5)
        assert m.cdf(0.5) == pytest.approx(0.75)
        # delta matches a dense numeric integral of the interpolated CDF
        for s in (0.0, 0.35, 0.55, 0.9):
            pts = np.linspace(s, 1.0, 20001)
            num = np.trapezoid(m.cdf(pts), pts)
            assert m.delta(s) == pytest.approx(num, abs=1e-8)

    def test_constant_cdf_requires_monotone(self):
        with pytest.raises(ValueError):
            ParisiMeasure(1.0, [Atom(0.1, 0.7), ConstantCdf(0.1, 0.5, 0.3),
                                Atom(0.5, 0.7)])

    def test_mass_must_be_one(self):
        with pytest.raises(ValueError):
            ParisiMeasure(1.0, [Atom(0.5, 0.8)])

    def test_support_cannot_contain_q(self):
        with pytest.raises(ValueError):
            ParisiMeasure.dirac(1.0, 1.0)

    def test_closed_form_frsb_power_law_delta(self):
        # assembled via the explicit CDF; integral cross-checked numerically
        beta, t, gamma, qc = 2.0, 1.0, 0.5, 10.0
        seg = ClosedFormCdf(4.0, 9.0, "frsb_power_law",
                            {"beta": beta, "t": t, "gamma": gamma, "q_c": qc})
        amp = (gamma + 2) / (3 * beta) * (4 / (t * gamma * (gamma + 1))) ** (1 / 3)
        c_hi = amp * (1 + 2 * qc - 18.0) ** ((gamma - 1) / 3)
        m = ParisiMeasure(qc, [seg, Atom(9.0, 1.0 - c_hi)])
        s = 5.0
        grid = np.linspace(s, qc, 200001)
        num = np.trapezoid(m.cdf(grid), grid)
        assert m.delta(s) == pytest.approx(num, abs=1e-7)


def test_json_round_trip():
    m = ParisiMeasure.two_atom(0.2, 0.6, 0.3, 1.0)
    m2 = ParisiMeasure.from_json(m.to_json())
    assert m2.sup_norm_distance(m) == 0.0
    # closed-form piece with a correlator payload
    corr = cm.power_law(1.0, 1.0, 0.5)
    seg = ClosedFormCdf(4.0, 9.0, "frsb_general",
                        {"beta": 2.0, "t": 1.0, "q_c": 10.0, "correlator": corr})
    c_hi = float(cm.ub_prime(corr, 1.0, 1.0)) / 2.0
    m3 = ParisiMeasure(10.0, [seg, Atom(9.0, 1.0 - c_hi)])
    m4 = ParisiMeasure.from_json(m3.to_json())
    s = np.linspace(0, 10.0, 101)
    assert np.allclose(m3.cdf(s), m4.cdf(s), atol=0)


def test_intervals_and_support_grid():
    m = ParisiMeasure.two_atom(0.2, 0.6, 0.3, 1.0)
    iv = m.intervals(0.0, 0.6)
    assert iv[0][0] == 0.0 and iv[-1][1] == pytest.approx(0.6)
    sg = m.support_grid()
    assert np.any(np.isclose(sg, 0.2)) and np.any(np.isclose(sg, 0.6))
