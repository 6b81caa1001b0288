import math

import numpy as np
import pytest

import elpoly as ep
import elpoly.simulator as sim
from elpoly import correlator as cm
from elpoly.errors import ValidationError
from elpoly.measures import ModelParams


class TestEnvironment:
    def test_zero_potential(self):
        env = sim.sample_environment(cm.zero(), 8, 2, 16, seed=1)
        u = np.ones((2, 8))
        assert np.all(env.potential(u) == 0.0)
        assert np.all(env.potential_grad(u) == 0.0)

    def test_c0_rejected(self):
        with pytest.raises(ValidationError):
            sim.sample_environment(cm.mixture([(1.0, 1.0)], c0=0.1), 8, 2, 16, seed=1)

    def test_variance_matches_covariance(self):
        # Var V(u) = N B(0) within 3 sigma across disorder realizations
        N, M = 8, 4096
        corr = cm.mixture([(1.0, 1.0)])
        rng = np.random.default_rng(5)
        us = rng.normal(size=(400, N))
        per_real = []
        for s in range(6):
            env = sim.sample_environment(corr, N, 1, M, seed=100 + s)
            vs = np.array([env.potential(u[None, :])[0] for u in us])
            per_real.append(np.var(vs))
        mean = np.mean(per_real)
        sem = np.std(per_real, ddof=1) / math.sqrt(len(per_real))
        assert abs(mean - N * cm.eval_b(corr, 0.0, 0)) <= 3 * sem

    def test_two_probe_covariance(self):
        N, M = 8, 4096
        corr = cm.mixture([(1.0, 1.0)])
        rng = np.random.default_rng(6)
        per_real = []
        for s in range(6):
            env = sim.sample_environment(corr, N, 1, M, seed=200 + s)
            prods = []
            for _ in range(300):
                u = rng.normal(size=N)
                d = rng.normal(size=N)
                d *= math.sqrt(N) / np.linalg.norm(d)  # ||d||_N^2 = 1
                prods.append(env.potential(u[None, :])[0]
                             * env.potential((u + d)[None, :])[0])
            per_real.append(np.mean(prods))
        mean = np.mean(per_real)
        sem = np.std(per_real, ddof=1) / math.sqrt(len(per_real))
        target = N * cm.eval_b(corr, 1.0, 0)
        assert abs(mean - target) <= 3 * sem

    def test_sites_independent(self):
        env = sim.sample_environment(cm.mixture([(1.0, 1.0)]), 4, 3, 64, seed=9)
        assert not np.allclose(env.omega[0, 0], env.omega[0, 1])


class TestHamiltonian:
    def test_zero_config_zero_disorder(self):
        params = ModelParams(1.0, 1.0, 1.0)
        u = np.zeros((4, 8))
        assert sim.hamiltonian(u, None, params, 4) == 0.0

    def test_constant_config_has_no_elastic_term(self):
        params = ModelParams(1.0, 2.0, 5.0)
        u = np.ones((4, 8)) * 1.7
        expected = 0.5 * params.mu * np.sum(u * u) / math.sqrt(4)
        assert sim.hamiltonian(u, None, params, 4) == pytest.approx(expected, rel=1e-14)

    def test_quadratic_form_matches_dense_matrix(self):
        L, N = 6, 3
        params = ModelParams(1.0, 0.8, 1.3)
        rng = np.random.default_rng(0)
        u = rng.normal(size=(L, N))
        D = np.zeros((L, L))
        for i in range(L):
            D[i, i] = -2.0 * L
            D[i, (i + 1) % L] = L
            D[i, (i - 1) % L] = L
        M = (params.mu * np.eye(L) - params.t * D) / math.sqrt(L)
        expected = 0.5 * float(np.einsum("xn,xy,yn->", u, M, u))
        assert sim.hamiltonian(u, None, params, L) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("L", [1, 2, 4])
    def test_gradient_matches_finite_differences(self, L):
        params = ModelParams(1.0, 1.0, 1.0)
        corr = cm.exponential(0.8, 1.0)
        env = sim.sample_environment(corr, 6, L, 256, seed=3)
        rng = np.random.default_rng(4)
        u = rng.normal(size=(L, 6))
        g = sim.gradient(u, env, params, L)
        h = 1e-6
        for i in range(L):
            for j in range(6):
                up, um = u.copy(), u.copy()
                up[i, j] += h
                um[i, j] -= h
                fd = (sim.hamiltonian(up, env, params, L)
                      - sim.hamiltonian(um, env, params, L)) / (2 * h)
                assert g[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_fused_matches_separate(self):
        params = ModelParams(1.0, 1.0, 1.0)
        env = sim.sample_environment(cm.exponential(1.0, 1.0), 6, 4, 128, seed=13)
        u = np.random.default_rng(1).normal(size=(4, 6))
        e, g = sim.hamiltonian_with_grad(u, env, params, 4)
        assert e == pytest.approx(sim.hamiltonian(u, env, params, 4), rel=1e-14)
        assert np.allclose(g, sim.gradient(u, env, params, 4), rtol=1e-14)


class TestChains:
    def test_reproducible(self):
        params = ModelParams(1.0, 1.0, 1.0)
        a = sim.run_chains(params, None, N=4, L=2, n_steps=500, seed=11)
        b = sim.run_chains(params, None, N=4, L=2, n_steps=500, seed=11)
        assert np.array_equal(a.gram[0], b.gram[0])
        assert np.array_equal(a.overlap, b.overlap)
        c = sim.run_chains(params, None, N=4, L=2, n_steps=500, seed=12)
        assert not np.array_equal(a.gram[0], c.gram[0])

    def test_acceptance_window(self):
        params = ModelParams(1.0, 1.0, 1.0)
        st = sim.run_chains(params, None, N=8, L=2, n_steps=4000, seed=2)
        for rate in st.acceptance:
            assert 0.3 < rate < 0.8

    def test_gaussian_moments_small(self):
        # quick 3-sigma sanity of the per-site second moment at B == 0
        params = ModelParams(1.0, 1.0, 1.0)
        st = sim.run_chains(params, None, N=16, L=2, n_steps=8000, seed=21)
        m, e = sim.estimate_radius(st)
        target = ep.lattice(2, 1.0).r1(1.0)
        assert abs(m - target) <= 3.5 * e

    def test_translation_invariance(self):
        params = ModelParams(1.0, 1.0, 1.0)
        st = sim.run_chains(params, None, N=16, L=4, n_steps=12000, seed=31)
        site_means = st.radius_samples(0).mean(axis=0)
        _, err = sim.batch_stats(st.radius_samples(0).mean(axis=1))
        assert np.max(site_means) - np.min(site_means) < 8 * err * math.sqrt(4)

    def test_msd_zero_distance(self):
        params = ModelParams(1.0, 1.0, 1.0)
        st = sim.run_chains(params, None, N=4, L=2, n_steps=400, seed=5)
        assert sim.estimate_msd(st, 1, 1) == (0.0, 0.0)


def test_batch_stats_basics():
    x = np.random.default_rng(0).normal(size=3200)
    m, e = sim.batch_stats(x)
    assert abs(m) < 4 * e
    assert e == pytest.approx(1.0 / math.sqrt(3200), rel=0.5)
