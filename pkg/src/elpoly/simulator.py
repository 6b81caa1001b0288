"""Desk-scale Monte Carlo of the finite-(N, L) Gibbs measure.

The random environment is realized through random Fourier features: one
squared-exponential atom (lambda, w) of the mixture contributes

    V_x(u) = sqrt(N) sqrt(w) sqrt(2/M) sum_m g_m cos(omega_m . u + phi_m)

with frequencies of per-coordinate variance 2 lambda^2 / N, so that the
feature covariance reproduces N w exp(-lambda^2 ||u - u'||_N^2) up to an
O(1/sqrt(M)) bias.  Sampling is Metropolis-adjusted Langevin targeting
exp(-beta H) with the Hamiltonian

    H(u) = (1/2) sum_x (mu ||u(x)||^2 - t (Delta_L u(x), u(x))) L^{-1/2}
           + sum_x V_x(u(x)) L^{-1/4}.

Each (seed, replica, disorder) stream is an independent counter-based
Philox generator, so identical seeds give bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import correlator as corrmod
from .correlator import Correlator
from .errors import ElpolyError, ValidationError
from .measures import ModelParams


class SimulationError(ElpolyError):
    pass


def _rng(seed: int, *stream) -> np.random.Generator:
    key = np.array([seed] + list(stream), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class EnvironmentRealization:
    """Random-feature expansion of the site potentials V_{N,x}."""

    corr: Correlator
    N: int
    L: int
    M: int
    seed: int
    weights: np.ndarray          # (n_atoms,)
    omega: np.ndarray            # (n_atoms, L, M, N)
    phi: np.ndarray              # (n_atoms, L, M)
    amp: np.ndarray              # (n_atoms, L, M)

    def potential(self, u: np.ndarray) -> np.ndarray:
        """Per-site potentials V_x(u(x)); u has shape (L, N)."""
        if self.omega.shape[0] == 0:
            return np.zeros(self.L)
        out = np.zeros(self.L)
        scale = math.sqrt(self.N) * math.sqrt(2.0 / self.M)
        for i, w in enumerate(self.weights):
            c = np.einsum("lmn,ln->lm", self.omega[i], u) + self.phi[i]
            out += math.sqrt(w) * (self.amp[i] * np.cos(c)).sum(axis=1)
        return scale * out

    def potential_grad(self, u: np.ndarray) -> np.ndarray:
        """d/du(x) of V_x(u(x)); shape (L, N)."""
        if self.omega.shape[0] == 0:
            return np.zeros_like(u)
        out = np.zeros_like(u)
        scale = math.sqrt(self.N) * math.sqrt(2.0 / self.M)
        for i, w in enumerate(self.weights):
            c = np.einsum("lmn,ln->lm", self.omega[i], u) + self.phi[i]
            out += math.sqrt(w) * np.einsum("lm,lmn->ln", -self.amp[i] * np.sin(c),
                                            self.omega[i])
        return scale * out

    def potential_with_grad(self, u: np.ndarray):
        """(per-site potentials, gradient) sharing one phase evaluation."""
        if self.omega.shape[0] == 0:
            return np.zeros(self.L), np.zeros_like(u)
        val = np.zeros(self.L)
        grad = np.zeros_like(u)
        scale = math.sqrt(self.N) * math.sqrt(2.0 / self.M)
        for i, w in enumerate(self.weights):
            c = np.einsum("lmn,ln->lm", self.omega[i], u) + self.phi[i]
            sw = math.sqrt(w)
            val += sw * (self.amp[i] * np.cos(c)).sum(axis=1)
            grad += sw * np.einsum("lm,lmn->ln", -self.amp[i] * np.sin(c),
                                   self.omega[i])
        return scale * val, scale * grad


def sample_environment(corr: Correlator, N: int, L: int, n_features: int,
                       seed: int) -> EnvironmentRealization:
    """Draw one disorder realization; corr is converted to a mixture."""
    if n_features < 1:
        raise ValidationError("n_features must be >= 1")
    mix = corrmod.to_mixture(corr)
    if mix.c0 > 0:
        raise ValidationError("c0 > 0 has no square-integrable feature form")
    rng = _rng(seed, 0xEABB)
    atoms = mix.atoms
    n_atoms = len(atoms)
    omega = np.empty((n_atoms, L, n_features, N))
    phi = np.empty((n_atoms, L, n_features))
    amp = np.empty((n_atoms, L, n_features))
    weights = np.array([w for _, w in atoms])
    for i, (lam, _) in enumerate(atoms):
        sigma = math.sqrt(2.0 * lam * lam / N)
        omega[i] = rng.normal(0.0, sigma, size=(L, n_features, N))
        phi[i] = rng.uniform(0.0, 2.0 * math.pi, size=(L, n_features))
        amp[i] = rng.normal(0.0, 1.0, size=(L, n_features))
    return EnvironmentRealization(corr=mix, N=N, L=L, M=n_features, seed=seed,
                                  weights=weights, omega=omega, phi=phi, amp=amp)


def _laplacian(u: np.ndarray, L: int) -> np.ndarray:
    if L == 1:
        return np.zeros_like(u)
    return L * (np.roll(u, -1, axis=0) + np.roll(u, 1, axis=0) - 2.0 * u)


def hamiltonian(u: np.ndarray, env: Optional[EnvironmentRealization],
                params: ModelParams, L: int) -> float:
    """H(u) for a configuration of shape (L, N)."""
    if u.shape[0] != L:
        raise ValidationError("configuration shape mismatch")
    quad = 0.5 * (params.mu * float(np.sum(u * u))
                  - params.t * float(np.sum(_laplacian(u, L) * u))) / math.sqrt(L)
    pot = 0.0
    if env is not None:
        pot = float(np.sum(env.potential(u))) * L ** -0.25
    return quad + pot


def gradient(u: np.ndarray, env: Optional[EnvironmentRealization],
             params: ModelParams, L: int) -> np.ndarray:
    """Exact analytic gradient of the Hamiltonian."""
    g = (params.mu * u - params.t * _laplacian(u, L)) / math.sqrt(L)
    if env is not None:
        g = g + env.potential_grad(u) * L ** -0.25
    return g


def hamiltonian_with_grad(u: np.ndarray, env: Optional[EnvironmentRealization],
                          params: ModelParams, L: int):
    """Energy and gradient in one pass (one feature-phase evaluation)."""
    lap = _laplacian(u, L)
    quad = 0.5 * (params.mu * float(np.sum(u * u))
                  - params.t * float(np.sum(lap * u))) / math.sqrt(L)
    g = (params.mu * u - params.t * lap) / math.sqrt(L)
    if env is None:
        return quad, g
    v, vg = env.potential_with_grad(u)
    return quad + float(np.sum(v)) * L ** -0.25, g + vg * L ** -0.25


@dataclass
class ChainStats:
    """Recorded post-burn-in samples of two replicas sharing one disorder."""

    gram: List[np.ndarray]       # per replica: (n_samples, L, L), entries (u(x),u(y))_N
    overlap: np.ndarray          # (n_samples, L): (u(x), u'(x))_N
    acceptance: Tuple[float, ...]
    step_size: float
    n_steps: int
    burn_in: int

    def radius_samples(self, replica: int = 0) -> np.ndarray:
        g = self.gram[replica]
        return g[:, np.arange(g.shape[1]), np.arange(g.shape[1])]

    def msd_samples(self, x: int, y: int, replica: int = 0) -> np.ndarray:
        g = self.gram[replica]
        return g[:, x, x] + g[:, y, y] - 2.0 * g[:, x, y]


def batch_stats(samples: np.ndarray, n_batches: int = 32) -> Tuple[float, float]:
    """Mean and batch-means standard error of the mean."""
    n = len(samples)
    if n < n_batches:
        return float(np.mean(samples)), float(np.std(samples) / math.sqrt(max(n, 1)))
    cut = n - n % n_batches
    means = np.asarray(samples[:cut]).reshape(n_batches, -1).mean(axis=1)
    return float(np.mean(means)), float(np.std(means, ddof=1) / math.sqrt(n_batches))


def run_chains(params: ModelParams, env: Optional[EnvironmentRealization],
               N: int, L: int, n_steps: int, step_size: float = 0.1,
               seed: int = 0, n_replicas: int = 2,
               record_every: int = 1,
               init_radius: Optional[float] = None) -> ChainStats:
    """MALA on n_replicas independent chains sharing the environment.

    The step size is tuned to acceptance in [0.4, 0.7] during the first 20%
    of steps and then frozen; per-site norms and the cross-replica overlaps
    are recorded every record_every steps after burn-in.  init_radius scales
    the Gaussian start so each site begins at that squared radius (a warm
    start toward the predicted typical set).
    """
    if n_steps < 10:
        raise ValidationError("n_steps too small")
    beta = params.beta
    burn = n_steps // 5
    rngs = [_rng(seed, 1 + r) for r in range(n_replicas)]
    us = [rngs[r].normal(0.0, 1.0, size=(L, N)) for r in range(n_replicas)]
    if init_radius is not None:
        for u in us:
            norms = np.sqrt(np.einsum("ln,ln->l", u, u) / N)
            u *= math.sqrt(init_radius) / norms[:, None]
    eg = [hamiltonian_with_grad(us[r], env, params, L) for r in range(n_replicas)]
    energies = [x[0] for x in eg]
    grads = [x[1] for x in eg]
    eps = step_size
    acc_win = np.zeros(n_replicas)
    acc_tot = np.zeros(n_replicas)
    n_rec = (n_steps - burn) // record_every
    gram = [np.empty((n_rec, L, L)) for _ in range(n_replicas)]
    overlap = np.empty((n_rec, L))
    rec = 0
    win = 0

    for step in range(n_steps):
        for r in range(n_replicas):
            u, e, g = us[r], energies[r], grads[r]
            noise = rngs[r].normal(0.0, 1.0, size=(L, N))
            prop = u - 0.5 * eps * eps * beta * g + eps * noise
            e_p, g_p = hamiltonian_with_grad(prop, env, params, L)
            if not np.isfinite(e_p):
                raise SimulationError(
                    f"divergent energy at step {step}, replica {r}: H={e_p!r}, "
                    f"step_size={eps!r}")
            fwd = prop - u + 0.5 * eps * eps * beta * g
            bwd = u - prop + 0.5 * eps * eps * beta * g_p
            log_alpha = (-beta * (e_p - e)
                         + (np.sum(fwd * fwd) - np.sum(bwd * bwd)) / (2.0 * eps * eps))
            if math.log(rngs[r].uniform()) < log_alpha:
                us[r], energies[r], grads[r] = prop, e_p, g_p
                acc_win[r] += 1
                acc_tot[r] += 1
        win += 1
        if step < burn and win == 50:
            rate = float(np.mean(acc_win)) / 50.0
            if rate > 0.7:
                eps *= 1.15
            elif rate < 0.4:
                eps /= 1.15
            acc_win[:] = 0
            win = 0
        if step >= burn and (step - burn) % record_every == 0 and rec < n_rec:
            for r in range(n_replicas):
                gram[r][rec] = us[r] @ us[r].T / N
            if n_replicas >= 2:
                overlap[rec] = np.einsum("ln,ln->l", us[0], us[1]) / N
            rec += 1

    return ChainStats(gram=[g[:rec] for g in gram], overlap=overlap[:rec],
                      acceptance=tuple(acc_tot / n_steps), step_size=eps,
                      n_steps=n_steps, burn_in=burn)


def estimate_msd(chains: ChainStats, x: int, y: int) -> Tuple[float, float]:
    """Time-averaged E<||u(x) - u(y)||_N^2> with a batch-means error bar,
    pooled over replicas."""
    if x == y:
        return 0.0, 0.0
    pooled = np.concatenate([chains.msd_samples(x, y, r) for r in range(len(chains.gram))])
    return batch_stats(pooled)


def estimate_radius(chains: ChainStats) -> Tuple[float, float]:
    """Site- and replica-averaged E<||u(x)||_N^2> with an error bar."""
    pooled = np.concatenate([chains.radius_samples(r).mean(axis=1)
                             for r in range(len(chains.gram))])
    return batch_stats(pooled)


@dataclass
class EnsembleResult:
    radius_mean: float
    radius_err: float
    overlap_mean: float
    overlap_err: float
    overlap_samples: np.ndarray
    msd: dict
    acceptance: float
    per_disorder_radius: List[float] = field(default_factory=list)


def run_ensemble(corr: Correlator, params: ModelParams, N: int, L: int,
                 n_features: int, n_steps: int, seed: int,
                 n_disorder: int = 8, step_size: float = 0.1,
                 msd_pairs: Sequence[Tuple[int, int]] = (),
                 init_radius: Optional[float] = None) -> EnsembleResult:
    """Average chain statistics over independent disorder realizations."""
    rad_means, rad_errs = [], []
    ov_all = []
    msd_acc = {pair: ([], []) for pair in msd_pairs}
    accs = []
    for d in range(n_disorder):
        env = None if corr.is_zero else sample_environment(corr, N, L, n_features,
                                                           seed + 7919 * d)
        chains = run_chains(params, env, N, L, n_steps, step_size=step_size,
                            seed=seed + 104729 * d, init_radius=init_radius)
        m, e = estimate_radius(chains)
        rad_means.append(m)
        rad_errs.append(e)
        ov_all.append(chains.overlap.reshape(-1))
        for pair in msd_pairs:
            mm, ee = estimate_msd(chains, *pair)
            msd_acc[pair][0].append(mm)
            msd_acc[pair][1].append(ee)
        accs.append(float(np.mean(chains.acceptance)))
    ov = np.concatenate(ov_all)
    n_d = max(n_disorder, 1)
    rad_mean = float(np.mean(rad_means))
    rad_err = float(np.sqrt(np.sum(np.square(rad_errs))) / n_d
                    + (np.std(rad_means, ddof=1) / math.sqrt(n_d) if n_d > 1 else 0.0))
    ov_mean = float(np.mean(ov))
    ov_err = float(np.std(ov) / math.sqrt(max(len(ov) / 50.0, 1.0)))  # crude ESS guard
    msd = {f"{x}-{y}": (float(np.mean(ms)), float(np.sqrt(np.sum(np.square(es))) / n_d
                                                  + (np.std(ms, ddof=1) / math.sqrt(n_d)
                                                     if n_d > 1 else 0.0)))
           for (x, y), (ms, es) in msd_acc.items()}
    return EnsembleResult(radius_mean=rad_mean, radius_err=rad_err,
                          overlap_mean=ov_mean, overlap_err=ov_err,
                          overlap_samples=ov, msd=msd,
                          acceptance=float(np.mean(accs)),
                          per_disorder_radius=rad_means)
