"""Mean-squared-displacement functionals and wandering-exponent asymptotics.

The generic continuum functional for a solved pair (q_c, zeta):

    H(x) = -(2/beta) G_x(1 / (beta^2 (q_c - q_*)^2 t))
           + int_0^{q_*} G_x'(1 / (beta^2 delta(u)^2 t))
                         * 4 / (beta^3 delta(u)^3 t) du,

with G the regularized continuum Green function.  The finite-L analogue
replaces G by the lattice resolvent-entry difference and the integrand by
-2 G'(K(beta delta)) K'(beta delta).  Phase-specialized closed forms (RS,
1RSB, and the massless FRSB power-law limit) are provided alongside and
cross-checked against the generic path by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gamma as gamma_fn

from . import correlator as corrmod
from . import phase as phasemod
from .correlator import Correlator
from .errors import QuadratureError, ValidationError
from .kernels import ContinuumKernel, LatticeKernel
from .measures import ModelParams, RsbSolution
from .quadrature import adaptive_gl, geometric_panels

DIFFUSIVE_RS = "diffusive_rs"
DIFFUSIVE_RSB = "diffusive_rsb"
SUPERDIFFUSIVE_FRSB = "superdiffusive_frsb"


def gg(x: float, t: float, mu, order: int = 0):
    """Regularized continuum Green function G_{x,t}(mu) and its derivative."""
    return ContinuumKernel(t).green(mu, x, order)


def h_continuum(params: ModelParams, sol: RsbSolution, x: float,
                tol: float = 1e-12) -> float:
    """Generic displacement functional of a solved continuum pair."""
    if x == 0:
        return 0.0
    beta, t = params.beta, params.t
    zeta = sol.measure
    q, qstar = zeta.q, zeta.q_star
    ker = ContinuumKernel(t)
    top = -(2.0 / beta) * ker.green(1.0 / (beta ** 2 * (q - qstar) ** 2 * t), x, 0)

    def integrand(u):
        d = zeta.delta(u)
        return (ker.green(1.0 / (beta * d) ** 2 / t, x, 1)
                * 4.0 / (beta ** 3 * d ** 3 * t))

    integral = 0.0
    for lo, hi in zeta.intervals(0.0, qstar):
        integral += adaptive_gl(integrand, lo, hi, tol)[0]
    return top + integral


def h_rs(params: ModelParams, corr: Correlator, x: float) -> float:
    """RS closed form
    -(2/beta) G_x(mu) - 4 B'(2/(beta sqrt(mu t))) G_x'(mu).

    The disorder term enters with -4 B' (positive, since B' < 0): this is
    what the generic functional reduces to on a Dirac pair, matching the
    finite-L reduction -2 q_* G'(mu) K'(r1(mu)) with q_* = -2 B' r2(mu).
    """
    if x == 0:
        return 0.0
    beta, mu, t = params.beta, params.mu, params.t
    bp = corrmod.eval_b(corr, 2.0 / (beta * math.sqrt(mu * t)), 1)
    return -(2.0 / beta) * gg(x, t, mu, 0) - 4.0 * bp * gg(x, t, mu, 1)


def h_1rsb(params: ModelParams, sol: RsbSolution, x: float) -> float:
    """One-step closed form:
    -(2/beta) G_x(nu) + 4 q_0 sqrt(mu^3 t) G_x'(mu)
        + (2/(beta m)) (G_x(nu) - G_x(mu)),  nu = 1/(beta^2 (q_c-q_*)^2 t)."""
    if x == 0:
        return 0.0
    if sol.phase != "ONE_RSB":
        raise ValidationError("h_1rsb needs a ONE_RSB solution")
    beta, mu, t = params.beta, params.mu, params.t
    q0, m = sol.extras["q_0"], sol.extras["m"]
    qstar = sol.extras["q_star"]
    nu = 1.0 / (beta ** 2 * (sol.q_c - qstar) ** 2 * t)
    return (-(2.0 / beta) * gg(x, t, nu, 0)
            + 4.0 * q0 * math.sqrt(mu ** 3 * t) * gg(x, t, mu, 1)
            + (2.0 / (beta * m)) * (gg(x, t, nu, 0) - gg(x, t, mu, 0)))


def h_frsb_massless(beta: float, t: float, gamma: float, x: float,
                    mu: float = 1e-10, rel_tol: float = 1e-8) -> float:
    """Massless-limit FRSB displacement for B(x) = (1+x)^(-gamma), gamma < 1:

        H = -(2/beta) G_x(mu_Lar)
            + int_{2/(beta sqrt(mu_Lar t)) + 1}^{c0 mu^{-3/(2(gamma+2))}}
              G_x'((2 gamma (gamma+1))^{2/3} / (u^{2(gamma+2)/3} t^{1/3}))
              * 4 gamma (gamma+1) / u^{gamma+2} du,

    integrated over geometric panels; the integrand decays like
    u^{-2(gamma+2)/3}, which truncates the upper limit at relative tail
    error rel_tol.
    """
    if not (0.0 < gamma < 1.0):
        raise ValidationError("massless FRSB form needs 0 < gamma < 1")
    if x == 0:
        return 0.0
    corr = corrmod.power_law(1.0, 1.0, gamma)
    mu_lar = phasemod.larkin_mass(beta, t, corr)
    c0 = (2.0 * gamma * (gamma + 1.0) / math.sqrt(t)) ** (1.0 / (gamma + 2.0))
    u_lo = 2.0 / (beta * math.sqrt(mu_lar * t)) + 1.0
    u_hi = c0 * mu ** (-3.0 / (2.0 * (gamma + 2.0)))
    top = -(2.0 / beta) * gg(x, t, mu_lar, 0)
    cc = (2.0 * gamma * (gamma + 1.0)) ** (2.0 / 3.0) / t ** (1.0 / 3.0)

    def integrand(u):
        y = cc * u ** (-2.0 * (gamma + 2.0) / 3.0)
        return gg(x, t, y, 1) * 4.0 * gamma * (gamma + 1.0) * u ** (-(gamma + 2.0))

    # tail envelope: for z = x sqrt(y/t) << 1, G' ~ z^2 / (8 sqrt(t y^3)),
    # so integrand <= K u^{-2(gamma+2)/3} with the constant below
    k_tail = x ** 2 * gamma * (gamma + 1.0) / (2.0 * t * math.sqrt(t * cc))
    p = 2.0 * (gamma + 2.0) / 3.0
    edges = geometric_panels(u_lo, u_hi, 2.0)
    total = 0.0
    reached = u_lo
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += adaptive_gl(integrand, lo, hi, rel_tol * max(abs(total), 1e-12) * 1e-2)[0]
        reached = hi
        tail_bound = k_tail * hi ** (1.0 - p) / (p - 1.0)
        if tail_bound < rel_tol * abs(total) and hi > 10.0 * u_lo:
            break
    if reached < u_hi:
        remaining = k_tail * reached ** (1.0 - p) / (p - 1.0)
        if remaining > rel_tol * max(abs(total), 1e-12):
            raise QuadratureError("massless FRSB tail truncation failed",
                                  achieved_error=remaining)
    return top + total


def h_discrete(L: int, params: ModelParams, sol_L: RsbSolution, x: float,
               tol: float = 1e-11) -> float:
    """Finite-L displacement of a solved lattice pair:

        -(2/beta) G_L(K(beta (q - q_*)))
        - 2 int_0^{q_*} G_L'(K(beta delta(u))) K'(beta delta(u)) du.
    """
    if x == 0:
        return 0.0
    beta = params.beta
    ker = LatticeKernel(L, params.t)
    zeta = sol_L.measure
    q, qstar = zeta.q, zeta.q_star
    top = -(2.0 / beta) * ker.green(ker.k(beta * (q - qstar)), x, 0)

    def integrand(u_arr):
        out = np.empty_like(u_arr)
        for i, u in enumerate(u_arr):
            bd = beta * float(zeta.delta(float(u)))
            kk = ker.k(bd)
            out[i] = ker.green(kk, x, 1) * ker.k_prime(bd)
        return out

    integral = 0.0
    for lo, hi in zeta.intervals(0.0, qstar):
        integral += adaptive_gl(integrand, lo, hi, tol)[0]
    return top - 2.0 * integral


@dataclass
class WanderingExponent:
    eta: float
    regime: str
    prefactor: Optional[float] = None

    def to_dict(self) -> dict:
        return {"eta": self.eta, "regime": self.regime, "prefactor": self.prefactor}


def wandering_exponent(corr: Correlator, t: float, beta: float) -> WanderingExponent:
    """Analytic wandering exponent per correlator family.

    Power law with gamma < 1: eta = 3/(2 (gamma+2)), superdiffusive, with
    the massless prefactor (2 gamma (gamma+1)/t^2)^{1/(gamma+2)}
    Gamma(2 - 3/(gamma+2)) for the normalized g = a = 1 case.  Power law
    with gamma >= 1 and the exponential family are diffusive (eta = 1/2);
    the regime records whether the massless model at this beta is RS or RSB.
    """
    if corr.kind not in (corrmod.EXPONENTIAL, corrmod.POWER_LAW):
        raise ValidationError("wandering exponent needs a closed-form correlator "
                              "(no analytic tail classification for mixtures)")
    if corr.kind == corrmod.POWER_LAW and corr.gamma < 1.0:
        eta = 3.0 / (2.0 * (corr.gamma + 2.0))
        pref = None
        if corr.g == 1.0 and corr.a == 1.0:
            pref = ((2.0 * corr.gamma * (corr.gamma + 1.0) / t ** 2)
                    ** (1.0 / (corr.gamma + 2.0))
                    * float(gamma_fn(2.0 - 3.0 / (corr.gamma + 2.0))))
        return WanderingExponent(eta=eta, regime=SUPERDIFFUSIVE_FRSB, prefactor=pref)
    b_star = phasemod.massless_transition_beta(t, corr)
    regime = DIFFUSIVE_RS if (b_star is not None and beta < b_star) else DIFFUSIVE_RSB
    return WanderingExponent(eta=0.5, regime=regime)


def loglog_slope(f, x_lo: float, x_hi: float) -> float:
    """Two-point log-log slope of f between x_lo and x_hi."""
    return (math.log(f(x_hi)) - math.log(f(x_lo))) / (math.log(x_hi) - math.log(x_lo))
