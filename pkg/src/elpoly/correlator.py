"""Spatial covariance functions of the random environment.

A covariance B is admissible in every dimension exactly when it is a
nonnegative mixture of squared-exponential atoms,

    B(x) = c0 + sum_i w_i * exp(-lambda_i^2 * x),

and the closed-form families carry explicit derivatives:

    exponential:  B(x) = g * exp(-a x)
    power law:    B(x) = g * (a + x)^(-gamma)

All solver-facing structure (RS/1RSB/FRSB splits, Larkin mass, wandering
exponents) is driven by the sign pattern of B and its first three
derivatives and by the convexity type of U_B(s) = (2 B''(2s) t)^(-1/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

EXPONENTIAL = "exponential"
POWER_LAW = "power_law"
MIXTURE = "mixture"

STRICTLY_CONVEX = "strictly_convex"
STRICTLY_CONCAVE = "strictly_concave"
LINEAR = "linear"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Correlator:
    """Covariance function of the isotropic Gaussian environment.

    kind is one of "exponential", "power_law", "mixture".  For the mixture
    kind, atoms is a sequence of (lambda, weight) pairs with lambda > 0 and
    weight > 0, and c0 >= 0 is an additive constant.  c0 > 0 is accepted by
    the type but lies outside the admissible class used by the solvers; it
    is flagged via outside_model_assumptions.
    """

    kind: str
    g: float = 1.0
    a: float = 1.0
    gamma: Optional[float] = None
    c0: float = 0.0
    atoms: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in (EXPONENTIAL, POWER_LAW, MIXTURE):
            raise ValueError(f"unknown correlator kind {self.kind!r}")
        if self.kind in (EXPONENTIAL, POWER_LAW):
            if self.g <= 0 or self.a <= 0:
                raise ValueError("g and a must be positive")
        if self.kind == POWER_LAW:
            if self.gamma is None or self.gamma <= 0:
                raise ValueError("power_law needs gamma > 0")
        if self.kind == MIXTURE:
            if self.c0 < 0:
                raise ValueError("c0 must be nonnegative")
            for lam, w in self.atoms:
                if lam <= 0 or w <= 0:
                    raise ValueError("mixture atoms need lambda > 0, weight > 0")
            object.__setattr__(self, "atoms", tuple((float(l), float(w)) for l, w in self.atoms))

    @property
    def outside_model_assumptions(self) -> bool:
        """True when c0 > 0 (constant shift has no admissible field)."""
        return self.kind == MIXTURE and self.c0 > 0

    @property
    def is_zero(self) -> bool:
        """True for the disorder-free case B == 0."""
        return self.kind == MIXTURE and self.c0 == 0 and not self.atoms


def exponential(g: float = 1.0, a: float = 1.0) -> Correlator:
    return Correlator(EXPONENTIAL, g=g, a=a)


def power_law(g: float = 1.0, a: float = 1.0, gamma: float = 1.0) -> Correlator:
    return Correlator(POWER_LAW, g=g, a=a, gamma=gamma)


def mixture(atoms: Sequence[Tuple[float, float]], c0: float = 0.0) -> Correlator:
    return Correlator(MIXTURE, c0=c0, atoms=tuple(atoms))


def zero() -> Correlator:
    """The disorder-free covariance B == 0."""
    return Correlator(MIXTURE, c0=0.0, atoms=())


def eval_b(corr: Correlator, x, order: int = 0):
    """Order-th derivative of B at x >= 0, analytically.

    order 4 is supported internally for the mixture curvature test; the
    public contract covers 0..3.
    """
    if order not in (0, 1, 2, 3, 4):
        raise ValueError(f"order must be in 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    scalar = x.ndim == 0

    if corr.kind == EXPONENTIAL:
        out = corr.g * (-corr.a) ** order * np.exp(-corr.a * x)
    elif corr.kind == POWER_LAW:
        gam = corr.gamma
        coef = corr.g * (-1.0) ** order * math.prod(gam + i for i in range(order))
        out = coef * (corr.a + x) ** (-gam - order)
    else:
        out = np.zeros_like(x)
        for lam, w in corr.atoms:
            out = out + w * (-lam * lam) ** order * np.exp(-lam * lam * x)
        if order == 0:
            out = out + corr.c0
    return float(out) if scalar else out


def ub(corr: Correlator, s, t: float):
    """U_B(s) = (2 B''(2s) t)^(-1/3)."""
    if t <= 0:
        raise ValueError("t must be positive")
    b2 = eval_b(corr, 2.0 * np.asarray(s, dtype=float), 2)
    return (2.0 * b2 * t) ** (-1.0 / 3.0)


def ub_prime(corr: Correlator, s, t: float):
    """Analytic derivative of U_B; positive since B''' < 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    s2 = 2.0 * np.asarray(s, dtype=float)
    b2 = eval_b(corr, s2, 2)
    b3 = eval_b(corr, s2, 3)
    return (2.0 * t) ** (-1.0 / 3.0) * (-2.0 * b3 / 3.0) * b2 ** (-4.0 / 3.0)


def _ub_curvature_sign(corr: Correlator, s) -> np.ndarray:
    # sign(U_B'') = sign( (4/3) B'''(2s)^2 - B''''(2s) B''(2s) ), t-independent
    s2 = 2.0 * np.asarray(s, dtype=float)
    b2 = eval_b(corr, s2, 2)
    b3 = eval_b(corr, s2, 3)
    b4 = eval_b(corr, s2, 4)
    return np.sign((4.0 / 3.0) * b3 * b3 - b4 * b2)


def ub_shape(corr: Correlator, t: float = 1.0) -> str:
    """Convexity type of U_B (equivalently of (B'')^(-1/3)).

    Closed-form kinds are classified analytically: exponential is strictly
    convex; a power law is strictly convex for gamma > 1, linear at
    gamma = 1, strictly concave for gamma < 1.  Mixtures are classified by
    a unanimous sign test of U_B'' on a log grid.
    """
    if corr.kind == EXPONENTIAL:
        return STRICTLY_CONVEX
    if corr.kind == POWER_LAW:
        if corr.gamma > 1:
            return STRICTLY_CONVEX
        if corr.gamma == 1:
            return LINEAR
        return STRICTLY_CONCAVE
    if corr.is_zero:
        return INDETERMINATE
    signs = _ub_curvature_sign(corr, np.geomspace(1e-6, 1e6, 241))
    if np.all(signs > 0):
        return STRICTLY_CONVEX
    if np.all(signs < 0):
        return STRICTLY_CONCAVE
    if np.all(signs == 0):
        return LINEAR
    return INDETERMINATE


def massless_rsb_criterion(corr: Correlator) -> bool:
    """True iff limsup_{x->inf} B''(x) x^3 = inf.

    Power law: true exactly when gamma < 1.  Exponential decay (and hence
    every finite mixture of squared-exponential atoms, which is dominated
    by its smallest-lambda atom) gives false.
    """
    if corr.kind == POWER_LAW:
        return corr.gamma < 1
    return False


def to_mixture(corr: Correlator, n_nodes: int = 200) -> Correlator:
    """Represent B as a squared-exponential mixture.

    The exponential kind is a single atom.  The power law uses the identity
    (a+u)^(-gamma) = (1/Gamma(gamma)) * int_0^inf e^{-v} v^{gamma-1}
    e^{-(v/a) u} dv, discretized with n_nodes generalized Gauss-Laguerre
    nodes (weight v^{gamma-1} e^{-v}).
    """
    if corr.kind == MIXTURE:
        return corr
    if corr.kind == EXPONENTIAL:
        return mixture([(math.sqrt(corr.a), corr.g)])
    gam = corr.gamma
    nodes, weights = special.roots_genlaguerre(n_nodes, gam - 1.0)
    lam = np.sqrt(nodes / corr.a)
    w = corr.g * corr.a ** (-gam) * weights / special.gamma(gam)
    return mixture(list(zip(lam.tolist(), w.tolist())))


def normalized(corr: Correlator, beta: float, mu: float, t: float):
    """Reduce (g, a) to (1, 1) by rescaling configurations and constants.

    Rescaling u -> sqrt(lam2) * u maps (mu, t) -> (lam2*mu, lam2*t) and the
    correlator argument x -> lam2*x; the g-reduction then shifts
    (mu, t, beta) -> (mu/g, t/g, beta*g).  Returns
    (corr', beta', mu', t', lam2).  Never applied implicitly by solvers.
    """
    if corr.kind == EXPONENTIAL:
        lam2 = 1.0 / corr.a
        g_eff = corr.g
        base = exponential(g=1.0, a=1.0)
    elif corr.kind == POWER_LAW:
        lam2 = corr.a
        g_eff = corr.g * corr.a ** (-corr.gamma)
        base = power_law(g=1.0, a=1.0, gamma=corr.gamma)
    else:
        raise ValueError("normalization is defined for closed-form kinds only")
    mu2, t2 = lam2 * mu, lam2 * t
    return base, beta * g_eff, mu2 / g_eff, t2 / g_eff, lam2


def parse_correlator(record: dict) -> Correlator:
    """Build a Correlator from a tagged config record."""
    kind = record.get("kind")
    if kind == EXPONENTIAL:
        return exponential(g=float(record.get("g", 1.0)), a=float(record.get("a", 1.0)))
    if kind == POWER_LAW:
        return power_law(
            g=float(record.get("g", 1.0)),
            a=float(record.get("a", 1.0)),
            gamma=float(record["gamma"]),
        )
    if kind == MIXTURE:
        lams = record.get("lambdas", ())
        ws = record.get("weights", ())
        if len(lams) != len(ws):
            raise ValueError("mixture lambdas and weights must have equal length")
        return mixture(list(zip(lams, ws)), c0=float(record.get("c0", 0.0)))
    if kind == "zero":
        return zero()
    raise ValueError(f"unknown correlator kind {kind!r}")
