"""Phase structure: RS test, Larkin mass, closed-form solvers, diagrams.

The replica-symmetric region is characterized by a one-variable test: with

    g(s) = beta^2 B(2s/beta) - 1/(s t) - s (2 beta B'(2/(beta sqrt(mu t))) + mu)

the model is RS iff g attains its supremum over (0, 1/sqrt(mu t)] at the
right endpoint.  Below the Larkin mass (largest root of
B''(2/(beta sqrt(mu t))) * 2/sqrt(mu^3 t) = 1) the endpoint is locally
unstable; the RSB phase is 1RSB when (B'')^{-1/3} is strictly convex or
linear and FRSB when strictly concave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import correlator as corrmod
from . import parisi
from .correlator import (Correlator, INDETERMINATE, LINEAR, STRICTLY_CONCAVE,
                         STRICTLY_CONVEX)
from .errors import NonconvergenceError, ValidationError
from .kernels import ContinuumKernel
from .measures import (FRSB, ONE_RSB, RS, Atom, ClosedFormCdf, ModelParams,
                       ParisiMeasure, RsbSolution)

RS_DECISION_RTOL = 1e-9
LARKIN_MU_LO = 1e-16
LARKIN_MU_HI = 1e8
LARKIN_PER_DECADE = 64


def s_bar(params: ModelParams) -> float:
    """Right endpoint 1/sqrt(mu t) of the RS test interval."""
    return 1.0 / math.sqrt(params.mu * params.t)


def g_function(params: ModelParams, corr: Correlator, s):
    """The RS test function g(s); vectorized in s > 0."""
    beta, mu, t = params.beta, params.mu, params.t
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("s must be positive")
    slope = 2.0 * beta * corrmod.eval_b(corr, 2.0 / (beta * math.sqrt(mu * t)), 1) + mu
    out = (beta ** 2 * corrmod.eval_b(corr, 2.0 * s_arr / beta, 0)
           - 1.0 / (s_arr * t) - s_arr * slope)
    return float(out) if np.asarray(s).ndim == 0 else out


def _interior_sup_g(params: ModelParams, corr: Correlator, n: int = 1000) -> float:
    """Supremum of g over (0, s_bar], grid plus local refinement."""
    sb = s_bar(params)
    grid = np.unique(np.concatenate([
        np.geomspace(sb * 1e-10, sb, n),
        np.linspace(sb / n, sb, n // 2),
    ]))
    vals = g_function(params, corr, grid)
    best = float(np.max(vals))
    # refine every discrete local maximum
    idx = np.nonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in idx:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        if hi <= lo:
            continue
        r = minimize_scalar(lambda x: -g_function(params, corr, x),
                            bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-14 * sb})
        best = max(best, -r.fun)
    return best


def is_rs(params: ModelParams, corr: Correlator) -> bool:
    """True iff the global maximum of g over (0, s_bar] sits at the endpoint."""
    gend = g_function(params, corr, s_bar(params))
    return _interior_sup_g(params, corr) <= gend + RS_DECISION_RTOL * max(1.0, abs(gend))


def larkin_condition(beta: float, t: float, corr: Correlator, mu) -> np.ndarray:
    """B''(2/(beta sqrt(mu t))) * 2/sqrt(mu^3 t) - 1, vectorized in mu."""
    mu_arr = np.asarray(mu, dtype=float)
    b2 = corrmod.eval_b(corr, 2.0 / (beta * np.sqrt(mu_arr * t)), 2)
    return b2 * 2.0 / np.sqrt(mu_arr ** 3 * t) - 1.0


def larkin_mass(beta: float, t: float, corr: Correlator) -> Optional[float]:
    """Largest root in mu of the Larkin equation, or None when none exists.

    Power laws are decreasing in mu, so a single log-bisection suffices;
    other kinds are scanned on a 64-per-decade log grid over
    [1e-16, 1e8] and every sign change is bisected.
    """
    if corr.is_zero:
        return None
    n = int(LARKIN_PER_DECADE * math.log10(LARKIN_MU_HI / LARKIN_MU_LO))
    grid = np.geomspace(LARKIN_MU_LO, LARKIN_MU_HI, n)
    with np.errstate(under="ignore"):
        h = larkin_condition(beta, t, corr, grid)
    sign_change = np.nonzero(np.diff(np.signbit(h)))[0]
    if len(sign_change) == 0:
        return None
    roots = []
    idx = sign_change if corr.kind != corrmod.POWER_LAW else sign_change[-1:]
    for i in idx:
        lo, hi = math.log(grid[i]), math.log(grid[i + 1])
        flo = h[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = float(larkin_condition(beta, t, corr, math.exp(mid)))
            if (fm > 0) == (flo > 0):
                lo = mid
                flo = fm
            else:
                hi = mid
            if hi - lo < 1e-14:
                break
        roots.append(math.exp(0.5 * (lo + hi)))
    return max(roots)


def _solution(kernel, params, corr, phase, q_c, measure, extras,
              n_off: int, free_energy=None) -> RsbSolution:
    res = parisi.stationarity_residuals(kernel, params, corr, q_c, measure, n_off=n_off)
    if free_energy is None:
        free_energy = parisi.eval_functional(kernel, params, corr, q_c, measure)
    return RsbSolution(phase=phase, q_c=q_c, measure=measure, extras=extras,
                       free_energy=free_energy, residuals=res)


def solve_rs(params: ModelParams, corr: Correlator, kernel=None,
             n_off: int = 2001) -> RsbSolution:
    """Closed-form RS pair for the kernel's flavor:

        q_* = -2 B'((2/beta) r1(mu)) r2(mu),   q_c = q_* + r1(mu)/beta,
        zeta = delta_{q_*}

    (continuum: q_* = -B'(2/(beta sqrt(mu t)))/sqrt(mu^3 t)).  Refuses when
    the RS criterion fails.
    """
    if not is_rs(params, corr):
        raise ValidationError("solve_rs called outside the RS region "
                              "(sup g > g(s_bar))")
    if kernel is None:
        kernel = ContinuumKernel(params.t)
    beta, mu = params.beta, params.mu
    r1 = kernel.r1(mu)
    q_star = -2.0 * corrmod.eval_b(corr, 2.0 * r1 / beta, 1) * kernel.r2(mu)
    q_c = q_star + r1 / beta
    zeta = ParisiMeasure.dirac(q_star, q_c)
    fe = parisi.rs_free_energy(params, corr) if kernel.flavor == "continuum" else None
    return _solution(kernel, params, corr, RS, q_c, zeta,
                     {"q_star": q_star, "q_0": q_star}, n_off, free_energy=fe)


# -- 1RSB ------------------------------------------------------------------


def _one_rsb_residuals(theta, params: ModelParams, corr: Correlator):
    """Residuals (F(q0), F(q*), int F) and analytic Jacobian.

    q_c is eliminated through beta (q_c - q_* + m (q_* - q_0)) = 1/sqrt(mu t),
    so the Larkin equation holds identically along the iteration.
    """
    q0, q1, m = theta
    beta, mu, t = params.beta, params.mu, params.t
    ds = 1.0 / (beta * math.sqrt(mu * t))
    s3 = math.sqrt(mu ** 3 * t)
    d = q1 - q0
    qc = q1 + ds - m * d
    x0 = 2.0 * (qc - q0)
    x1 = 2.0 * (qc - q1)
    v = beta * (qc - q1)

    b = lambda x, o: corrmod.eval_b(corr, x, o)
    r1 = -2.0 * b(x0, 1) - 2.0 * q0 * s3
    r2 = -2.0 * b(x1, 1) - 2.0 * q0 * s3 - v ** -2 / (beta * m * t) + mu / (beta * m)
    r3 = (b(x1, 0) - b(x0, 0) + d * (mu / (beta * m) - 2.0 * q0 * s3)
          - (1.0 / v - math.sqrt(mu * t)) / (beta ** 2 * m ** 2 * t))

    J = np.empty((3, 3))
    b2x0, b2x1 = b(x0, 2), b(x1, 2)
    b1x0, b1x1 = b(x0, 1), b(x1, 1)
    J[0] = [-4.0 * (m - 1.0) * b2x0 - 2.0 * s3,
            -4.0 * (1.0 - m) * b2x0,
            4.0 * d * b2x0]
    J[1] = [-4.0 * m * b2x1 - 2.0 * s3 + 2.0 * v ** -3 / t,
            4.0 * m * b2x1 - 2.0 * v ** -3 / t,
            4.0 * d * b2x1 - 2.0 * d * v ** -3 / (m * t)
            + v ** -2 / (beta * m ** 2 * t) - mu / (beta * m ** 2)]
    J[2] = [2.0 * m * b1x1 - 2.0 * (m - 1.0) * b1x0
            - (mu / (beta * m) - 2.0 * q0 * s3) - 2.0 * d * s3
            + v ** -2 / (beta * m * t),
            -2.0 * m * b1x1 - 2.0 * (1.0 - m) * b1x0
            + (mu / (beta * m) - 2.0 * q0 * s3) - v ** -2 / (beta * m * t),
            -2.0 * d * b1x1 + 2.0 * d * b1x0 - d * mu / (beta * m ** 2)
            + 2.0 * (1.0 / v - math.sqrt(mu * t)) / (beta ** 2 * m ** 3 * t)
            - d * v ** -2 / (beta * m ** 2 * t)]
    return np.array([r1, r2, r3]), J, qc


def _one_rsb_feasible(theta, params) -> bool:
    q0, q1, m = theta
    if not (0.0 < q0 < q1 and 0.0 < m <= 1.0):
        return False
    ds = 1.0 / (params.beta * math.sqrt(params.mu * params.t))
    return ds - m * (q1 - q0) > 0.0


def _one_rsb_seeds(params: ModelParams, corr: Correlator) -> List[np.ndarray]:
    beta, mu, t = params.beta, params.mu, params.t
    ds = 1.0 / (beta * math.sqrt(mu * t))
    q_rs = max(-corrmod.eval_b(corr, 2.0 * ds, 1) / math.sqrt(mu ** 3 * t), 1e-8)
    seeds = []
    if corr.kind == corrmod.POWER_LAW and corr.gamma == 1.0 and corr.g == 1.0 and corr.a == 1.0:
        trip = frsb_triple(beta, t, corr, mu)
        if trip is not None:
            q0, q1, qc = trip["q_0"], trip["q_star"], trip["q_c"]
            m = (2.0 / t) ** (1.0 / 3.0) / beta
            if 0 < q0 < q1 and 0 < m <= 1:
                seeds.append(np.array([q0, q1, min(m, 1.0)]))
    bases = [q_rs, ds, q_rs + ds, 3.0 * ds]
    for b0 in bases:
        for frac in (0.25, 0.6):
            for m in (0.3, 0.7):
                seeds.append(np.array([frac * b0, b0, m]))
    return seeds[:17]


def solve_1rsb(params: ModelParams, corr: Correlator, n_off: int = 2001,
               tol: float = 1e-11) -> RsbSolution:
    """Damped-Newton solve of the one-step system; measure
    m delta_{q_0} + (1-m) delta_{q_*}.

    Preconditions: (B'')^{-1/3} strictly convex or linear, and not RS.
    """
    shape = corrmod.ub_shape(corr)
    if shape not in (STRICTLY_CONVEX, LINEAR):
        raise ValidationError(f"1RSB requires convex or linear shape, got {shape}")
    if is_rs(params, corr):
        raise ValidationError("solve_1rsb called inside the RS region")

    best = None
    for seed in _one_rsb_seeds(params, corr):
        theta = seed.copy()
        if not _one_rsb_feasible(theta, params):
            continue
        r, J, _ = _one_rsb_residuals(theta, params, corr)
        norm = float(np.max(np.abs(r)))
        for _ in range(120):
            if norm <= tol:
                break
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            improved = False
            for _ in range(40):
                cand = theta + lam * step
                if _one_rsb_feasible(cand, params):
                    rc, Jc, _ = _one_rsb_residuals(cand, params, corr)
                    nc = float(np.max(np.abs(rc)))
                    if nc < norm:
                        theta, r, J, norm = cand, rc, Jc, nc
                        improved = True
                        break
                lam *= 0.5
            if not improved:
                break
        if best is None or norm < best[0]:
            best = (norm, theta.copy())
        if norm <= tol:
            break

    if best is None or best[0] > 1e-10:
        raise NonconvergenceError(
            "1RSB Newton failed: residual of the F-equations "
            f"(F(q_0), F(q_*), int F) stalled at {None if best is None else best[0]:.3e}",
            best_residual=None if best is None else best[0])

    _, theta = best
    q0, q1, m = theta
    _, _, qc = _one_rsb_residuals(theta, params, corr)
    zeta = ParisiMeasure.two_atom(q0, q1, m, qc)
    extras = {"q_0": q0, "q_star": q1, "m": m}
    return _solution(ContinuumKernel(params.t), params, corr, ONE_RSB, qc, zeta,
                     extras, n_off)


# -- FRSB ------------------------------------------------------------------


def frsb_triple(beta: float, t: float, corr: Correlator, mu: float) -> Optional[dict]:
    """Solve the FRSB triple:

        q_c - q_* = 1/(beta sqrt(mu_Lar t)),
        2 B''(2 (q_c - q_0)) = sqrt(mu^3 t),
        F(q_0) = 0, i.e. -B'(2 (q_c - q_0)) = q_0 sqrt(mu^3 t).

    The last equation is the stationarity form derived from F; the printed
    variant -B'(2(q_c-q_0)) = q_0 / (mu^3 t) is returned alongside as
    q_0_printed for transparency (the stationarity form is the one whose
    residual vanishes).
    """
    mu_lar = larkin_mass(beta, t, corr)
    if mu_lar is None or mu >= mu_lar:
        return None
    s3 = math.sqrt(mu ** 3 * t)
    # bisect 2 B''(2 d) = s3 for d = q_c - q_0 (B'' decreasing in d)
    f = lambda d: 2.0 * corrmod.eval_b(corr, 2.0 * d, 2) - s3
    lo, hi = 0.0, 1.0
    grow = 0
    while f(hi) > 0:
        hi *= 4.0
        grow += 1
        if grow > 200:
            raise NonconvergenceError("FRSB: no bracket for 2B''(2(q_c-q_0)) = sqrt(mu^3 t)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    d = 0.5 * (lo + hi)
    minus_bp = -corrmod.eval_b(corr, 2.0 * d, 1)
    q0 = minus_bp / s3
    q0_printed = minus_bp * mu ** 3 * t
    qc = q0 + d
    qstar = qc - 1.0 / (beta * math.sqrt(mu_lar * t))
    return {"q_0": q0, "q_0_printed": q0_printed, "q_star": qstar, "q_c": qc,
            "mu_larkin": mu_lar}


def frsb_triple_power_law_printed(beta: float, t: float, gamma: float, mu: float) -> dict:
    """Closed forms of the triple for B(x) = (1+x)^(-gamma) as printed:
    q_c - q_0 = (c0 mu^{-3/(2(2+gamma))} - 1)/2, q_0 = c1 mu^{3(gamma+1)/(2(2+gamma)) + 3},
    with c0 = (2 gamma (gamma+1)/sqrt(t))^{1/(gamma+2)}, c1 = gamma t / c0^{1+gamma}."""
    c0 = (2.0 * gamma * (gamma + 1.0) / math.sqrt(t)) ** (1.0 / (gamma + 2.0))
    c1 = gamma * t / c0 ** (1.0 + gamma)
    d = 0.5 * (c0 * mu ** (-3.0 / (2.0 * (2.0 + gamma))) - 1.0)
    q0 = c1 * mu ** (3.0 * (gamma + 1.0) / (2.0 * (2.0 + gamma)) + 3.0)
    return {"c0": c0, "c1": c1, "q_c_minus_q_0": d, "q_0_printed": q0}


def frsb_cdf_explicit(beta: float, t: float, gamma: float, q_c: float, s):
    """Explicit FRSB CDF for B(x) = (1+x)^(-gamma) on [q_0, q_*):
    ((gamma+2)/(3 beta)) (4/(t gamma (gamma+1)))^{1/3} (1+2 q_c-2 s)^{(gamma-1)/3}."""
    amp = (gamma + 2.0) / (3.0 * beta) * (4.0 / (t * gamma * (gamma + 1.0))) ** (1.0 / 3.0)
    return amp * (1.0 + 2.0 * q_c - 2.0 * np.asarray(s, dtype=float)) ** ((gamma - 1.0) / 3.0)


def solve_frsb(params: ModelParams, corr: Correlator, n_off: int = 2001,
               residual_tol: float = 1e-8) -> RsbSolution:
    """Assemble the full-RSB pair from the triple and the CDF
    beta^{-1} U_B'(q_c - s) on [q_0, q_*), then validate stationarity."""
    shape = corrmod.ub_shape(corr)
    if shape != STRICTLY_CONCAVE:
        raise ValidationError(f"FRSB requires strictly concave shape, got {shape}")
    beta, mu, t = params.beta, params.mu, params.t
    trip = frsb_triple(beta, t, corr, mu)
    if trip is None:
        raise ValidationError("FRSB requires mu < mu_Lar(beta; t)")
    q0, qstar, qc = trip["q_0"], trip["q_star"], trip["q_c"]
    if not (0.0 < q0 < qstar < qc):
        raise NonconvergenceError(f"FRSB triple out of order: {trip}")

    if corr.kind == corrmod.POWER_LAW and corr.g == 1.0 and corr.a == 1.0:
        seg = ClosedFormCdf(q0, qstar, "frsb_power_law",
                            {"beta": beta, "t": t, "gamma": corr.gamma, "q_c": qc})
    else:
        seg = ClosedFormCdf(q0, qstar, "frsb_general",
                            {"beta": beta, "t": t, "q_c": qc, "correlator": corr})
    c_hi = float(corrmod.ub_prime(corr, qc - qstar, t)) / beta
    if c_hi > 1.0 + 1e-10:
        raise NonconvergenceError(f"FRSB CDF exceeds 1 at q_*: {c_hi}")
    zeta = ParisiMeasure(qc, [seg, Atom(qstar, max(1.0 - min(c_hi, 1.0), 0.0))])

    extras = dict(trip)
    extras["q_0_residual_stationarity"] = (
        -2.0 * corrmod.eval_b(corr, 2.0 * (qc - q0), 1)
        - 2.0 * q0 * math.sqrt(mu ** 3 * t))
    q0p = trip["q_0_printed"]
    extras["q_0_residual_printed"] = (
        -2.0 * corrmod.eval_b(corr, 2.0 * (qc - q0), 1)
        - 2.0 * q0p * math.sqrt(mu ** 3 * t))
    extras["matched_form"] = ("stationarity"
                              if abs(extras["q_0_residual_stationarity"])
                              <= abs(extras["q_0_residual_printed"]) else "printed")

    sol = _solution(ContinuumKernel(t), params, corr, FRSB, qc, zeta, extras, n_off)
    if sol.residuals.max_abs > residual_tol:
        raise NonconvergenceError(
            "FRSB stationarity residuals exceed tolerance: "
            f"larkin={sol.residuals.larkin_residual:.3e}, "
            f"f-gap={sol.residuals.support_max_f_gap:.3e}, "
            f"off-support={sol.residuals.offsupport_violation:.3e}; "
            f"q_0 closed forms: stationarity={q0!r}, printed={q0p!r}",
            best_residual=sol.residuals.max_abs)
    return sol


# -- dispatch ----------------------------------------------------------------


def classify(params: ModelParams, corr: Correlator) -> str:
    """RS / ONE_RSB / FRSB per the RS test and the shape of (B'')^{-1/3}."""
    if corr.is_zero:
        return RS
    shape = corrmod.ub_shape(corr)
    if shape == INDETERMINATE:
        raise ValidationError("correlator shape indeterminate: (B'')^{-1/3} "
                              "changes convexity on the test grid")
    if is_rs(params, corr):
        return RS
    return ONE_RSB if shape in (STRICTLY_CONVEX, LINEAR) else FRSB


def solve(params: ModelParams, corr: Correlator, kernel=None,
          n_off: int = 2001) -> RsbSolution:
    label = classify(params, corr)
    if label == RS:
        return solve_rs(params, corr, kernel=kernel, n_off=n_off)
    if label == ONE_RSB:
        return solve_1rsb(params, corr, n_off=n_off)
    return solve_frsb(params, corr, n_off=n_off)


# -- phase diagram -----------------------------------------------------------


@dataclass
class PhaseBoundaryCurve:
    t: float
    correlator: Correlator
    points: List[Tuple[float, float]] = field(default_factory=list)
    segments: List[dict] = field(default_factory=list)
    massless_intercept: Optional[float] = None


def _rs_flips(corr: Correlator, mu_lo: float, mu_hi: float,
              per_decade: int, beta: float, t: float) -> List[Tuple[float, bool, bool]]:
    """All mu where is_rs flips, as (mu, rs_left, rs_right), via log bisection."""
    n = max(int(per_decade * math.log10(mu_hi / mu_lo)), 8)
    grid = list(np.geomspace(mu_lo, mu_hi, n))
    lar = larkin_mass(beta, t, corr)
    if lar is not None:
        # make sure a thin unstable window around the Larkin scale is sampled
        grid += list(np.geomspace(max(lar * 1e-3, mu_lo), min(lar * 1e3, mu_hi), 64))
    grid = np.unique(np.asarray(grid))
    flags = [is_rs(ModelParams(beta, float(m), t), corr) for m in grid]
    flips = []
    for i in range(len(grid) - 1):
        if flags[i] == flags[i + 1]:
            continue
        lo, hi = math.log(grid[i]), math.log(grid[i + 1])
        f_lo = flags[i]
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            if is_rs(ModelParams(beta, math.exp(mid), t), corr) == f_lo:
                lo = mid
            else:
                hi = mid
        flips.append((math.exp(0.5 * (lo + hi)), flags[i], flags[i + 1]))
    return flips


def phase_boundary(t: float, corr: Correlator, beta_grid: Sequence[float],
                   mu_lo: float = 1e-12, mu_hi: float = 1e6,
                   per_decade: int = 16) -> PhaseBoundaryCurve:
    """Locate the RS flip(s) in mu for each beta; the stored boundary point
    is the largest flip (the Larkin mass wherever the FRSB corollary applies)."""
    betas = list(beta_grid)
    if betas != sorted(betas):
        raise ValidationError("beta_grid must be sorted")
    curve = PhaseBoundaryCurve(t=t, correlator=corr)
    rsb_label = ONE_RSB if corrmod.ub_shape(corr) in (STRICTLY_CONVEX, LINEAR) else FRSB
    for beta in betas:
        flips = _rs_flips(corr, mu_lo, mu_hi, per_decade, beta, t)
        for mu_b, rs_left, rs_right in flips:
            curve.segments.append({
                "beta": beta, "mu": mu_b,
                "phase_left": RS if rs_left else rsb_label,
                "phase_right": RS if rs_right else rsb_label,
            })
        if flips:
            curve.points.append((beta, flips[-1][0]))
    curve.massless_intercept = massless_transition_beta(t, corr)
    return curve


def massless_limit_g(corr: Correlator, t: float, beta: float, s):
    """Pointwise mu -> 0 limit of g: beta^2 B(2s/beta) - 1/(s t)."""
    s_arr = np.asarray(s, dtype=float)
    return beta ** 2 * corrmod.eval_b(corr, 2.0 * s_arr / beta, 0) - 1.0 / (s_arr * t)


def _massless_sup_positive(corr: Correlator, t: float, beta: float) -> bool:
    """True when the interior supremum of the limiting g is positive."""
    grid = np.geomspace(1e-8, 1e10, 4000)
    vals = massless_limit_g(corr, t, beta, grid)
    if np.max(vals) > 0:
        return True
    idx = np.nonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in idx:
        r = minimize_scalar(lambda x: -massless_limit_g(corr, t, beta, x),
                            bounds=(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]),
                            method="bounded", options={"xatol": 1e-13})
        if -r.fun > 0:
            return True
    return False


def massless_transition_beta(t: float, corr: Correlator) -> Optional[float]:
    """Root in beta of sup_{s>0} [beta^2 B(2s/beta) - 1/(s t)] = 0, i.e. the
    onset of a positive interior supremum of the massless-limit g.

    None when the model is massless-RSB at every temperature (power law with
    gamma < 1) or has no transition at all (B == 0).
    """
    if corr.is_zero:
        return None
    if corrmod.massless_rsb_criterion(corr):
        return None
    lo, hi = 1e-3, 1.0
    while not _massless_sup_positive(corr, t, hi):
        hi *= 2.0
        if hi > 1e8:
            return None
    while _massless_sup_positive(corr, t, lo):
        lo *= 0.5
        if lo < 1e-12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _massless_sup_positive(corr, t, mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10 * hi:
            break
    return 0.5 * (lo + hi)
