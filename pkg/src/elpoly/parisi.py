"""Parisi functionals and the stationarity system of the critical pair.

Continuum functional (q > 0, zeta in P([0,q)), q_* any point carrying full
mass):

    P(q, zeta) = 1/2 [ int_0^{q_*} du / (beta t delta(u)^2)
                       - 1 / (beta t (q - q_*))
                       - 2 beta^2 int_0^q zeta([0,u]) B'(2(q-u)) du
                       - beta mu q + 2 sqrt(mu / t) ]

Finite-L functional: same structure with the kernel family of the lattice
Laplacian, the two log-determinant terms replacing the continuum boundary
terms.  Both are evaluated through one unified expression

    1/2 [ D(mu) - D(s0) + beta (q - q_*) s0
          + int_0^{q_*} beta K(beta delta(u)) du
          - 2 beta^2 int zeta B' - beta mu q ],      s0 = K(beta (q - q_*)),

where D is the normalized log-determinant (continuum limit 2 sqrt(x/t)).

The critical pair solves beta delta(0) = r1(mu) together with the condition
that f(s) = int_0^s F, F(s) = -2 B'(2(q-s)) + int_0^s K'(beta delta(u)) du,
is maximized exactly on the support of zeta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import correlator as corrmod
from .errors import QuadratureError
from .kernels import ContinuumKernel, LatticeKernel
from .measures import ModelParams, ParisiMeasure
from .quadrature import adaptive_gl

DEFAULT_TOL = 1e-10


@dataclass
class StationarityResiduals:
    """Stationarity defects of a candidate pair (q, zeta).

    larkin_residual = beta delta(0) - r1(mu); support_max_f_gap is the
    largest deviation of f from its grid supremum over the support;
    offsupport_violation is the (clipped) excess of f off the support over
    its supremum on the support.  f_values keeps the diagnostic grid.
    """

    larkin_residual: float
    support_max_f_gap: float
    offsupport_violation: float
    f_grid: np.ndarray
    f_values: np.ndarray

    @property
    def max_abs(self) -> float:
        return max(abs(self.larkin_residual), abs(self.support_max_f_gap),
                   abs(self.offsupport_violation))

    def to_dict(self) -> dict:
        return {
            "larkin_residual": self.larkin_residual,
            "support_max_f_gap": self.support_max_f_gap,
            "offsupport_violation": self.offsupport_violation,
        }


def _bprime_integral(corr, q: float, zeta: ParisiMeasure, tol: float) -> float:
    """int_0^q zeta([0,u]) B'(2(q-u)) du, exact on constant-CDF stretches."""
    total = 0.0
    for (lo, hi, kind, obj) in zeta._pieces:
        if kind == "const":
            if obj != 0.0:
                total += 0.5 * obj * (corrmod.eval_b(corr, 2.0 * (q - lo), 0)
                                      - corrmod.eval_b(corr, 2.0 * (q - hi), 0))
        else:
            f = lambda u: zeta.cdf(u) * corrmod.eval_b(corr, 2.0 * (q - u), 1)
            total += adaptive_gl(f, lo, hi, tol)[0]
    return total


def _k_integral(kernel, params: ModelParams, zeta: ParisiMeasure, q_star: float,
                tol: float) -> float:
    """int_0^{q_star} beta K(beta delta(u)) du over measure pieces."""
    beta = params.beta
    total = 0.0
    for (lo, hi, kind, obj) in zeta._pieces:
        a, b = lo, min(hi, q_star)
        if b <= a:
            continue
        if kind == "const" and obj == 0.0:
            total += (b - a) * beta * kernel.k(beta * float(zeta.delta(a)))
            continue
        if kind == "const" and isinstance(kernel, ContinuumKernel):
            # delta affine with slope -obj: exact antiderivative of 1/delta^2
            d_a, d_b = float(zeta.delta(a)), float(zeta.delta(b))
            total += (1.0 / d_b - 1.0 / d_a) / (obj * beta * kernel.t)
            continue

        def f(u):
            d = np.atleast_1d(zeta.delta(u))
            return np.array([beta * kernel.k(beta * float(di)) for di in d])

        total += adaptive_gl(f, a, b, tol)[0]
    return total


def eval_functional(kernel, params: ModelParams, corr, q: float, zeta: ParisiMeasure,
                    q_star: Optional[float] = None, tol: float = DEFAULT_TOL) -> float:
    """Value of the Parisi functional for the kernel's flavor."""
    if q <= 0:
        raise ValueError("q must be positive")
    beta, mu = params.beta, params.mu
    qs = zeta.q_star if q_star is None else q_star
    if not (zeta.q_star <= qs < q):
        raise ValueError("q_star must lie in [sup supp(zeta), q)")
    s0 = kernel.k(beta * (q - qs))
    val = (
        kernel.logdet_normalized(mu)
        - kernel.logdet_normalized(s0)
        + beta * (q - qs) * s0
        + _k_integral(kernel, params, zeta, qs, tol)
        - 2.0 * beta ** 2 * _bprime_integral(corr, q, zeta, tol)
        - beta * mu * q
    )
    return 0.5 * val


class StationarityEvaluator:
    """Pointwise F and grid-cumulative f for a candidate pair (q, zeta).

    Constant-CDF stretches of the measure give closed forms for the
    cumulative of K'(beta delta); the remaining stretches are integrated
    adaptively.  Lattice kernels keep their inversions memoized, and the
    f-accumulation falls back to a trapezoid rule wherever a pointwise F
    would need fresh lattice inversions per quadrature node.
    """

    def __init__(self, kernel, params: ModelParams, corr, q: float, zeta: ParisiMeasure,
                 tol: float = 1e-12):
        self.kernel = kernel
        self.params = params
        self.corr = corr
        self.q = float(q)
        self.zeta = zeta
        self.tol = tol
        self._vector_kernel = isinstance(kernel, ContinuumKernel)
        self._identity_cache: dict = {}
        self._cum_edges = []  # (lo, hi, kind, obj, I_at_lo)
        acc = 0.0
        pieces = zeta._pieces
        for i, (lo, hi, kind, obj) in enumerate(pieces):
            self._cum_edges.append((lo, hi, kind, obj, acc))
            if i + 1 < len(pieces):
                # the final piece ends at q where delta vanishes and the
                # cumulative diverges; F is only ever evaluated at s < q
                acc += float(self._increment_from_lo(i, np.array([hi]))[0])
        self._lows = np.array([e[0] for e in self._cum_edges])

    def _kp(self, bdelta: np.ndarray) -> np.ndarray:
        if self._vector_kernel:
            return self.kernel.k_prime(bdelta)
        return np.array([self.kernel.k_prime(float(v)) for v in np.atleast_1d(bdelta)])

    def _kk(self, bdelta: np.ndarray) -> np.ndarray:
        if self._vector_kernel:
            return self.kernel.k(bdelta)
        return np.array([self.kernel.k(float(v)) for v in np.atleast_1d(bdelta)])

    def _frsb_identity_qc(self, piece_idx: int):
        """When beta delta(u) = U_B(q_c - u) holds on a closed-form piece
        (true for solver-assembled FRSB pairs), K'(beta delta) collapses to
        -4 B''(2(q_c - u)) under the continuum kernel.  Returns the piece's
        q_c when the identity verifies at the endpoint, else None."""
        if piece_idx in self._identity_cache:
            return self._identity_cache[piece_idx]
        qc = self._frsb_identity_probe(piece_idx)
        self._identity_cache[piece_idx] = qc
        return qc

    def _frsb_identity_probe(self, piece_idx: int):
        lo, hi, kind, obj, _ = self._cum_edges[piece_idx]
        if kind != "closed" or not self._vector_kernel:
            return None
        qc = obj.params.get("q_c")
        if qc is None or abs(obj.params.get("t", self.kernel.t) - self.kernel.t) > 1e-12:
            return None
        probe = 0.5 * (lo + hi)
        lhs = self.params.beta * float(self.zeta.delta(probe))
        try:
            rhs = float(corrmod.ub(self.corr, qc - probe, self.kernel.t))
        except (ValueError, ZeroDivisionError):
            return None
        if abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs)):
            return qc
        return None

    def _increment_from_lo(self, piece_idx: int, s: np.ndarray) -> np.ndarray:
        """int_{lo_i}^{s_j} K'(beta delta(u)) du for sorted s inside piece i."""
        lo, hi, kind, obj, _ = self._cum_edges[piece_idx]
        beta = self.params.beta
        zeta = self.zeta
        s = np.minimum(s, hi)
        if kind == "const":
            if obj == 0.0:
                return (s - lo) * float(self._kp(np.array([beta * float(zeta.delta(lo))]))[0])
            # d/du K(beta delta(u)) = -beta c K'(beta delta(u)) on slope -c
            k_lo = float(self._kk(np.array([beta * float(zeta.delta(lo))]))[0])
            return (k_lo - self._kk(beta * zeta.delta(s))) / (beta * obj)
        qc = self._frsb_identity_qc(piece_idx)
        if qc is not None:
            # K'(beta delta(u)) = -4 B''(2(q_c-u)) = 2 d/du B'(2(q_c-u))
            return 2.0 * (corrmod.eval_b(self.corr, 2.0 * (qc - s), 1)
                          - corrmod.eval_b(self.corr, 2.0 * (qc - lo), 1))
        # smooth non-constant stretch: incremental adaptive over sorted points
        out = np.empty(len(s))
        acc = 0.0
        prev = lo

        def f(u):
            return self._kp(beta * np.asarray(zeta.delta(u)))

        for j, sj in enumerate(s):
            acc += adaptive_gl(f, prev, float(sj), self.tol)[0]
            out[j] = acc
            prev = float(sj)
        return out

    def kprime_cumulative(self, s) -> np.ndarray:
        """I(s) = int_0^s K'(beta delta(u)) du; s sorted."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s_arr)
        idx = np.clip(np.searchsorted(self._lows, s_arr, side="right") - 1, 0,
                      len(self._cum_edges) - 1)
        for i in np.unique(idx):
            m = idx == i
            base = self._cum_edges[i][4]
            out[m] = base + self._increment_from_lo(int(i), s_arr[m])
        return out if np.asarray(s).ndim else float(out[0])

    def big_f(self, s):
        """F(s) = -2 B'(2(q-s)) + int_0^s K'(beta delta(u)) du."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr >= self.q):
            raise ValueError("s must lie in [0, q)")
        return (-2.0 * corrmod.eval_b(self.corr, 2.0 * (self.q - s_arr), 1)
                + self.kprime_cumulative(s_arr))

    def little_f(self, s) -> float:
        """f(s) = int_0^s F(u) du."""
        s = float(s)
        edges = [lo for lo, *_ in self._cum_edges if lo < s]
        pts = np.unique(np.concatenate([np.linspace(0.0, s, 513), np.array(edges + [s])]))
        return float(self.f_on_grid(pts[pts <= s])[-1])

    def f_on_grid(self, grid: np.ndarray) -> np.ndarray:
        """Cumulative f over a sorted grid.

        Continuum flavor: Gauss-Legendre on each grid interval (F is smooth
        between measure seams, which are grid members).  Lattice flavor:
        same on zero-CDF stretches, trapezoid elsewhere to bound the number
        of resolvent inversions by the grid size.
        """
        grid = np.asarray(grid, dtype=float)
        n = len(grid)
        f = np.zeros(n)
        f_grid_vals = self.big_f(grid)
        idx = np.clip(np.searchsorted(self._lows, grid[:-1], side="right") - 1, 0,
                      len(self._cum_edges) - 1)
        from scipy.special import roots_legendre
        xg, wg = roots_legendre(16)
        for i in range(n - 1):
            a, b = grid[i], grid[i + 1]
            if b <= a:
                f[i + 1] = f[i]
                continue
            kind, obj = self._cum_edges[idx[i]][2], self._cum_edges[idx[i]][3]
            cheap = self._vector_kernel or (kind == "const" and obj == 0.0)
            if cheap:
                h = 0.5 * (b - a)
                nodes = a + h * (xg + 1.0)
                inc = h * float(np.dot(wg, self.big_f(nodes)))
            else:
                inc = 0.5 * (f_grid_vals[i] + f_grid_vals[i + 1]) * (b - a)
            f[i + 1] = f[i] + inc
        return f


def stationarity_residuals(kernel, params: ModelParams, corr, q: float,
                           zeta: ParisiMeasure, n_off: int = 2001,
                           refine: int = 10) -> StationarityResiduals:
    """Measure the critical-point defects of (q, zeta).

    The f-grid is the union of the support grid and n_off off-support
    points, refined by the given factor around sign changes of f - sup f.
    """
    beta, mu = params.beta, params.mu
    larkin = beta * float(zeta.delta(0.0)) - kernel.r1(mu)

    ev = StationarityEvaluator(kernel, params, corr, q, zeta)
    support = zeta.support_grid()
    # f -> -inf as s -> q (the K' integral is singular there); stop the off
    # grid where F is already steeply negative, and verify it is
    s_cap = q - max(1e-3 * (q - zeta.q_star), 1e-9 * q)
    off = np.linspace(0.0, s_cap, n_off)
    edges = np.array([e[0] for e in ev._cum_edges])
    grid = np.unique(np.concatenate([support, off, edges]))
    grid = grid[(grid >= 0.0) & (grid <= s_cap)]
    f = ev.f_on_grid(grid)
    f_cap_slope = float(ev.big_f(s_cap))

    sup_all = float(np.max(f))
    gap = sup_all - f
    # refine around near-maximizers off the support
    near = np.nonzero(gap < 1e-6)[0]
    extra = []
    for i in near:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        extra.append(np.linspace(lo, hi, refine + 1))
    if extra:
        grid = np.unique(np.concatenate([grid] + extra))
        grid = grid[(grid >= 0.0) & (grid <= s_cap)]
        f = ev.f_on_grid(grid)
        sup_all = float(np.max(f))

    on_support = np.zeros(len(grid), dtype=bool)
    for i, s in enumerate(grid):
        j = np.searchsorted(support, s)
        near_pts = [support[k] for k in (j - 1, j) if 0 <= k < len(support)]
        if near_pts and min(abs(s - p) for p in near_pts) <= 1e-9 * max(1.0, q):
            on_support[i] = True

    f_support = f[on_support]
    sup_support = float(np.max(f_support)) if len(f_support) else -np.inf
    support_gap = float(np.max(np.abs(f_support - sup_all))) if len(f_support) else np.inf
    off_f = f[~on_support]
    violation = max(0.0, float(np.max(off_f)) - sup_support) if len(off_f) else 0.0
    if f_cap_slope > 0.0:
        # f might still rise beyond the capped grid; flag conservatively
        violation = max(violation, abs(f_cap_slope) * (q - s_cap))

    return StationarityResiduals(
        larkin_residual=larkin,
        support_max_f_gap=support_gap,
        offsupport_violation=violation,
        f_grid=grid,
        f_values=f,
    )


def rs_free_energy(params: ModelParams, corr) -> float:
    """Replica-symmetric free energy
    (beta^2 / 2) (B(0) - B(2 / (beta sqrt(mu t))))."""
    beta, mu, t = params.beta, params.mu, params.t
    b0 = corrmod.eval_b(corr, 0.0, 0)
    b1 = corrmod.eval_b(corr, 2.0 / (beta * math.sqrt(mu * t)), 0)
    return 0.5 * beta ** 2 * (b0 - b1)
