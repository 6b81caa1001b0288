"""Model parameters and the overlap-distribution data structure.

A ParisiMeasure is a probability measure zeta on [0, q) stored through its
CDF s -> zeta([0, s]).  The CDF is assembled from ordered segments: point
masses, constant stretches, closed-form stretches (the FRSB families) and
sampled monotone grids.  The gap function

    delta(s) = int_s^q zeta([0, u]) du

is integrated segment by segment in closed form; it drives every kernel
integral in the free-energy and displacement formulas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from . import correlator as corrmod

MASS_TOL = 1e-12

RS = "RS"
ONE_RSB = "ONE_RSB"
FRSB = "FRSB"


@dataclass(frozen=True)
class ModelParams:
    """Structure constants: inverse temperature, mass, elastic strength."""

    beta: float
    mu: float
    t: float
    lattice_size: Optional[int] = None

    def __post_init__(self):
        if self.beta <= 0 or self.mu <= 0 or self.t <= 0:
            raise ValueError("beta, mu, t must be strictly positive")
        if self.lattice_size is not None and self.lattice_size < 1:
            raise ValueError("lattice_size must be >= 1")


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float


@dataclass(frozen=True)
class ConstantCdf:
    lo: float
    hi: float
    value: float


@dataclass(frozen=True)
class ClosedFormCdf:
    """CDF stretch given by a named formula.

    Tags:
      frsb_power_law: params {beta, t, gamma, q_c};
          cdf(s) = (gamma+2)/(3 beta) * (4/(t gamma (gamma+1)))^(1/3)
                   * (1 + 2 q_c - 2 s)^((gamma-1)/3)
      frsb_general: params {beta, t, q_c, correlator};
          cdf(s) = beta^{-1} * U_B'(q_c - s)
    """

    lo: float
    hi: float
    tag: str
    params: Dict[str, Any]


@dataclass(frozen=True)
class SampledCdf:
    lo: float
    hi: float
    grid: Tuple[float, ...]
    values: Tuple[float, ...]


Segment = Union[Atom, ConstantCdf, ClosedFormCdf, SampledCdf]


def _closed_form_cdf(seg: ClosedFormCdf, s: np.ndarray) -> np.ndarray:
    p = seg.params
    if seg.tag == "frsb_power_law":
        beta, t, gam, qc = p["beta"], p["t"], p["gamma"], p["q_c"]
        amp = (gam + 2.0) / (3.0 * beta) * (4.0 / (t * gam * (gam + 1.0))) ** (1.0 / 3.0)
        return amp * (1.0 + 2.0 * qc - 2.0 * s) ** ((gam - 1.0) / 3.0)
    if seg.tag == "frsb_general":
        corr = p["correlator"]
        return corrmod.ub_prime(corr, p["q_c"] - s, p["t"]) / p["beta"]
    raise ValueError(f"unknown closed-form tag {seg.tag!r}")


def _closed_form_integral(seg: ClosedFormCdf, s: np.ndarray) -> np.ndarray:
    """int_s^{seg.hi} cdf(u) du, exact."""
    p = seg.params
    if seg.tag == "frsb_power_law":
        beta, t, gam, qc = p["beta"], p["t"], p["gamma"], p["q_c"]
        amp = (gam + 2.0) / (3.0 * beta) * (4.0 / (t * gam * (gam + 1.0))) ** (1.0 / 3.0)
        e = (gam - 1.0) / 3.0 + 1.0
        return amp / (2.0 * e) * (
            (1.0 + 2.0 * qc - 2.0 * s) ** e - (1.0 + 2.0 * qc - 2.0 * seg.hi) ** e
        )
    if seg.tag == "frsb_general":
        corr = p["correlator"]
        beta, t, qc = p["beta"], p["t"], p["q_c"]
        return (corrmod.ub(corr, qc - s, t) - corrmod.ub(corr, qc - seg.hi, t)) / beta
    raise ValueError(f"unknown closed-form tag {seg.tag!r}")


def _sampled_cdf(seg: SampledCdf, s: np.ndarray) -> np.ndarray:
    return np.interp(s, seg.grid, seg.values)


def _sampled_integral(seg: SampledCdf, s: np.ndarray) -> np.ndarray:
    # exact integral of the piecewise-linear interpolant on [s, hi]
    g = np.asarray(seg.grid)
    v = np.asarray(seg.values)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(g))])
    total = cum[-1]

    def upto(x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(g, x, side="right") - 1, 0, len(g) - 2)
        x0, x1 = g[i], g[i + 1]
        y0, y1 = v[i], v[i + 1]
        frac = np.where(x1 > x0, (x - x0) / np.where(x1 > x0, x1 - x0, 1.0), 0.0)
        ymid = y0 + frac * (y1 - y0)
        return cum[i] + 0.5 * (y0 + ymid) * (x - x0)

    return total - upto(s)


class ParisiMeasure:
    """Probability measure on [0, q) represented by its CDF segments."""

    def __init__(self, q: float, segments: Sequence[Segment]):
        if q <= 0:
            raise ValueError("q must be positive")
        self.q = float(q)
        self.segments = tuple(segments)
        self._compile()

    def _compile(self):
        # Walk segments left to right, tracking the running CDF value and
        # building piece tables (lo, hi, evaluator). Atoms bump the value.
        pieces = []  # (lo, hi, kind, obj, cdf_lo, cdf_hi)
        pos = 0.0
        val = 0.0
        qstar = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                if not (0.0 <= seg.location < self.q):
                    raise ValueError("atom location must lie in [0, q)")
                if seg.location > pos + 1e-15:
                    pieces.append((pos, seg.location, "const", val))
                pos = max(pos, seg.location)
                if seg.mass < 0:
                    raise ValueError("atom mass must be nonnegative")
                val += seg.mass
                if seg.mass > 0:
                    qstar = seg.location
                continue
            lo, hi = seg.lo, seg.hi
            if lo < pos - 1e-12 or hi <= lo or hi > self.q + 1e-12:
                raise ValueError("segments must be ordered and lie in [0, q]")
            if lo > pos + 1e-15:
                pieces.append((pos, lo, "const", val))
            if isinstance(seg, ConstantCdf):
                if seg.value < val - 1e-12:
                    raise ValueError("CDF must be nondecreasing")
                if seg.value > val + 1e-12:
                    qstar = max(qstar, lo)
                val = seg.value
                pieces.append((lo, hi, "const", val))
            elif isinstance(seg, ClosedFormCdf):
                v0 = float(_closed_form_cdf(seg, np.asarray(lo)))
                v1 = float(_closed_form_cdf(seg, np.asarray(hi)))
                if v0 < val - 1e-9 or v1 < v0 - 1e-9:
                    raise ValueError("closed-form CDF must be nondecreasing")
                val = v1
                qstar = max(qstar, hi)
                pieces.append((lo, hi, "closed", seg))
            elif isinstance(seg, SampledCdf):
                v = np.asarray(seg.values)
                if np.any(np.diff(v) < -1e-12) or v[0] < val - 1e-9:
                    raise ValueError("sampled CDF must be nondecreasing")
                val = float(v[-1])
                if np.any(np.diff(v) > 0):
                    inc = np.nonzero(np.diff(v) > 0)[0]
                    qstar = max(qstar, float(np.asarray(seg.grid)[inc[-1] + 1]))
                pieces.append((lo, hi, "sampled", seg))
            else:
                raise TypeError(f"unknown segment type {type(seg)!r}")
            pos = hi
        if pos < self.q - 1e-15:
            pieces.append((pos, self.q, "const", val))
        if abs(val - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {val!r} != 1")
        if not (qstar < self.q):
            raise ValueError("support must not contain q")
        self.q_star = qstar
        self._pieces = pieces
        self._lows = np.array([p[0] for p in pieces])
        # suffix tail integrals: tail[i] = int_{hi_i}^{q} cdf
        fulls = [self._piece_integral(i, np.asarray(pieces[i][0])) for i in range(len(pieces))]
        tail = np.zeros(len(pieces) + 1)
        for i in range(len(pieces) - 1, -1, -1):
            tail[i] = tail[i + 1] + float(fulls[i])
        self._tail = tail

    def _piece_cdf(self, i: int, s: np.ndarray) -> np.ndarray:
        lo, hi, kind, obj = self._pieces[i]
        if kind == "const":
            return np.full_like(np.asarray(s, dtype=float), obj)
        if kind == "closed":
            return _closed_form_cdf(obj, s)
        return _sampled_cdf(obj, s)

    def _piece_integral(self, i: int, s: np.ndarray) -> np.ndarray:
        lo, hi, kind, obj = self._pieces[i]
        if kind == "const":
            return obj * (hi - np.asarray(s, dtype=float))
        if kind == "closed":
            return _closed_form_integral(obj, s)
        return _sampled_integral(obj, s)

    def _locate(self, s: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self._lows, s, side="right") - 1, 0, len(self._pieces) - 1)

    def cdf(self, s):
        """zeta([0, s]), right-continuous."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < -1e-12) or np.any(s_arr > self.q + 1e-12):
            raise ValueError("s outside [0, q]")
        s_arr = np.clip(s_arr, 0.0, self.q)
        idx = self._locate(np.atleast_1d(s_arr))
        out = np.empty(idx.shape)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._piece_cdf(int(i), np.atleast_1d(s_arr)[m])
        return float(out[0]) if np.asarray(s).ndim == 0 else out.reshape(np.shape(s))

    def delta(self, s):
        """Gap function int_s^q zeta([0,u]) du, exact per segment."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < -1e-12) or np.any(s_arr > self.q + 1e-12):
            raise ValueError("s outside [0, q]")
        s_arr = np.clip(s_arr, 0.0, self.q)
        flat = np.atleast_1d(s_arr)
        idx = self._locate(flat)
        out = np.empty(idx.shape)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._piece_integral(int(i), flat[m]) + self._tail[i + 1]
        return float(out[0]) if np.asarray(s).ndim == 0 else out.reshape(np.shape(s))

    def intervals(self, lo: float = 0.0, hi: Optional[float] = None):
        """Compiled piece intervals intersected with [lo, hi]; quadrature seams."""
        hi = self.q if hi is None else hi
        out = []
        for plo, phi, _, _ in self._pieces:
            a, b = max(plo, lo), min(phi, hi)
            if b > a:
                out.append((a, b))
        return out

    @property
    def support_infimum(self) -> float:
        for lo, hi, kind, obj in self._pieces:
            if kind == "const" and obj > 0:
                return lo
            if kind != "const":
                return lo
        return self.q

    def translate(self, r: float) -> "ParisiMeasure":
        """Shift the measure by r; zeta^r([0, s+r]) = zeta([0, s])."""
        if r <= -self.support_infimum:
            raise ValueError("translation must keep the support inside [0, q+r]")
        segs = []
        for seg in self.segments:
            if isinstance(seg, Atom):
                segs.append(Atom(seg.location + r, seg.mass))
            elif isinstance(seg, ConstantCdf):
                segs.append(ConstantCdf(seg.lo + r, seg.hi + r, seg.value))
            elif isinstance(seg, ClosedFormCdf):
                p = dict(seg.params)
                p["q_c"] = p["q_c"] + r
                segs.append(ClosedFormCdf(seg.lo + r, seg.hi + r, seg.tag, p))
            else:
                segs.append(
                    SampledCdf(
                        seg.lo + r,
                        seg.hi + r,
                        tuple(x + r for x in seg.grid),
                        seg.values,
                    )
                )
        segs = [s for s in segs if not (isinstance(s, (ConstantCdf,)) and s.hi <= 0)]
        return ParisiMeasure(self.q + r, segs)

    def support_grid(self, n: int = 512) -> np.ndarray:
        """Points of increase: atom locations plus grids on increasing pieces."""
        pts = []
        prev_val = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                if seg.mass > 0:
                    pts.append(np.array([seg.location]))
                prev_val += seg.mass
            elif isinstance(seg, ConstantCdf):
                if seg.value > prev_val + 1e-14:
                    pts.append(np.array([seg.lo]))
                prev_val = seg.value
            elif isinstance(seg, (ClosedFormCdf, SampledCdf)):
                hi = np.nextafter(seg.hi, seg.lo)
                pts.append(np.linspace(seg.lo, hi, n))
                prev_val = float(self.cdf(hi))
        if not pts:
            return np.array([self.q_star])
        return np.unique(np.concatenate(pts))

    # -- constructors ----------------------------------------------------

    @staticmethod
    def dirac(location: float, q: float) -> "ParisiMeasure":
        return ParisiMeasure(q, [Atom(location, 1.0)])

    @staticmethod
    def two_atom(q0: float, q1: float, m: float, q: float) -> "ParisiMeasure":
        if not (0.0 <= q0 < q1 < q):
            raise ValueError("need 0 <= q0 < q1 < q")
        if not (0.0 < m <= 1.0):
            raise ValueError("m must lie in (0, 1]")
        if m == 1.0:
            return ParisiMeasure.dirac(q0, q)
        return ParisiMeasure(q, [Atom(q0, m), Atom(q1, 1.0 - m)])

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        segs = []
        for seg in self.segments:
            if isinstance(seg, Atom):
                segs.append({"type": "atom", "location": seg.location, "mass": seg.mass})
            elif isinstance(seg, ConstantCdf):
                segs.append({"type": "constant_cdf", "lo": seg.lo, "hi": seg.hi, "value": seg.value})
            elif isinstance(seg, ClosedFormCdf):
                p = dict(seg.params)
                if "correlator" in p:
                    c = p.pop("correlator")
                    p["correlator"] = {
                        "kind": c.kind, "g": c.g, "a": c.a, "gamma": c.gamma,
                        "c0": c.c0, "atoms": list(map(list, c.atoms)),
                    }
                segs.append({"type": "closed_form_cdf", "lo": seg.lo, "hi": seg.hi,
                             "tag": seg.tag, "params": p})
            else:
                segs.append({"type": "sampled_cdf", "lo": seg.lo, "hi": seg.hi,
                             "grid": list(seg.grid), "values": list(seg.values)})
        return {"q": self.q, "q_star": self.q_star, "segments": segs}

    @staticmethod
    def from_dict(d: dict) -> "ParisiMeasure":
        segs = []
        for rec in d["segments"]:
            typ = rec["type"]
            if typ == "atom":
                segs.append(Atom(rec["location"], rec["mass"]))
            elif typ == "constant_cdf":
                segs.append(ConstantCdf(rec["lo"], rec["hi"], rec["value"]))
            elif typ == "closed_form_cdf":
                p = dict(rec["params"])
                if "correlator" in p:
                    c = p["correlator"]
                    p["correlator"] = corrmod.Correlator(
                        c["kind"], g=c["g"], a=c["a"], gamma=c["gamma"],
                        c0=c["c0"], atoms=tuple(map(tuple, c["atoms"])),
                    )
                segs.append(ClosedFormCdf(rec["lo"], rec["hi"], rec["tag"], p))
            elif typ == "sampled_cdf":
                segs.append(SampledCdf(rec["lo"], rec["hi"], tuple(rec["grid"]), tuple(rec["values"])))
            else:
                raise ValueError(f"unknown segment record {typ!r}")
        return ParisiMeasure(d["q"], segs)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @staticmethod
    def from_json(s: str) -> "ParisiMeasure":
        return ParisiMeasure.from_dict(json.loads(s))

    def sup_norm_distance(self, other: "ParisiMeasure", n: int = 10_000) -> float:
        """Sup-norm of the CDF difference on an n-point grid over [0, max q]."""
        qmax = min(self.q, other.q)
        s = np.linspace(0.0, qmax, n)
        return float(np.max(np.abs(self.cdf(s) - other.cdf(s))))


@dataclass
class RsbSolution:
    """A solved phase point."""

    phase: str
    q_c: float
    measure: ParisiMeasure
    extras: Dict[str, Any] = field(default_factory=dict)
    free_energy: Optional[float] = None
    residuals: Any = None

    def to_dict(self) -> dict:
        d = {
            "phase": self.phase,
            "q_c": self.q_c,
            "measure": self.measure.to_dict(),
            "extras": {k: v for k, v in self.extras.items()},
            "free_energy": self.free_energy,
        }
        if self.residuals is not None:
            d["residuals"] = self.residuals.to_dict()
        return d
