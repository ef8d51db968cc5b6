"""Admissible set I, the root t0 and the compactness threshold c*.

I = {t > 0 : h(t) <= S^{-2*/2} t^{2*/2-1}}.  Writing
rho(t) = h(t) / (S^{-2*/2} t^{2*/2-1}) = sum (a_i / S^{-2*/2}) t^{gamma_i - 2*/2},
rho is a positive combination of exponentials in s = log t, hence convex
in s.  So I = {rho <= 1} is a single (possibly empty or unbounded)
interval whose endpoints are the at most two roots of rho = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._powers import evaluate_powers, merge_powers, powers_inf
from .errors import BracketNotFound, ConditionA3Violated
from .nonlocal_term import (TIE_RTOL, NonlocalTerm, Regime, classify_regime,
                            coercivity_predicate)
from .serialize import format_float
from .sobolev import (EXPONENT_TOL, check_dimension, critical_coefficient, critical_exponent,
                      critical_half, sobolev_constant)

__all__ = [
    "sobolev_constant", "AdmissibleSet", "admissible_set", "threshold_root",
    "compactness_threshold", "closed_form_oracle", "ThresholdReport", "threshold_report",
]

ROOT_RTOL = 1e-12
MAX_NEWTON = 5


@dataclass(frozen=True)
class AdmissibleSet:
    """Union of intervals; 0.0 stands for 0+ and math.inf for +infinity."""

    intervals: tuple = ()

    @property
    def empty(self):
        return not self.intervals

    def contains(self, t):
        return any(lo <= t <= hi and t > 0 for lo, hi in self.intervals)

    def to_dict(self):
        return {"empty": self.empty,
                "intervals": [[format_float(lo) if lo == 0 else lo,
                               format_float(hi) if math.isinf(hi) else hi]
                              for lo, hi in self.intervals]}


def _rho_terms(term: NonlocalTerm, N):
    """(exponent, coefficient) list of rho in the variable t."""
    Sc = critical_coefficient(N)
    half = critical_half(N)
    return merge_powers([a / Sc for a, _ in term.terms],
                        [g - half for _, g in term.terms], tol=EXPONENT_TOL)


def _g(term, N, t):
    Sc = critical_coefficient(N)
    return float(term.h(t)) - Sc * t ** (critical_half(N) - 1.0)


def _dg(term, N, t):
    Sc = critical_coefficient(N)
    m = critical_half(N) - 1.0
    return float(term.dh(t)) - Sc * m * t ** (m - 1.0)


def _residual(term, N, t):
    return abs(_g(term, N, t)) / max(float(term.h(t)), 1.0)


def _bracket(phi, s_in, direction, s_cap=745.0):
    """Walk from s_in (phi < 0) in the given direction until phi > 0."""
    step = 1.0
    s = s_in
    while step < 4 * s_cap:
        s_out = s_in + direction * step
        if abs(s_out) > s_cap:
            break
        if phi(s_out) > 0:
            return (s_out, s) if direction < 0 else (s, s_out)
        s = s_out
        step *= 2.0
    s_out = direction * s_cap
    if phi(s_out) > 0:
        return (s_out, s) if direction < 0 else (s, s_out)
    raise BracketNotFound(f"no sign change of h - S^(-2*/2) t^(2*/2-1) within |log t| < {s_cap}")


def _polish(term, N, t):
    """Up to MAX_NEWTON Newton steps on g, kept only when they reduce the residual."""
    best = (_residual(term, N, t), t)
    for _ in range(MAX_NEWTON):
        if best[0] < 1e-15:
            break
        d = _dg(term, N, t)
        if d == 0 or not math.isfinite(d):
            break
        t_new = t - _g(term, N, t) / d
        if not (t_new > 0 and math.isfinite(t_new)):
            break
        t = t_new
        r = _residual(term, N, t)
        if r < best[0]:
            best = (r, t)
    return best[1]


def _root(term, N, terms, s_inside, direction):
    phi = lambda s: float(evaluate_powers(terms, s)) - 1.0
    lo, hi = _bracket(phi, s_inside, direction)
    s = brentq(phi, lo, hi, xtol=1e-14, rtol=ROOT_RTOL, maxiter=500)
    return _polish(term, N, math.exp(s))


def admissible_set(term: NonlocalTerm, N: int) -> AdmissibleSet:
    N = check_dimension(N)
    terms = _rho_terms(term, N)
    e_lo, c_lo = terms[0]
    e_hi, c_hi = terms[-1]
    if len(terms) == 1 and e_lo == 0.0:
        return AdmissibleSet(((0.0, math.inf),)) if c_lo <= 1.0 else AdmissibleSet()
    # limits of rho at the two ends (convex, nonconstant)
    lim0 = math.inf if e_lo < 0 else (c_lo if e_lo == 0 else 0.0)
    liminf = math.inf if e_hi > 0 else (c_hi if e_hi == 0 else 0.0)
    v, t_star = powers_inf([c for _, c in terms], [e for e, _ in terms])
    if v > 1.0:
        return AdmissibleSet()
    if not 0.0 < t_star < math.inf:
        # infimum is a limit; equality there is not attained
        lim = lim0 if t_star == 0.0 else liminf
        if lim >= 1.0:
            return AdmissibleSet()
    if v == 1.0 and 0.0 < t_star < math.inf:
        return AdmissibleSet(((t_star, t_star),))
    s_in = math.log(t_star) if 0.0 < t_star < math.inf else _inside(terms)
    lo = 0.0 if lim0 < 1.0 else _root(term, N, terms, s_in, -1)
    hi = math.inf if liminf < 1.0 else _root(term, N, terms, s_in, +1)
    return AdmissibleSet(((lo, hi),))


def _inside(terms):
    """Some s with rho(s) < 1 when the infimum is only approached at an end."""
    for s in np.concatenate([np.linspace(-20, 20, 81), np.linspace(-700, 700, 281)]):
        if float(evaluate_powers(terms, s)) < 1.0:
            return float(s)
    raise BracketNotFound("could not locate a point of I")


def _a3_holds(term, N):
    half = critical_half(N)
    gammas = [g for _, g in term.terms]
    if max(gammas) > half + EXPONENT_TOL or min(gammas) >= half - EXPONENT_TOL:
        return False
    return term.coefficient_of(half) < critical_coefficient(N) * (1 - TIE_RTOL)


def threshold_root(term: NonlocalTerm, N: int) -> float:
    """Unique t0 > 0 with h(t0) = S^{-2*/2} t0^{2*/2-1}, assuming the ratio decreases."""
    N = check_dimension(N)
    if not _a3_holds(term, N):
        raise ConditionA3Violated(
            "h(t)/t^(2*/2-1) must decrease strictly to a limit below S^(-2*/2)")
    terms = _rho_terms(term, N)
    return _root(term, N, terms, _inside(terms), -1)


def _k_inf(term, N, lo, hi):
    """inf of K on [lo, hi] without assuming monotonicity."""
    k = term.k_coefficients(N)
    if math.isinf(hi) and k[-1] < 0:
        return -math.inf, math.inf
    s_lo = math.log(lo) if lo > 0 else -40.0
    s_hi = math.log(hi) if math.isfinite(hi) else max(s_lo + 40.0, 40.0)
    K = lambda s: float(term.K(math.exp(s), N))
    s = np.linspace(s_lo, s_hi, 401)
    vals = np.array([K(x) for x in s])
    j = int(np.argmin(vals))
    best = (vals[j], math.exp(s[j]))
    a, b = s[max(j - 1, 0)], s[min(j + 1, len(s) - 1)]
    if b > a:
        res = minimize_scalar(K, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        if res.fun < best[0]:
            best = (float(res.fun), math.exp(float(res.x)))
    if lo == 0.0 and 0.0 < best[0]:
        best = (0.0, 0.0)
    return best


@dataclass
class ThresholdReport:
    N: int
    term: str
    S: float
    I: AdmissibleSet
    t0: Optional[float]
    c_star: float
    regime: Regime
    shortcut_used: bool = True
    oracle_value: Optional[float] = None
    margin: Optional[float] = None
    conditions: Optional[object] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "N": self.N,
            "h": self.term,
            "S": self.S,
            "I": self.I.to_dict(),
            "t0": self.t0,
            "c_star": format_float(self.c_star) if not math.isfinite(self.c_star) else self.c_star,
            "regime": self.regime.to_dict(),
            "monotone_shortcut": self.shortcut_used,
            "oracle_value": (format_float(self.oracle_value)
                             if self.oracle_value is not None and not math.isfinite(self.oracle_value)
                             else self.oracle_value),
            "margin": self.margin,
        }
        if self.conditions is not None:
            d["conditions"] = self.conditions.to_dict()
        d.update(self.extra)
        return d

    CSV_HEADER = ("N", "h", "regime", "I_lo", "I_hi", "t0", "c_star", "oracle", "margin")

    def csv_row(self):
        lo, hi = self.I.intervals[0] if not self.I.empty else (math.nan, math.nan)
        return (self.N, self.term, self.regime.tag.value, float(lo), float(hi),
                math.nan if self.t0 is None else self.t0, float(self.c_star),
                math.nan if self.oracle_value is None else self.oracle_value,
                math.nan if self.margin is None else self.margin)


def _threshold(term, N):
    I = admissible_set(term, N)
    if I.empty:
        return math.inf, None, I, True
    k = term.k_coefficients(N)
    if np.all(k >= 0):
        lo = min(iv[0] for iv in I.intervals)
        c = 0.0 if lo == 0.0 else float(term.K(lo, N))
        return c, (lo if lo > 0 else None), I, True
    best = (math.inf, None)
    for lo, hi in I.intervals:
        v, t = _k_inf(term, N, lo, hi)
        if v < best[0]:
            best = (v, t)
    t = best[1] if best[1] and math.isfinite(best[1]) else None
    return best[0], t, I, False


def compactness_threshold(term: NonlocalTerm, N: int) -> float:
    """c* = inf over I of K; +inf when I is empty."""
    return _threshold(term, check_dimension(N))[0]


def _model_parts(term):
    ts = term.terms
    if len(ts) == 1:
        a_, g = ts[0]
        return (a_, 0.0, 2.0) if g == 1.0 else (0.0, a_, g)
    if len(ts) == 2 and ts[0][1] == 1.0:
        return ts[0][0], ts[1][0], ts[1][1]
    return None


def closed_form_oracle(N: int, a: float, b: float, gamma: float) -> Optional[float]:
    """Closed-form c* for h(t) = a + b t^{gamma-1}, or None when no formula applies."""
    N = check_dimension(N)
    S = sobolev_constant(N)
    half = critical_half(N)
    Sc = critical_coefficient(N)
    crit = critical_exponent(N)
    if a < 0 or b < 0 or (a == 0 and b == 0):
        return None
    if b == 0 or gamma == 1.0:
        a_eff = a + b if gamma == 1.0 else a
        return (a_eff * S) ** (N / 2) / N
    if abs(gamma - half) <= EXPONENT_TOL:
        if b > Sc * (1 + TIE_RTOL):
            return math.inf
        if b < Sc * (1 - TIE_RTOL):
            return (a ** half / (Sc - b)) ** ((N - 2) / 2) / N
        return math.inf if a > 0 else None
    if gamma > half:
        return math.inf if coercivity_predicate(a, b, gamma, N) else None
    if N == 3 and gamma == 2.0:
        return (a * b * S ** 3 / 4 + b ** 3 * S ** 6 / 24
                + (4 * a * S + b ** 2 * S ** 4) ** 1.5 / 24)
    if a == 0:
        t0 = (b * S ** half) ** (1.0 / (half - gamma))
        return (1.0 / (2 * gamma) - 1.0 / crit) * b * t0 ** gamma
    return None


def threshold_report(term: NonlocalTerm, N: int, conditions=None) -> ThresholdReport:
    N = check_dimension(N)
    c, t0, I, shortcut = _threshold(term, N)
    parts = _model_parts(term)
    oracle = closed_form_oracle(N, *parts) if parts else None
    margin = None
    if oracle is not None:
        if math.isinf(oracle) and math.isinf(c):
            margin = 0.0
        elif math.isfinite(oracle) and math.isfinite(c):
            margin = abs(c - oracle) / max(abs(oracle), 1e-300) if oracle != c else 0.0
        else:
            margin = math.inf
    return ThresholdReport(N=N, term=str(term), S=sobolev_constant(N), I=I, t0=t0,
                           c_star=c, regime=classify_regime(term, N), shortcut_used=shortcut,
                           oracle_value=oracle, margin=margin, conditions=conditions)
