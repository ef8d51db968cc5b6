"""Power-sum nonlocal coefficients h(t) = sum a_i t^{gamma_i - 1}.

Everything here is closed-form algebra on the list of (a_i, gamma_i) pairs:
the primitive H, the Pohozaev-type combination K = H/2 - t h / 2*, the
structural hypotheses used by the threshold theory, and the regime
classification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ._powers import merge_powers, powers_inf
from .errors import BadExponent, EmptyTerm, MissingEigenvalue, NegativeArgument
from .nonlinearity import PowerNonlinearity
from .sobolev import EXPONENT_TOL, critical_coefficient, critical_exponent, critical_half

# absolute tolerance on condition residuals
CONDITION_TOL = 1e-9
# relative band in which b is considered equal to S^{-2*/2}
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class NonlocalTerm:
    """h(t) = sum_i a_i t^{gamma_i - 1}, exponents strictly increasing."""

    terms: tuple  # ((a_1, gamma_1), ...)

    @property
    def coefficients(self):
        return np.array([a for a, _ in self.terms])

    @property
    def exponents(self):
        return np.array([g for _, g in self.terms])

    @property
    def top_exponent(self):
        return self.terms[-1][1]

    def coefficient_of(self, gamma, tol=EXPONENT_TOL):
        for a, g in self.terms:
            if abs(g - gamma) <= tol:
                return a
        return 0.0

    def h(self, t):
        t = np.asarray(t, dtype=float)
        return sum(a * t ** (g - 1.0) for a, g in self.terms)

    def dh(self, t):
        t = np.asarray(t, dtype=float)
        return sum(a * (g - 1.0) * t ** (g - 2.0) for a, g in self.terms if g != 1.0) + 0.0 * t

    def H(self, t):
        t = np.asarray(t, dtype=float)
        return sum(a * t ** g / g for a, g in self.terms)

    def k_coefficients(self, N):
        """Coefficients k_i of K(t) = sum k_i t^{gamma_i}."""
        half = critical_half(N)
        crit = critical_exponent(N)
        out = []
        for a, g in self.terms:
            if g == 1.0:
                out.append(a / N)
            elif abs(g - half) <= EXPONENT_TOL:
                out.append(0.0)
            else:
                out.append(a * (1.0 / (2.0 * g) - 1.0 / crit))
        return np.array(out)

    def K(self, t, N):
        t = np.asarray(t, dtype=float)
        return sum(k * t ** g for k, (_, g) in zip(self.k_coefficients(N), self.terms))

    def __str__(self):
        parts = []
        for a, g in self.terms:
            e = g - 1.0
            if e == 0:
                parts.append(f"{a:.17g}")
            else:
                parts.append(f"{a:.17g}*t^{e:.17g}")
        return " + ".join(parts)


def make_power_sum(pairs) -> NonlocalTerm:
    """Normalize (coefficient, exponent) pairs into a NonlocalTerm.

    Exponents are the gamma_i of h(t) = sum a_i t^{gamma_i - 1}.  Equal
    exponents are merged, zero coefficients dropped.
    """
    pairs = [(float(a), float(g)) for a, g in pairs]
    if not pairs:
        raise EmptyTerm("nonlocal term needs at least one (coefficient, exponent) pair")
    for a, g in pairs:
        if not (math.isfinite(a) and math.isfinite(g)):
            raise BadExponent(f"non-finite term ({a}, {g})")
        if g < 1.0:
            raise BadExponent(f"exponent gamma = {g} < 1 (h would be decreasing)")
        if a < 0:
            raise EmptyTerm(f"negative coefficient {a}")
    merged = merge_powers([a for a, _ in pairs], [g for _, g in pairs])
    if not merged:
        raise EmptyTerm("all coefficients are zero")
    return NonlocalTerm(tuple((c, e) for e, c in merged))


def model_term(a, b, gamma) -> NonlocalTerm:
    """h(t) = a + b t^{gamma-1}."""
    return make_power_sum([(a, 1.0), (b, gamma)])


@dataclass(frozen=True)
class HValues:
    h: float
    H: float
    K: float


def evaluate(term: NonlocalTerm, t: float, N: int) -> HValues:
    """h, H and K at a single t >= 0.

    K is formed both as H/2 - t h/2* and from its own power coefficients;
    the two must agree to 1e-13 relative to the size of the summands.
    """
    if not t >= 0:
        raise NegativeArgument(f"t must be >= 0, got {t}")
    crit = critical_exponent(N)
    h = float(term.h(t))
    H = float(term.H(t))
    k_direct = 0.5 * H - t * h / crit
    k_coef = float(term.K(t, N))
    scale = max(0.5 * abs(H), abs(t * h) / crit, 1e-300)
    if abs(k_direct - k_coef) > 1e-13 * scale:
        raise ArithmeticError(f"K formulas disagree at t={t}: {k_direct} vs {k_coef}")
    return HValues(h=h, H=H, K=k_coef)


# ---------------------------------------------------------------- conditions


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDECIDABLE = "undecidable"


@dataclass
class ConditionReport:
    a1: Status
    a1_witness: list = field(default_factory=list)  # [(alpha_i, gamma_i, mu_i)]
    a1_detail: str = ""
    a2: Status = Status.UNDECIDABLE
    a2_detail: str = ""
    a3: Status = Status.UNDECIDABLE
    a3_limit: Optional[float] = None  # lim h(t)/t^{2*/2-1} at infinity
    a3_detail: str = ""
    a4: Status = Status.UNDECIDABLE
    a4_clause: Optional[str] = None  # "i", "ii" or "iii"
    a4_detail: str = ""
    coercivity_inequality: Optional[bool] = None

    def to_dict(self):
        return {
            "A1": {"status": self.a1.value, "detail": self.a1_detail,
                   "witness": [{"alpha": a, "gamma": g, "mu": m} for a, g, m in self.a1_witness]},
            "A2": {"status": self.a2.value, "detail": self.a2_detail},
            "A3": {"status": self.a3.value, "limit_b": self.a3_limit, "detail": self.a3_detail},
            "A4": {"status": self.a4.value, "clause": self.a4_clause, "detail": self.a4_detail},
            "coercivity_inequality": self.coercivity_inequality,
        }


def _eigen_lookup(eigen, gamma):
    for g, v in eigen.items():
        if abs(float(g) - gamma) <= 1e-9:
            return float(v)
    raise MissingEigenvalue(f"no estimate of lambda_1({gamma:g}) supplied")


def young_bound(A, B, e_lo, e_hi, e):
    """Largest c with A t^e_lo + B t^e_hi >= c t^e for all t >= 0 (e_lo < e < e_hi)."""
    theta = (e_hi - e) / (e_hi - e_lo)
    return (A / theta) ** theta * (B / (1.0 - theta)) ** (1.0 - theta)


def _check_a1(term, nonlin, N, eigen, tol):
    half = critical_half(N)
    k = term.k_coefficients(N)
    gammas = [g for _, g in term.terms]
    if any(c < -tol for c in k):
        return Status.FAILS, [], "K has a negative leading coefficient (gamma_n > 2*/2), K -> -inf"
    wit = [(c, g) for c, g in zip(k, gammas) if c > tol and g < half - EXPONENT_TOL]
    if not wit:
        return Status.FAILS, [], "K has no positive power below 2*/2"
    alpha = {g: c for c, g in wit}
    lo, hi = min(alpha), max(alpha)
    used = {g: 0.0 for g in alpha}
    deferred = []
    pz = nonlin.pohozaev_powers(N)
    for e, d in merge_powers([c for c, _ in pz], [e for _, e in pz]):
        g = e / 2.0
        match = [w for w in alpha if abs(w - g) <= EXPONENT_TOL]
        if match:
            used[match[0]] += d
        elif g < lo or g > hi:
            side = "below" if g < lo else "above"
            return Status.FAILS, [], (
                f"F - t f/2* has |t|^{e:g} {side} every power 2*gamma_i available in K")
        else:
            deferred.append((d, g))

    lam1 = {}

    def cap(g):
        if g not in lam1:
            lam1[g] = _eigen_lookup(eigen, g)
        return alpha[g] * lam1[g]

    for g in [g for g in alpha if used[g] > 0]:
        if used[g] > cap(g) + tol:
            if g in (lo, hi):
                return Status.FAILS, [], (
                    f"coefficient of |t|^{2 * g:g} exceeds alpha lambda_1({g:g})")
            return Status.UNDECIDABLE, [], (
                f"interior exponent {2 * g:g} over budget; no recipe for redistributing")

    for d, g in deferred:
        g_lo = max(w for w in alpha if w < g)
        g_hi = min(w for w in alpha if w > g)
        A = cap(g_lo) - used[g_lo]
        B = cap(g_hi) - used[g_hi]
        if A <= 0 or B <= 0:
            return Status.UNDECIDABLE, [], f"no budget left to absorb |t|^{2 * g:g}"
        c = young_bound(A, B, 2 * g_lo, 2 * g_hi, 2 * g)
        if d > c + tol:
            return Status.UNDECIDABLE, [], (
                f"|t|^{2 * g:g} coefficient {d:.6g} above two-term bound {c:.6g}")
        s = min(d / c, 1.0)
        used[g_lo] += s * A
        used[g_hi] += s * B

    witness = []
    strict = False
    for g in sorted(alpha):
        mu = used[g] / alpha[g]
        witness.append((float(alpha[g]), float(g), float(mu)))
        bound = lam1[g] if g in lam1 else math.inf
        if mu < bound - tol * max(1.0, bound):
            strict = True
    if not strict:
        return Status.UNDECIDABLE, witness, "every multiplier sits at lambda_1(gamma_i); no strict inequality"
    return Status.HOLDS, witness, "per-exponent matching of F - t f/2* against K"


def _check_a2(term, N, tol):
    k = term.k_coefficients(N)
    if all(c >= 0 for c in k) and all(g >= 1.0 for _, g in term.terms):
        return Status.HOLDS, "all K coefficients >= 0 with exponents >= 1"
    t = np.logspace(-8, 8, 20)
    t1, t2 = np.meshgrid(t, t)
    gap = term.K(t1 + t2, N) - term.K(t1, N) - term.K(t2, N)
    worst = np.unravel_index(np.argmin(gap), gap.shape)
    if gap[worst] < -tol * (1.0 + abs(term.K(t1 + t2, N)[worst])):
        return Status.FAILS, (
            f"K(t1+t2) < K(t1)+K(t2) at t1={t1[worst]:.3g}, t2={t2[worst]:.3g}")
    return Status.UNDECIDABLE, "sampling found no violation but K has negative coefficients"


def _check_a3(term, N):
    half = critical_half(N)
    Sc = critical_coefficient(N)
    gammas = [g for _, g in term.terms]
    if max(gammas) > half + EXPONENT_TOL:
        return Status.FAILS, math.inf, "h(t)/t^{2*/2-1} -> inf as t -> inf"
    if min(gammas) >= half - EXPONENT_TOL:
        return Status.FAILS, term.coefficient_of(half), "h(t)/t^{2*/2-1} is constant"
    b = term.coefficient_of(half)
    if b < Sc * (1 - TIE_RTOL):
        return Status.HOLDS, b, "ratio strictly decreasing from +inf to b < S^{-2*/2}"
    return Status.FAILS, b, "limit b >= S^{-2*/2}"


def _check_a4(term, N, p, tol):
    half = critical_half(N)
    Sc = critical_coefficient(N)
    m = half - 1.0
    coeffs = [a for a, _ in term.terms]
    exps = [g - 1.0 for _, g in term.terms]
    rho_inf, _ = powers_inf([c / Sc for c in coeffs], [e - m for e in exps])
    if rho_inf > 1.0 + tol:
        return Status.HOLDS, "ii", f"h(t) >= b t^(2*/2-1) with b = {rho_inf * Sc:.17g} > S^(-2*/2)"
    # (iii): with a power above 2*/2 present, rho > 1 pointwise but inf rho = 1
    # only happens as t -> 0, i.e. the lowest power is S^{-2*/2} t^{2*/2-1}
    low_a, low_g = term.terms[0]
    if (term.top_exponent > half + EXPONENT_TOL and abs(low_g - half) <= EXPONENT_TOL
            and low_a >= Sc * (1 - TIE_RTOL)):
        return Status.HOLDS, "iii", "h exceeds S^(-2*/2) t^(2*/2-1) pointwise, top power above 2*/2"
    # (i): h(t) - S^{-2*/2} t^{2*/2-1} >= eta t^{gamma-1} with p/2 < gamma < 2*/2
    cands = sorted({g for _, g in term.terms if p / 2 < g < half - EXPONENT_TOL})
    if p / 2 < half:
        cands.append(p / 2 + 1e-6 * (half - p / 2))
    for gam in cands:
        val, _ = powers_inf(coeffs + [-Sc], [e - (gam - 1.0) for e in exps] + [m - (gam - 1.0)])
        if val > tol:
            return Status.HOLDS, "i", (
                f"h(t) >= S^(-2*/2) t^(2*/2-1) + {min(val, 1e300):.6g} t^({gam:g}-1)")
    return Status.FAILS, None, "none of the coercivity clauses applies"


def coercivity_sides(a, b, gamma, N):
    """Both sides of the coercivity inequality for h = a + b t^{gamma-1}, gamma > 2*/2."""
    half = critical_half(N)
    S = critical_coefficient(N) ** (-1.0 / half)
    lhs = a ** (gamma - half) * b ** (half - 1.0)
    rhs = ((gamma - half) ** (gamma - half) * (half - 1.0) ** (half - 1.0)
           / (gamma - 1.0) ** (gamma - 1.0) * S ** (-half * (gamma - 1.0)))
    return lhs, rhs


def coercivity_predicate(a, b, gamma, N):
    lhs, rhs = coercivity_sides(a, b, gamma, N)
    return lhs > rhs


def _as_model(term):
    """(a, b, gamma) if term is a + b t^{gamma-1} with gamma > 1, else None."""
    ts = term.terms
    if len(ts) == 1 and ts[0][1] > 1.0:
        return 0.0, ts[0][0], ts[0][1]
    if len(ts) == 2 and ts[0][1] == 1.0:
        return ts[0][0], ts[1][0], ts[1][1]
    return None


def check_conditions(term: NonlocalTerm, nonlin: PowerNonlinearity, N: int,
                     eigen: Mapping[float, float], tol=CONDITION_TOL) -> ConditionReport:
    """Tri-state check of (A1)-(A4) for the power nonlinearity family.

    ``eigen`` maps gamma -> lambda_1(gamma) (gamma = 1 is the linear
    Dirichlet eigenvalue).  Only exponents that receive part of
    F - t f/2* are looked up.
    """
    nonlin.validate(N)
    a1, wit, a1d = _check_a1(term, nonlin, N, eigen, tol)
    a2, a2d = _check_a2(term, N, tol)
    a3, b, a3d = _check_a3(term, N)
    a4, clause, a4d = _check_a4(term, N, nonlin.growth_exponent(), tol)
    model = _as_model(term)
    ineq = None
    if model is not None and model[2] > critical_half(N) + EXPONENT_TOL:
        ineq = bool(coercivity_predicate(*model, N))
    return ConditionReport(a1=a1, a1_witness=wit, a1_detail=a1d, a2=a2, a2_detail=a2d,
                           a3=a3, a3_limit=b, a3_detail=a3d, a4=a4, a4_clause=clause,
                           a4_detail=a4d, coercivity_inequality=ineq)


# -------------------------------------------------------------------- regime


class RegimeTag(str, enum.Enum):
    SUBCRITICAL_THRESHOLD = "SubcriticalThreshold"
    BORDERLINE_THRESHOLD = "BorderlineThreshold"
    BORDERLINE_CRITICAL = "BorderlineCritical"
    COERCIVE = "Coercive"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    detail: str = ""

    @property
    def has_threshold(self):
        return self.tag in (RegimeTag.SUBCRITICAL_THRESHOLD, RegimeTag.BORDERLINE_THRESHOLD)

    @property
    def is_coercive(self):
        return self.tag in (RegimeTag.COERCIVE, RegimeTag.BORDERLINE_CRITICAL)

    def to_dict(self):
        return {"tag": self.tag.value, "detail": self.detail}


def critical_ratio_inf(term, N):
    """inf over t > 0 of h(t) / (S^{-2*/2} t^{2*/2-1})."""
    Sc = critical_coefficient(N)
    m = critical_half(N) - 1.0
    return powers_inf([a / Sc for a, _ in term.terms], [g - 1.0 - m for _, g in term.terms])[0]


def classify_regime(term: NonlocalTerm, N: int) -> Regime:
    half = critical_half(N)
    Sc = critical_coefficient(N)
    top_a, top_g = term.terms[-1]
    if top_g < half - EXPONENT_TOL:
        return Regime(RegimeTag.SUBCRITICAL_THRESHOLD,
                      f"largest power gamma_n = {top_g:g} < 2*/2 = {half:g}")
    if abs(top_g - half) <= EXPONENT_TOL:
        if abs(top_a - Sc) <= TIE_RTOL * Sc:
            if len(term.terms) > 1:
                return Regime(RegimeTag.BORDERLINE_CRITICAL,
                              "b = S^(-2*/2); lower-order powers decide (coercive under (A4)(i))")
            return Regime(RegimeTag.UNCLASSIFIED, "h(t) = S^(-2*/2) t^(2*/2-1) exactly")
        if top_a < Sc:
            return Regime(RegimeTag.BORDERLINE_THRESHOLD,
                          f"gamma_n = 2*/2 with b = {top_a:.6g} < S^(-2*/2) = {Sc:.6g}")
        return Regime(RegimeTag.COERCIVE,
                      f"gamma_n = 2*/2 with b = {top_a:.6g} > S^(-2*/2) = {Sc:.6g}")
    model = _as_model(term)
    if model is not None:
        lhs, rhs = coercivity_sides(*model, N)
        if rhs > 0 and abs(lhs / rhs - 1.0) <= TIE_RTOL:
            return Regime(RegimeTag.UNCLASSIFIED, "on the boundary of the coercivity inequality")
        if lhs > rhs:
            return Regime(RegimeTag.COERCIVE, "gamma > 2*/2 and the closed-form inequality holds")
        return Regime(RegimeTag.UNCLASSIFIED,
                      "gamma > 2*/2 with nonempty admissible set: no compactness result applies")
    rho = critical_ratio_inf(term, N)
    if rho > 1.0 + TIE_RTOL:
        return Regime(RegimeTag.COERCIVE, f"inf h(t)/(S^(-2*/2) t^(2*/2-1)) = {rho:.6g} > 1")
    if rho >= 1.0 - TIE_RTOL:
        return Regime(RegimeTag.UNCLASSIFIED, "critical ratio touches 1")
    return Regime(RegimeTag.UNCLASSIFIED,
                  "gamma_n > 2*/2 with nonempty admissible set: no compactness result applies")
