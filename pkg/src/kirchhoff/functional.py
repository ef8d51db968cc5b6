"""The Kirchhoff energy on a radial grid and its derivatives.

    J(u) = H(T)/2 - int F(u) - (1/2*) int |u|^{2*},   T = int |grad u|^2,

with the dual gradient  <J'(u), v> = h(T) (u, v)_{H^1_0} - int (f(u) + |u|^{2*-2} u) v.
All integrals act on the P1 interpolant (see ``mesh``), so the discrete
derivatives are the exact derivatives of the discrete energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import GridMismatch, SingularSystem
from .mesh import Field, RadialGrid
from .nonlinearity import PowerNonlinearity
from .nonlocal_term import NonlocalTerm, classify_regime
from .sobolev import critical_exponent
from .threshold import compactness_threshold


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """-h(|grad u|^2) Lap u = f(u) + |u|^{2*-2} u on the unit ball, u = 0 on the boundary."""

    term: NonlocalTerm
    nonlin: PowerNonlinearity
    grid: RadialGrid

    def __post_init__(self):
        self.nonlin.validate(self.grid.N)

    @property
    def N(self):
        return self.grid.N

    @property
    def crit(self):
        return critical_exponent(self.grid.N)

    @property
    def a(self):
        """Coefficient of the constant part of h."""
        return self.term.coefficient_of(1.0)

    def with_grid(self, grid):
        return ProblemSpec(self.term, self.nonlin, grid)

    def regime(self):
        return classify_regime(self.term, self.N)

    def to_dict(self):
        nl = self.nonlin
        return {"N": self.N, "h": str(self.term),
                "terms": [{"a": a, "gamma": g} for a, g in self.term.terms],
                "lambda": nl.lam, "mu": nl.mu, "gamma_f": nl.gamma_f, "nu": nl.nu, "q": nl.q,
                "M": self.grid.M, "grading": self.grid.grading}


def _vals(p, u):
    if isinstance(u, Field):
        if u.grid is not p.grid and (u.grid.M != p.grid.M or u.grid.N != p.grid.N):
            raise GridMismatch("field and problem live on different grids")
        return u.values
    u = np.asarray(u, dtype=float)
    if u.shape != (p.grid.M,):
        raise GridMismatch(f"expected {p.grid.M} values, got shape {u.shape}")
    return u


class _State:
    """Everything derived from u that energy and gradient share."""

    __slots__ = ("u", "Au", "T", "ug")

    def __init__(self, p, u):
        self.u = _vals(p, u)
        self.Au = p.grid.apply_stiffness(self.u)
        self.T = max(float(self.u @ self.Au), 0.0)
        self.ug = p.grid.at_gauss(self.u)


def _energy(p, s: _State):
    grid = p.grid
    crit = p.crit
    H = float(p.term.H(s.T))
    F = grid.integrate(p.nonlin.F(s.ug))
    C = grid.integrate(np.abs(s.ug) ** crit)
    return 0.5 * H - F - C / crit


def _source(p, s: _State):
    """Pointwise f(u) + |u|^{2*-2} u at the Gauss points."""
    return p.nonlin.f(s.ug) + np.abs(s.ug) ** (p.crit - 2.0) * s.ug


def energy(p: ProblemSpec, u) -> float:
    return _energy(p, _State(p, u))


def dual_gradient(p: ProblemSpec, u) -> np.ndarray:
    """Coefficients <J'(u), phi_j> for the nodal basis."""
    s = _State(p, u)
    return float(p.term.h(s.T)) * s.Au - p.grid.load(_source(p, s))


def gradient(p: ProblemSpec, u) -> Field:
    """H^1_0 Riesz representative of J'(u)."""
    return Field(p.grid, p.grid.solve_stiffness(dual_gradient(p, u)))


def energy_and_gradient(p: ProblemSpec, u):
    """(J, Riesz gradient values, residual ||J'(u)||_{H^-1})."""
    s = _State(p, u)
    r = float(p.term.h(s.T)) * s.Au - p.grid.load(_source(p, s))
    g = p.grid.solve_stiffness(r)
    return _energy(p, s), g, math.sqrt(max(float(g @ r), 0.0))


def residual_norm(p: ProblemSpec, u) -> float:
    """Dual norm of J'(u), i.e. the H^1_0 norm of the Riesz gradient."""
    return energy_and_gradient(p, u)[2]


def h1_norm(p: ProblemSpec, u) -> float:
    u = _vals(p, u)
    return math.sqrt(max(float(u @ p.grid.apply_stiffness(u)), 0.0))


def newton_step(p: ProblemSpec, u, r=None) -> np.ndarray:
    """Solve J''(u) d = -J'(u) in nodal coordinates.

    J'' = h(T) A + 2 h'(T) (Au)(Au)^T - M_w with M_w the tridiagonal matrix of
    int w phi_i phi_j, w = f'(u) + (2*-1)|u|^{2*-2}.  The tridiagonal part is
    factored by banded LU and the rank-one term by Sherman-Morrison.
    """
    s = _State(p, u)
    grid = p.grid
    hT = float(p.term.h(s.T))
    dhT = float(p.term.dh(s.T))
    if r is None:
        r = hT * s.Au - grid.load(_source(p, s))
    w = p.nonlin.df(s.ug) + (p.crit - 1.0) * np.abs(s.ug) ** (p.crit - 2.0)
    md, mo = grid.weighted_mass(w)
    ad, ao = grid.stiffness
    d = hT * ad - md
    o = hT * ao - mo
    ab = np.zeros((3, grid.M))
    ab[0, 1:] = o
    ab[1] = d
    ab[2, :-1] = o
    try:
        x = solve_banded((1, 1), ab, -r)
        y = solve_banded((1, 1), ab, s.Au)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(f"Hessian factorization failed: {exc}") from exc
    coef = 2.0 * dhT
    den = 1.0 + coef * float(s.Au @ y)
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)) or abs(den) < 1e-14:
        raise SingularSystem("Hessian is singular at this point")
    return x - y * (coef * float(s.Au @ x) / den)


@dataclass
class PSdiagnostic:
    energy: float
    residual: float
    pairing: float
    k_identity: float
    k_identity_rel: float
    gradient_sq: float
    c_star: Optional[float] = None
    below_threshold: Optional[bool] = None

    def to_dict(self):
        d = dict(self.__dict__)
        if self.c_star is not None and not math.isfinite(self.c_star):
            d["c_star"] = "inf"
        return d


def ps_diagnostic(p: ProblemSpec, u, c_star: Optional[float] = None) -> PSdiagnostic:
    """Energy, dual residual, <J'(u),u> and the K-identity defect.

    The identity J(u) - <J'(u),u>/2* = K(T) - int (F(u) - u f(u)/2*) holds
    exactly for the discrete functional; its defect measures rounding only.
    When c_star is omitted it is computed from the nonlocal term.
    """
    s = _State(p, u)
    grid = p.grid
    crit = p.crit
    J = _energy(p, s)
    r = float(p.term.h(s.T)) * s.Au - grid.load(_source(p, s))
    g = grid.solve_stiffness(r)
    res = math.sqrt(max(float(g @ r), 0.0))
    pairing = float(s.u @ r)
    lhs = J - pairing / crit
    F = p.nonlin.F(s.ug)
    uf = s.ug * p.nonlin.f(s.ug)
    rhs = float(p.term.K(s.T, p.N)) - grid.integrate(F - uf / crit)
    scale = max(abs(J), abs(pairing) / crit, 0.5 * abs(float(p.term.H(s.T))), 1e-300)
    if c_star is None:
        c_star = compactness_threshold(p.term, p.N)
    return PSdiagnostic(energy=J, residual=res, pairing=pairing, k_identity=lhs - rhs,
                        k_identity_rel=abs(lhs - rhs) / scale if s.T > 0 else abs(lhs - rhs),
                        gradient_sq=s.T, c_star=c_star, below_threshold=bool(J < c_star))
