"""Dirichlet eigenvalues of the ball and the nonlinear first eigenvalue.

lambda_1(gamma) = inf (int |grad u|^2)^gamma / int |u|^{2 gamma}, 1 <= gamma <= 2*/2,
interpolates between the first Dirichlet eigenvalue (gamma = 1) and
S^{2*/2} (gamma = 2*/2, not attained on a bounded domain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .errors import BadParameters, IterationDiverged
from .mesh import Field, RadialGrid, bubble, dirichlet_energy, integrate_power
from .sobolev import EXPONENT_TOL, critical_half

EL_TOL = 1e-8
MAX_ITER = 100_000
ARMIJO = 1e-4
F_NOISE = 1e-12


@dataclass
class EigenResult:
    gamma: float
    value: float
    minimizer: Field
    residual: float
    refinement_trace: list = field(default_factory=list)  # [(M, value)], M increasing
    iterations: int = 0
    attained: bool = True
    status: str = "converged"
    infimum_estimate: Optional[float] = None
    start: str = ""

    def to_dict(self):
        return {"gamma": self.gamma, "value": self.value, "residual": self.residual,
                "iterations": self.iterations, "attained": self.attained,
                "status": self.status, "start": self.start,
                "infimum_estimate": self.infimum_estimate,
                "refinement_trace": [{"M": m, "value": v} for m, v in self.refinement_trace],
                "M": self.minimizer.grid.M, "N": self.minimizer.grid.N}


def _a_norm(grid, u):
    return math.sqrt(max(float(u @ grid.apply_stiffness(u)), 0.0))


def linear_lambda1(grid: RadialGrid, index: int = 1, tol: float = EL_TOL,
                   max_iter: int = 10_000) -> EigenResult:
    """index-th radial Dirichlet eigenvalue (index <= 3) by inverse iteration.

    Higher radial modes are obtained by mass-orthogonal deflation of the
    lower ones.  The returned eigenfunction is normalized to int u^2 = 1
    with u(0) > 0.
    """
    if index not in (1, 2, 3):
        raise BadParameters("index must be 1, 2 or 3")
    lower = [linear_lambda1(grid, j, tol, max_iter).minimizer.values for j in range(1, index)]
    r = grid.nodes[:-1]
    u = np.cos(0.5 * math.pi * r) * np.cos((index - 1) * math.pi * r)

    def deflate(v):
        for w in lower:
            v = v - (w @ grid.apply_mass(v)) * w
        return v

    res = math.inf
    lam = math.nan
    for it in range(1, max_iter + 1):
        u = deflate(u)
        u /= math.sqrt(u @ grid.apply_mass(u))
        Au = grid.apply_stiffness(u)
        lam = float(u @ Au)
        z = deflate(grid.solve_stiffness(grid.apply_mass(u)))
        res = _a_norm(grid, u - lam * z) / _a_norm(grid, u)
        if not math.isfinite(res):
            raise IterationDiverged("inverse iteration produced non-finite values")
        if res < tol:
            break
        u = z
    status = "converged" if res < tol else "iteration-cap"
    if u[0] < 0:
        u = -u
    return EigenResult(gamma=1.0, value=lam, minimizer=Field(grid, u), residual=res,
                       refinement_trace=[(grid.M, lam)], iterations=it, status=status,
                       start="inverse-iteration")


# ---------------------------------------------------------------- full spectrum


@dataclass(frozen=True)
class BallEigenvalue:
    value: float
    degree: int  # spherical-harmonic degree l (0 is radial)
    index: int  # n-th zero of J_{l + N/2 - 1}
    multiplicity: int


def harmonic_multiplicity(N, l):
    """Dimension of degree-l spherical harmonics in R^N."""
    return comb(l + N - 1, N - 1) - (comb(l + N - 3, N - 1) if l >= 2 else 0)


def _bessel_zeros(nu, x_max, step=0.05):
    f = lambda x: jv(nu, x)
    xs = np.arange(max(nu, step), x_max + step, step)
    vals = f(xs)
    zeros = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            zeros.append(float(a))
        elif fa * fb < 0:
            zeros.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15))
    return zeros


def ball_dirichlet_eigenvalues(N: int, count: int = 3):
    """Lowest ``count`` distinct Dirichlet eigenvalues of the unit ball in R^N.

    lambda = j_{nu,n}^2 with nu = l + N/2 - 1, including nonradial modes (l > 0)
    which a radial discretization cannot see.
    """
    x_max = 10.0
    while True:
        found = []
        l = 0
        while l + N / 2 - 1 < x_max:
            for n, z in enumerate(_bessel_zeros(l + N / 2 - 1, x_max), start=1):
                found.append(BallEigenvalue(z * z, l, n, harmonic_multiplicity(N, l)))
            l += 1
        found.sort(key=lambda e: e.value)
        if len(found) >= count:
            return found[:count]
        x_max *= 2


# ------------------------------------------------------------ nonlinear case


def quotient(grid: RadialGrid, u, gamma: float) -> float:
    """(int |grad u|^2)^gamma / int |u|^{2 gamma}; invariant under u -> c u."""
    T = dirichlet_energy(grid, u)
    P = integrate_power(grid, u, 2 * gamma)
    return T ** gamma / P


def _power_load(grid, u, gamma):
    ug = grid.at_gauss(u)
    a = np.abs(ug)
    P = grid.integrate(a ** (2 * gamma))
    b = grid.load(a ** (2 * gamma - 2) * ug)
    return P, b


def _descend(grid, u, gamma, tol, max_iter, stall_window=500, stall_rtol=1e-13):
    """Preconditioned descent on log T - log(P)/gamma, normalized to P = 1.

    The first trial step is the nonlinear inverse iteration u <- (T/P) A^{-1} b(u);
    it is halved until the Armijo condition holds.
    """
    P, b = _power_load(grid, u, gamma)
    u = u / P ** (1 / (2 * gamma))
    P, b = _power_load(grid, u, gamma)
    Au = grid.apply_stiffness(u)
    T = float(u @ Au)
    f = math.log(T) - math.log(P) / gamma
    history = [f]
    status = "iteration-cap"
    res = math.inf
    for it in range(1, max_iter + 1):
        z = grid.solve_stiffness(b)
        w = u - (T / P) * z
        res = math.sqrt(max(float(w @ grid.apply_stiffness(w)), 0.0)) / math.sqrt(T)
        if not math.isfinite(res):
            raise IterationDiverged("nonlinear eigen descent produced non-finite values")
        if res < tol:
            status = "converged"
            break
        g = 2.0 * (u / T - z / P)
        slope = float(g @ grid.apply_stiffness(g))
        tau = 0.5 * T
        for k in range(60):
            v = u - tau * g
            Pv, bv = _power_load(grid, v, gamma)
            Av = grid.apply_stiffness(v)
            Tv = float(v @ Av)
            if Pv > 0 and Tv > 0:
                fv = math.log(Tv) - math.log(Pv) / gamma
                if fv <= f - ARMIJO * tau * slope:
                    break
                # near convergence the decrease drops below the rounding noise of
                # f; the full inverse-iteration step is then taken on trust
                if k == 0 and fv - f <= F_NOISE * abs(f):
                    break
            tau *= 0.5
        else:
            status = "stagnation"
            break
        s = Pv ** (-1 / (2 * gamma))
        u, T, P, b = v * s, Tv * s * s, 1.0, bv * s ** (2 * gamma - 1)
        f = fv
        history.append(f)
        if len(history) > stall_window:
            if history[-stall_window - 1] - f < stall_rtol * abs(f):
                status = "stagnation"
                break
    return u, T ** gamma / P, res, it, status


def _starts(grid, gamma):
    lin = linear_lambda1(grid).minimizer.values
    starts = [("linear-eigenfunction", lin)]
    r = grid.nodes
    for k in (16, 64, 256):
        if k < grid.M // 2:
            eps = r[k] ** 2
            starts.append((f"bubble(eps={eps:.3g})", bubble(grid, eps).v.values))
    return starts


def nonlinear_lambda1(grid: RadialGrid, gamma: float, tol: float = EL_TOL,
                      max_iter: int = MAX_ITER, levels: int = 3) -> EigenResult:
    """lambda_1(gamma) on the grid with a refinement trace over M/2^j, j < levels.

    For gamma = 2*/2 the infimum is not attained; the discrete minimizers
    concentrate at the grid scale, the descent is stopped on stagnation and
    the result is flagged ``attained = False``.
    """
    half = critical_half(grid.N)
    if not 1.0 - EXPONENT_TOL <= gamma <= half + EXPONENT_TOL:
        raise BadParameters(f"gamma must lie in [1, 2*/2 = {half:g}], got {gamma}")
    critical = abs(gamma - half) <= EXPONENT_TOL
    trace = []
    best = None
    grids = [grid]
    for _ in range(levels - 1):
        if grids[-1].M % 2 or grids[-1].M // 2 < 64:
            break
        grids.append(grids[-1].coarsen())
    for g in reversed(grids):
        cand = []
        for name, u0 in _starts(g, gamma):
            if best is not None and name == "linear-eigenfunction":
                # continue from the coarser minimizer, prolonged to this grid
                u0 = np.interp(g.nodes, best[0].grid.nodes, best[0].full)[:-1]
                name = "prolonged"
            u, val, res, it, status = _descend(g, np.asarray(u0, float), gamma, tol, max_iter)
            cand.append((val, u, res, it, status, name))
        val, u, res, it, status, name = min(cand, key=lambda c: c[0])
        trace.append((g.M, val))
        best = (Field(g, u), val, res, it, status, name)
    field_, val, res, it, status, name = best
    est = _extrapolate([v for _, v in trace]) if critical else val
    return EigenResult(gamma=float(gamma), value=val, minimizer=field_, residual=res,
                       refinement_trace=trace, iterations=it, attained=not critical,
                       status=status, infimum_estimate=est, start=name)


def _extrapolate(values):
    """Aitken delta-squared extrapolation of a monotone sequence (last three terms)."""
    if len(values) < 3:
        return values[-1]
    a, b, c = values[-3:]
    den = (c - b) - (b - a)
    if den == 0 or (c - b) * (b - a) <= 0:
        return c
    return c - (c - b) ** 2 / den
