"""Radial discretization of H^1_0 on the unit ball of R^N.

Radial functions are represented by their values at the nodes
0 = r_0 < r_1 < ... < r_M = 1 and extended piecewise linearly (P1), with
u(r_M) = 0 imposed.  The origin is an ordinary unknown, which gives the
even reflection u'(0) = 0 for free.

The Dirichlet energy of the P1 interpolant is integrated exactly: the
derivative is constant on each cell, so

    int |grad u|^2 = sigma_N sum_k (u_{k+1} - u_k)^2 (r_{k+1}^N - r_k^N) / (N h_k^2).

Nonlinear integrals (L^p norms, int F(u), load vectors) use Gauss-Legendre
quadrature of the same interpolant on every cell.  Both halves therefore
see one and the same H^1_0 function, so discrete Rayleigh quotients are
genuine quotients of admissible functions and inherit the continuous lower
bounds (e.g. grad_sq >= S for the normalized bubble).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import BadParameters, GridMismatch, GridTooCoarse
from .sobolev import check_dimension, critical_exponent, sobolev_constant, sphere_area

MIN_NODES = 64
DEFAULT_M = 1024
DEFAULT_GRADING = 2.0
GAUSS_POINTS = 8


@dataclass(frozen=True, eq=False)
class RadialGrid:
    N: int
    nodes: np.ndarray  # length M + 1, nodes[0] = 0, nodes[-1] = 1
    grading: float = DEFAULT_GRADING
    gauss_points: int = GAUSS_POINTS

    @property
    def M(self):
        return len(self.nodes) - 1

    @property
    def size(self):
        """Number of unknowns (nodes 0..M-1)."""
        return len(self.nodes) - 1

    @cached_property
    def sphere_area(self):
        return sphere_area(self.N)

    @cached_property
    def widths(self):
        return np.diff(self.nodes)

    @cached_property
    def cell_weights(self):
        """sigma_N (r_{k+1}^N - r_k^N) / (N h_k^2): exact P1 stiffness per cell."""
        r = self.nodes
        return self.sphere_area * (r[1:] ** self.N - r[:-1] ** self.N) / self.N / self.widths ** 2

    @cached_property
    def quad_weights(self):
        """Nodal weights w_k with sum w_k phi(r_k) ~ int_0^1 phi(r) r^{N-1} dr."""
        return _nodal_weights(self.nodes, self.N)

    # -- Gauss quadrature of P1 interpolants ------------------------------------

    @cached_property
    def _gauss(self):
        x, w = leggauss(self.gauss_points)
        lam = 0.5 * (x + 1.0)  # local coordinate in [0, 1]
        r0 = self.nodes[:-1, None]
        h = self.widths[:, None]
        pts = r0 + h * lam[None, :]
        wts = self.sphere_area * 0.5 * h * w[None, :] * pts ** (self.N - 1)
        return pts, wts, lam

    @property
    def gauss_radii(self):
        return self._gauss[0]

    @property
    def gauss_weights(self):
        """Weights including the sphere area and r^{N-1} (integrates over the ball)."""
        return self._gauss[1]

    def at_gauss(self, values):
        """P1 interpolant at the Gauss points of every cell, shape (M, q)."""
        full = self.pad(values)
        lam = self._gauss[2]
        return full[:-1, None] * (1.0 - lam)[None, :] + full[1:, None] * lam[None, :]

    def integrate(self, g):
        """int_B g dx for g sampled at the Gauss points."""
        return float(np.sum(self.gauss_weights * g))

    def load(self, g):
        """Vector (int_B g phi_j dx)_j over the unknowns for g at the Gauss points."""
        lam = self._gauss[2]
        gw = self.gauss_weights * g
        left = gw @ (1.0 - lam)
        right = gw @ lam
        b = np.zeros(self.M + 1)
        b[:-1] += left
        b[1:] += right
        return b[:-1]

    def weighted_mass(self, g):
        """Tridiagonal (diag, off) of (int_B g phi_i phi_j dx) over the unknowns."""
        lam = self._gauss[2]
        gw = self.gauss_weights * g
        ll = gw @ ((1 - lam) ** 2)
        rr = gw @ (lam ** 2)
        lr = gw @ ((1 - lam) * lam)
        diag = np.zeros(self.M + 1)
        diag[:-1] += ll
        diag[1:] += rr
        return diag[:-1], lr[:-1]

    @cached_property
    def mass(self):
        return self.weighted_mass(np.ones_like(self.gauss_radii))

    def apply_mass(self, u):
        return _tridiag_apply(*self.mass, u)

    # -- stiffness ---------------------------------------------------------------

    @cached_property
    def stiffness(self):
        """Tridiagonal (diag, off) of the P1 stiffness matrix on the unknowns."""
        c = self.cell_weights
        diag = np.zeros(self.M + 1)
        diag[:-1] += c
        diag[1:] += c
        return diag[:-1], -c[:-1]

    @cached_property
    def _stiffness_chol(self):
        d, e = self.stiffness
        ab = np.zeros((2, self.M))
        ab[0, 1:] = e
        ab[1] = d
        return cholesky_banded(ab, lower=False)

    def apply_stiffness(self, u):
        return _tridiag_apply(*self.stiffness, np.asarray(u, dtype=float))

    def solve_stiffness(self, b):
        """A^{-1} b (Riesz map from the dual of H^1_0)."""
        return cho_solve_banded((self._stiffness_chol, False), np.asarray(b, dtype=float))

    def pad(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.M:
            raise GridMismatch(f"expected {self.M} nodal values, got {values.shape[-1]}")
        return np.append(values, 0.0)

    def coarsen(self, factor=2):
        if self.M % factor:
            raise BadParameters(f"M = {self.M} not divisible by {factor}")
        return build_radial_grid(self.N, self.M // factor, self.grading, self.gauss_points)


def _tridiag_apply(diag, off, u):
    out = diag * u
    out[:-1] += off * u[1:]
    out[1:] += off * u[:-1]
    return out


def _product_weights(a, b, nodes_local, N, deg):
    """int_a^b L_j(r) r^{N-1} dr for the Lagrange basis on nodes_local."""
    x, w = leggauss(deg)
    r = 0.5 * (b - a) * (x + 1) + a
    ww = 0.5 * (b - a) * w * r ** (N - 1)
    out = []
    for j, rj in enumerate(nodes_local):
        L = np.ones_like(r)
        for i, ri in enumerate(nodes_local):
            if i != j:
                L *= (r - ri) / (rj - ri)
        out.append(float(ww @ L))
    return out


def _nodal_weights(nodes, N):
    """P1 product weights on the first cells, composite P2 product weights after.

    P2 weights at the origin can be negative because r^{N-1} vanishes there,
    so the first cells use the (positive) linear rule.  The number of linear
    cells is the smallest with the right parity that keeps all weights positive.
    """
    M = len(nodes) - 1
    deg = (N + 3) // 2 + 2
    for n1 in range(M % 2, M + 1, 2):
        w = np.zeros(M + 1)
        for k in range(n1):
            wl, wr = _product_weights(nodes[k], nodes[k + 1], nodes[k:k + 2], N, deg)
            w[k] += wl
            w[k + 1] += wr
        for k in range(n1, M, 2):
            w3 = _product_weights(nodes[k], nodes[k + 2], nodes[k:k + 3], N, deg)
            w[k:k + 3] += w3
        if np.all(w[:-1] > 0):
            return w
    raise BadParameters("could not build positive quadrature weights")


def build_radial_grid(N, M=DEFAULT_M, grading=DEFAULT_GRADING, gauss_points=GAUSS_POINTS):
    """Nodes r_k = (k/M)^grading, k = 0..M."""
    try:
        N = check_dimension(N)
    except ValueError as exc:
        raise BadParameters(str(exc)) from exc
    if int(M) != M or M < MIN_NODES:
        raise BadParameters(f"need at least {MIN_NODES} cells, got M = {M}")
    if not grading > 0:
        raise BadParameters(f"grading must be positive, got {grading}")
    M = int(M)
    nodes = (np.arange(M + 1) / M) ** float(grading)
    nodes[-1] = 1.0
    return RadialGrid(N=N, nodes=nodes, grading=float(grading), gauss_points=int(gauss_points))


@dataclass(eq=False)
class Field:
    """Nodal values of a radial function at r_0..r_{M-1}; zero at r = 1."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        if self.values.shape != (self.grid.M,):
            raise GridMismatch(f"expected {self.grid.M} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise BadParameters("field has non-finite values")

    @classmethod
    def from_function(cls, grid, fun):
        return cls(grid, fun(grid.nodes[:-1]))

    @property
    def full(self):
        return self.grid.pad(self.values)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def scaled(self, s):
        return Field(self.grid, s * self.values)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "value"])
            for r, v in zip(self.grid.nodes, self.full):
                w.writerow([f"{r:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, grid, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        r = np.array([float(a) for a, _ in rows])
        v = np.array([float(b) for _, b in rows])
        if len(r) != grid.M + 1 or not np.allclose(r, grid.nodes, rtol=1e-14, atol=1e-300):
            raise GridMismatch("CSV radii do not match the grid nodes")
        return cls(grid, v[:-1])


def _values(grid, u):
    if isinstance(u, Field):
        if u.grid is not grid and (u.grid.M != grid.M or u.grid.N != grid.N):
            raise GridMismatch("field lives on a different grid")
        return u.values
    return np.asarray(u, dtype=float)


def dirichlet_energy(grid: RadialGrid, u) -> float:
    """int_B |grad u|^2 dx of the P1 interpolant (exact)."""
    du = np.diff(grid.pad(_values(grid, u)))
    return float(np.sum(grid.cell_weights * du * du))


def lp_norm(grid: RadialGrid, u, p: float) -> float:
    """(int_B |u|^p dx)^{1/p}."""
    if p < 1:
        raise BadParameters(f"p must be >= 1, got {p}")
    return integrate_power(grid, u, p) ** (1.0 / p)


def integrate_power(grid: RadialGrid, u, p: float) -> float:
    """int_B |u|^p dx."""
    ug = np.abs(grid.at_gauss(_values(grid, u)))
    return grid.integrate(ug ** p)


# -------------------------------------------------------------------- bubbles


def cutoff(r, radius=1.0):
    """C^2 radial cutoff: 1 on [0, radius/2], 0 on [radius, inf), quintic blend."""
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 0.5 * radius) / (0.5 * radius), 0.0, 1.0)
    return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


@dataclass
class BubbleData:
    epsilon: float
    v: Field
    grad_sq: float
    q_integrals: Mapping[float, float] = field(default_factory=dict)

    def to_dict(self):
        return {"epsilon": self.epsilon, "grad_sq": self.grad_sq,
                "q_integrals": {f"{q:g}": v for q, v in self.q_integrals.items()}}


def bubble(grid: RadialGrid, epsilon: float, cutoff_radius: float = 1.0, q_values=()) -> BubbleData:
    """Normalized concentrating profile v_eps = u_eps / |u_eps|_{2*} centred at 0.

    u_eps(r) = psi(r) (eps + r^2)^{-(N-2)/2} with psi the quintic cutoff.
    """
    if not epsilon > 0:
        raise BadParameters(f"epsilon must be positive, got {epsilon}")
    if not 0 < cutoff_radius <= 1:
        raise BadParameters(f"cutoff radius must lie in (0, 1], got {cutoff_radius}")
    core = int(np.sum(grid.nodes < math.sqrt(epsilon)))
    if core < 8:
        raise GridTooCoarse(
            f"only {core} nodes inside r < sqrt(eps) = {math.sqrt(epsilon):.3g}; refine the grid")
    N = grid.N
    r = grid.nodes[:-1]
    u = cutoff(r, cutoff_radius) * (epsilon + r * r) ** (-(N - 2) / 2)
    u /= lp_norm(grid, u, critical_exponent(N))
    v = Field(grid, u)
    q_int = {float(q): integrate_power(grid, u, q) for q in q_values}
    return BubbleData(epsilon=float(epsilon), v=v, grad_sq=dirichlet_energy(grid, u),
                      q_integrals=q_int)


# ---------------------------------------------------------- asymptotic fits


@dataclass
class PowerFit:
    exponent: float
    prefactor: float
    residual: float  # rms of log residuals
    log_coefficient: float = 0.0  # kappa_1 in eps^a (kappa_1 |log eps| + kappa_2)
    log_model: bool = False

    def to_dict(self):
        return {"exponent": self.exponent, "prefactor": self.prefactor,
                "log_coefficient": self.log_coefficient, "log_model": self.log_model,
                "residual": self.residual}


def fit_power_law(eps, values) -> PowerFit:
    """Least-squares fit of log(values) = a log(eps) + log(kappa)."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return PowerFit(exponent=float(coef[0]), prefactor=float(math.exp(coef[1])),
                    residual=float(np.sqrt(np.mean(res ** 2))))


def fit_log_power_law(eps, values, bracket=(0.0, 4.0)) -> PowerFit:
    """Fit values = eps^a (k1 |log eps| + k2): a by 1-D search, (k1, k2) linear."""
    from scipy.optimize import minimize_scalar

    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(values, dtype=float)
    L = np.abs(np.log(eps))

    def solve(a):
        y = vals / eps ** a
        A = np.vstack([L, np.ones_like(L)]).T
        # relative weighting: residuals measured against the data itself
        Wt = 1.0 / y
        coef, *_ = np.linalg.lstsq(A * Wt[:, None], y * Wt, rcond=None)
        model = A @ coef
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.log(np.where(model > 0, model, np.nan) / y)
        return coef, (float(np.sqrt(np.mean(r ** 2))) if np.all(np.isfinite(r)) else math.inf)

    grid = np.linspace(*bracket, 401)
    scores = [solve(a)[1] for a in grid]
    k = int(np.argmin(scores))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda a: solve(a)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    a = float(res.x) if res.fun <= scores[k] else float(grid[k])
    coef, resid = solve(a)
    return PowerFit(exponent=a, prefactor=float(coef[1]), residual=resid,
                    log_coefficient=float(coef[0]), log_model=True)


def expected_rates(N, q):
    """Leading exponents (grad_sq - S, int v^q) and whether a |log eps| factor appears."""
    N = check_dimension(N)
    grad = (N - 2) / 2
    q_crit = N / (N - 2)
    if abs(q - q_crit) <= 1e-12:
        return grad, N / 4, True
    if q > q_crit:
        return grad, (2 * N - (N - 2) * q) / 4, False
    return grad, None, False


@dataclass
class BubbleAsymptotics:
    N: int
    q: float
    eps: list
    grad_excess: list
    q_integrals: list
    grad_fit: PowerFit
    q_fit: PowerFit
    q_power_fit: PowerFit
    expected_grad: float
    expected_q: float
    log_case: bool
    log_detected: bool

    def to_dict(self):
        return {"N": self.N, "q": self.q, "eps": self.eps, "grad_minus_S": self.grad_excess,
                "q_integrals": self.q_integrals, "grad_fit": self.grad_fit.to_dict(),
                "q_fit": self.q_fit.to_dict(), "q_power_fit": self.q_power_fit.to_dict(),
                "expected_grad_exponent": self.expected_grad,
                "expected_q_exponent": self.expected_q,
                "log_case": self.log_case, "log_detected": self.log_detected}

    def table(self):
        return [(e, g, i) for e, g, i in zip(self.eps, self.grad_excess, self.q_integrals)]


def bubble_asymptotics(N, q, eps=None, M=8192, grading=DEFAULT_GRADING, cutoff_radius=1.0):
    """Tabulate grad_sq - S and int v^q along eps and fit the leading exponents.

    Both a pure power law and the eps^a (k1 |log eps| + k2) model are fitted
    with a free exponent.  With five points the extra parameter always
    lowers the residual, so residuals cannot tell a |log eps| factor from a
    slowly decaying correction.  The log factor counts as detected when the
    log model (with k1 > 0) reproduces the predicted leading exponent within
    5% while the pure power law misses it by more than 10%.
    """
    grid = build_radial_grid(N, M, grading)
    if eps is None:
        eps = np.logspace(-2, -4, 5)
    eps = [float(e) for e in eps]
    S = sobolev_constant(N)
    data = [bubble(grid, e, cutoff_radius, q_values=(q,)) for e in eps]
    excess = [d.grad_sq - S for d in data]
    qint = [d.q_integrals[float(q)] for d in data]
    g_exp, q_exp, log_case = expected_rates(N, q)
    gfit = fit_power_law(eps, excess)
    pfit = fit_power_law(eps, qint)
    lfit = fit_log_power_law(eps, qint)
    detected = False
    if q_exp:
        detected = (lfit.log_coefficient > 0 and abs(lfit.exponent / q_exp - 1) < 0.05
                    and abs(pfit.exponent / q_exp - 1) > 0.10)
    return BubbleAsymptotics(N=N, q=float(q), eps=eps, grad_excess=excess, q_integrals=qint,
                             grad_fit=gfit, q_fit=lfit if detected else pfit, q_power_fit=pfit,
                             expected_grad=g_exp, expected_q=q_exp, log_case=log_case,
                             log_detected=bool(detected))
