"""Critical points of the discrete Kirchhoff energy.

* ``minimize``: H^1_0 steepest descent with Armijo backtracking, finished
  by Newton steps that are only accepted when they do not raise the energy.
* ``ray_profile``: J(s v) along a ray, peak location and the s -> inf trend.
* ``mountain_pass``: path deformation between 0 (or any low point) and a
  far end with J <= 0; the path maximum is pushed down by gradient steps
  and the converged maximum is polished by Newton on the residual.
* ``two_solutions``: global minimizer plus a second critical point, from a
  saddle search between minima or, failing that, the second basin found by
  signed multistart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (BadParameters, GeometryViolated, GridTooCoarse, NoDivergenceDetected,
                     SecondSolutionNotFound, SingularSystem, UnsupportedCase)
from .functional import ProblemSpec, energy, energy_and_gradient, h1_norm, newton_step
from .mesh import Field, bubble
from .spectra import ball_dirichlet_eigenvalues, linear_lambda1
from .threshold import compactness_threshold

TOL = 1e-6
ARMIJO = 1e-4
NEWTON_SWITCH = 1e-2


@dataclass
class SolverResult:
    u: Field
    energy: float
    residual: float
    kind: str  # "GlobalMin", "MountainPass", "LocalMin", "Saddle"
    threshold_margin: float
    iterations: int = 0
    trace: list = field(default_factory=list)  # [(energy, residual)]
    status: str = "converged"
    seed: Optional[int] = None
    start: str = ""
    c_star: float = math.inf
    extra: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status == "converged"

    def to_dict(self):
        u = self.u.values
        return {"kind": self.kind, "energy": self.energy, "residual": self.residual,
                "status": self.status, "iterations": self.iterations,
                "c_star": self.c_star, "threshold_margin": self.threshold_margin,
                "seed": self.seed, "start": self.start,
                "h1_norm": math.sqrt(max(float(u @ self.u.grid.apply_stiffness(u)), 0.0)),
                "max_abs": float(np.max(np.abs(u))), **self.extra}


def _result(p, u, kind, iterations, trace, status, c_star, seed=None, start="", **extra):
    J, _, res = energy_and_gradient(p, u)
    return SolverResult(u=Field(p.grid, u), energy=J, residual=res, kind=kind,
                        threshold_margin=c_star - J, iterations=iterations, trace=trace,
                        status=status, seed=seed, start=start, c_star=c_star, extra=extra)


# ------------------------------------------------------------------ Newton


def _newton(p, u, tol, mode, max_steps=40):
    """Newton iteration from u.

    mode "min": a step is kept only if it lowers the residual without raising
    the energy beyond rounding; mode "saddle": residual decrease only.
    Returns (u, converged).
    """
    J, _, res = energy_and_gradient(p, u)
    for _ in range(max_steps):
        if res < tol:
            return u, True
        try:
            d = newton_step(p, u)
        except SingularSystem:
            return u, False
        step = 1.0
        for _ in range(30):
            v = u + step * d
            Jv, _, rv = energy_and_gradient(p, v)
            ok = rv < res * (1 - 1e-4 * step)
            if mode == "min":
                ok = ok and Jv <= J + 1e-12 * max(1.0, abs(J))
            if ok:
                break
            step *= 0.5
        else:
            return u, False
        u, J, res = v, Jv, rv
    return u, res < tol


# ------------------------------------------------------------ minimization


def _descent(p, u, tol, max_iter, trace):
    J, g, res = energy_and_gradient(p, u)
    tau = 1.0
    switch = NEWTON_SWITCH
    trace.append((J, res))
    it = 0
    for it in range(1, max_iter + 1):
        if res < tol:
            return u, "converged", it
        if res < switch:
            v, ok = _newton(p, u, tol, "min")
            if ok:
                J, _, res = energy_and_gradient(p, v)
                trace.append((J, res))
                return v, "converged", it
            switch *= 0.1
        for _ in range(60):
            v = u - tau * g
            Jv, gv, rv = energy_and_gradient(p, v)
            if Jv <= J - ARMIJO * tau * res * res:
                break
            tau *= 0.5
        else:
            v, ok = _newton(p, u, tol, "min")
            return v, ("converged" if ok else "stagnation"), it
        u, J, g, res = v, Jv, gv, rv
        trace.append((J, res))
        tau = min(2.0 * tau, 1e6)
    return u, ("converged" if res < tol else "iteration-cap"), it


def smooth_random_field(grid, rng, modes=6):
    """sum_j c_j cos((j - 1/2) pi r) with c_j ~ N(0, 1)/j: smooth, zero at r = 1."""
    r = grid.nodes[:-1]
    c = rng.normal(size=modes) / np.arange(1, modes + 1)
    return sum(cj * np.cos((j + 0.5) * math.pi * r) for j, cj in enumerate(c))


def _unit(p, u):
    n = h1_norm(p, u)
    if n == 0:
        raise BadParameters("zero direction")
    return u / n


def _starts(p, u0, seed, n_random, amplitudes):
    rng = np.random.default_rng(seed)
    out = []
    if u0 is not None:
        out.append(("u0", np.asarray(u0.values if isinstance(u0, Field) else u0, dtype=float)))
    for k in range(n_random):
        d = _unit(p, smooth_random_field(p.grid, rng))
        for A in amplitudes:
            out.append((f"random{k}(amp={A:g})", A * d))
    try:
        b = _unit(p, bubble(p.grid, 1e-2).v.values)
        for A in amplitudes:
            out.append((f"bubble(amp={A:g})", A * b))
    except GridTooCoarse:
        pass
    signed = []
    for name, u in out:
        signed.append((name, u))
        signed.append(("-" + name, -u))
    return signed


def distinct(p, u1, u2, rtol=1e-4):
    """||u1 - u2|| > rtol (||u1|| + ||u2||) in H^1_0."""
    return h1_norm(p, u1 - u2) > rtol * (h1_norm(p, u1) + h1_norm(p, u2))


def minimize(p: ProblemSpec, u0=None, tol: float = TOL, max_iter: int = 20_000,
             seed: int = 0, multistart: bool = True, n_random: int = 3,
             amplitudes=(0.3, 3.0, 30.0), c_star: Optional[float] = None,
             return_all: bool = False):
    """Lowest-energy critical point found by descent from several starts.

    With ``return_all`` the distinct local minima found (sorted by energy)
    are returned as a second value.
    """
    if not p.regime().is_coercive:
        warnings.warn("minimize outside the coercive regime: J may be unbounded below",
                      RuntimeWarning, stacklevel=2)
    if c_star is None:
        c_star = compactness_threshold(p.term, p.N)
    if multistart:
        starts = _starts(p, u0, seed, n_random, amplitudes)
    else:
        if u0 is None:
            raise BadParameters("u0 is required when multistart is off")
        starts = [("u0", np.asarray(u0.values if isinstance(u0, Field) else u0, dtype=float))]
    results = []
    for name, u in starts:
        trace = []
        v, status, it = _descent(p, u.copy(), tol, max_iter, trace)
        results.append(_result(p, v, "GlobalMin", it, trace, status, c_star, seed, name))
    results.sort(key=lambda r: (not r.converged, r.energy))
    best = results[0]
    minima = []
    for r in results:
        if r.converged and all(distinct(p, r.u.values, m.u.values) for m in minima):
            minima.append(r)
    best.extra["starts"] = len(starts)
    best.extra["distinct_minima"] = len(minima)
    if return_all:
        return best, minima
    return best


# --------------------------------------------------------------------- rays


@dataclass
class RayProfile:
    v: Field
    samples: list  # [(s, J(s v))], s increasing, starting at s = 0
    s_max: float
    peak: float
    diverges: bool
    trend: str  # "-inf", "+inf" or "undecided"
    s_negative: Optional[float] = None  # smallest sampled s > s_max with J(s v) <= 0

    def to_dict(self):
        return {"s_max": self.s_max, "peak": self.peak, "diverges": self.diverges,
                "trend": self.trend, "s_negative": self.s_negative,
                "samples": [[s, j] for s, j in self.samples]}


def ray_profile(p: ProblemSpec, v, s_max_hint: Optional[float] = None, samples: int = 48,
                max_doublings: int = 40) -> RayProfile:
    """Sample j(s) = J(s v) on a geometric grid and classify its behaviour at infinity.

    The grid is prolonged by doublings of s until two successive doublings
    change j in the same direction with at least doubling increments.
    """
    v = np.asarray(v.values if isinstance(v, Field) else v, dtype=float)
    nv = h1_norm(p, v)
    if nv == 0:
        raise BadParameters("ray direction must be nonzero")
    s0 = s_max_hint if s_max_hint else 1.0 / nv
    j = lambda s: energy(p, s * v)
    ss = list(s0 * 2.0 ** np.linspace(-8, 4, samples))
    js = [j(s) for s in ss]
    for _ in range(2):
        ss.append(2.0 * ss[-1])
        js.append(j(ss[-1]))
    trend = "undecided"
    for _ in range(max_doublings):
        d0, d1, d2 = js[-3], js[-2], js[-1]
        if d2 < d1 < d0 and (d1 - d2) >= 2.0 * (d0 - d1):
            trend = "-inf"
            break
        if d2 > d1 > d0 and (d2 - d1) >= 2.0 * (d1 - d0):
            trend = "+inf"
            break
        ss.append(2.0 * ss[-1])
        js.append(j(ss[-1]))
    if trend == "undecided" and p.regime().has_threshold:
        raise NoDivergenceDetected(
            f"no monotone trend of J(s v) after {max_doublings} doublings of s")
    k = int(np.argmax(js))
    s_max, peak = ss[k], js[k]
    lo = ss[k - 1] if k > 0 else 0.5 * ss[0]
    hi = ss[k + 1] if k + 1 < len(ss) else 2.0 * ss[k]
    res = minimize_scalar(lambda x: -j(math.exp(x)), bounds=(math.log(lo), math.log(hi)),
                          method="bounded", options={"xatol": 1e-10})
    if -res.fun > peak:
        s_max, peak = math.exp(float(res.x)), float(-res.fun)
        ss.append(s_max)
        js.append(peak)
    order = np.argsort(ss)
    pts = [(0.0, 0.0)] + [(float(ss[i]), float(js[i])) for i in order]
    s_neg = next((s for s, val in pts if s > s_max and val <= 0), None)
    return RayProfile(v=Field(p.grid, v), samples=pts, s_max=s_max, peak=max(peak, 0.0),
                      diverges=trend == "-inf", trend=trend, s_negative=s_neg)


# ----------------------------------------------------------- mountain pass


def check_origin_geometry(p: ProblemSpec, seed: int = 0, n_dirs: int = 16,
                          rho_max: float = 100.0):
    """Look for 0 < rho < rho_max with J > 0 on the sphere ||u|| = rho along sampled directions.

    Directions are smooth random fields plus the first eigenfunction.  Returns
    the rho maximizing the sampled minimum of J on the sphere, and that
    minimum; a minimum <= 0 means no such rho was found.
    """
    rng = np.random.default_rng(seed)
    dirs = [_unit(p, linear_lambda1(p.grid).minimizer.values)]
    dirs += [_unit(p, smooth_random_field(p.grid, rng)) for _ in range(n_dirs)]
    best = (0.0, -math.inf)
    for rho in rho_max * np.logspace(-8, 0, 49)[:-1]:
        m = min(energy(p, rho * d) for d in dirs)
        if m > best[1]:
            best = (float(rho), float(m))
    return best


def _far_end(p, c_star, eps=None, shrink=4.0, tries=8):
    """R v_eps with J(R v_eps) <= 0, preferring eps whose ray peak is below c*."""
    eps = eps if eps is not None else 1e-2
    best = None
    for _ in range(tries):
        try:
            v = bubble(p.grid, eps).v.values
        except GridTooCoarse:
            break
        ray = ray_profile(p, v)
        if ray.s_negative is not None:
            if best is None or ray.peak < best[0]:
                best = (ray.peak, eps, ray)
            if ray.peak < c_star:
                break
        eps /= shrink
    if best is None:
        raise GeometryViolated("no bubble ray reaches J <= 0")
    _, eps, ray = best
    return ray.s_negative * ray.v.values, eps, ray


def _reparametrize(p, W):
    """Equal H^1_0 arclength spacing of the path nodes (endpoints fixed)."""
    seg = np.array([h1_norm(p, W[i + 1] - W[i]) for i in range(len(W) - 1)])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return W
    target = np.linspace(0.0, s[-1], len(W))
    out = np.empty_like(W)
    for i, t in enumerate(target):
        k = min(int(np.searchsorted(s, t, side="right")) - 1, len(W) - 2)
        w = (t - s[k]) / seg[k] if seg[k] > 0 else 0.0
        out[i] = (1 - w) * W[k] + w * W[k + 1]
    out[0], out[-1] = W[0], W[-1]
    return out


def _tangent(p, W, i):
    t = W[i + 1] - W[i - 1]
    n = h1_norm(p, t)
    return t / n if n > 0 else t


def _path_search(p, A, B, tol, max_iter, n_path):
    """Discrete mountain-pass iteration on a general path W from A to B.

    Each sweep moves the maximal node by a descent step transverse to the
    path and an ascent step along it (so it cannot slide off the pass),
    relaxes the other interior nodes by their transverse gradient and
    redistributes the nodes by arclength.  Once the maximal node has a
    small residual it is polished by Newton on the residual.
    """
    W = np.array([A + t * (B - A) for t in np.linspace(0.0, 1.0, n_path)])
    grid = p.grid
    max_step = 0.5 * h1_norm(p, B - A) / (n_path - 1)
    floor = max(energy(p, A), energy(p, B))
    tau = 0.5
    trace = []
    switch = NEWTON_SWITCH
    status = "iteration-cap"
    best = (math.inf, W[n_path // 2])
    it = 0
    for it in range(1, max_iter + 1):
        out = [energy_and_gradient(p, w) for w in W[1:-1]]
        E = np.array([o[0] for o in out])
        k = int(np.argmax(E))
        J, g, res = out[k]
        u = W[k + 1]
        trace.append((J, res))
        if res < best[0]:
            best = (res, u.copy())
        if res < tol:
            status = "converged"
            break
        if res < switch:
            v, ok = _newton(p, u, tol, "saddle")
            if ok:
                best = (0.0, v)
                trace.append(energy_and_gradient(p, v)[::2])
                status = "converged"
                break
            switch *= 0.1
        if not all(math.isfinite(o[2]) for o in out):
            status = "diverged"
            break
        new = W.copy()
        for i, (Ei, gi, _) in enumerate(out, start=1):
            if Ei <= floor:
                # below the endpoints the valleys may be unbounded; leave such nodes
                continue
            t = _tangent(p, W, i)
            c = float(t @ grid.apply_stiffness(gi))
            d = gi - (2.0 if i == k + 1 else 1.0) * c * t
            nd = h1_norm(p, d)
            if nd > 0:
                new[i] = W[i] - min(tau, max_step / nd) * d
        W = _reparametrize(p, new)
        if len(trace) > 1 and trace[-1][1] > 1.5 * trace[-2][1]:
            tau = max(0.5 * tau, 1e-4)
        else:
            tau = min(1.05 * tau, 1.0)
    u = best[1]
    if status != "converged":
        # last resort: Newton on the residual from the best maximal node seen
        v, ok = _newton(p, u, tol, "saddle")
        if ok:
            u, status = v, "converged"
            trace.append(energy_and_gradient(p, u)[::2])
    return u, status, it, trace, float(max(energy(p, w) for w in W))


def _ray_max(p, v, s_end, n_path):
    """Maximum of J on the path s v, 0 <= s <= s_end, sampled at n_path nodes and refined."""
    ss = np.linspace(0.0, s_end, n_path)
    E = [energy(p, s * v) for s in ss]
    k = int(np.argmax(E[1:-1])) + 1
    res = minimize_scalar(lambda s: -energy(p, s * v), bounds=(ss[k - 1], ss[k + 1]),
                          method="bounded", options={"xatol": 1e-12 * s_end})
    if -res.fun >= E[k]:
        return float(res.x), float(-res.fun)
    return float(ss[k]), float(E[k])


def _ray_pass(p, far, tol, max_iter, n_path):
    """Discrete mountain pass on straight paths from 0.

    The path is the segment from 0 to s_end v with n_path equally spaced
    nodes, so arclength redistribution is exact.  Each iteration locates the
    path maximum u = s* v, moves it one Armijo descent step and passes the
    new path through the moved node, prolonged until J <= 0 at its end.
    """
    s_end = h1_norm(p, far)
    v = far / s_end
    trace = []
    switch = NEWTON_SWITCH
    status = "iteration-cap"
    tau = 1.0
    s_star, J = _ray_max(p, v, s_end, n_path)
    u = s_star * v
    it = 0
    for it in range(1, max_iter + 1):
        J, g, res = energy_and_gradient(p, u)
        trace.append((J, res))
        if res < tol:
            status = "converged"
            break
        if res < switch:
            w, ok = _newton(p, u, tol, "saddle")
            if ok:
                u = w
                trace.append(energy_and_gradient(p, u)[::2])
                status = "converged"
                break
            switch *= 0.1
        t = min(tau, 0.25 * s_star / res)
        for _ in range(60):
            w = u - t * g
            vw = w / h1_norm(p, w)
            end = s_end
            while energy(p, end * vw) > 0 and end < 1e6 * s_end:
                end *= 2.0
            sw, Jw = _ray_max(p, vw, end, n_path)
            if Jw <= J - ARMIJO * t * res * res:
                break
            t *= 0.5
        else:
            status = "stagnation"
            break
        u, v, s_star, s_end = sw * vw, vw, sw, end
        tau = min(2.0 * t, 1e6)
    return u, status, it, trace, s_end * v


def mountain_pass(p: ProblemSpec, far_end=None, tol: float = TOL, max_iter: int = 20_000,
                  n_path: int = 41, seed: int = 0, eps: Optional[float] = None,
                  check_geometry: bool = True, c_star: Optional[float] = None) -> SolverResult:
    """Mountain-pass critical point on paths from 0 to ``far_end``.

    Without ``far_end`` a bubble ray R v_eps is used, eps being shrunk until
    the ray maximum falls below c*.
    """
    if c_star is None:
        c_star = compactness_threshold(p.term, p.N)
    ray = None
    if far_end is None:
        far, eps, ray = _far_end(p, c_star, eps)
    else:
        far = np.asarray(far_end.values if isinstance(far_end, Field) else far_end, dtype=float)
    J_far = energy(p, far)
    if J_far > 0:
        raise GeometryViolated(f"far end has J = {J_far:.6g} > 0")
    rho, m = None, None
    if check_geometry:
        rho, m = check_origin_geometry(p, seed, rho_max=h1_norm(p, far))
        if not m > 0:
            raise GeometryViolated("origin is not a strict local minimum along sampled directions")
    u, status, it, trace, far = _ray_pass(p, far, tol, max_iter, n_path)
    res = _result(p, u, "MountainPass", it, trace, status, c_star, seed, "path",
                  ray_peak=None if ray is None else ray.peak,
                  eps=eps, geometry_rho=rho, geometry_min=m)
    if res.converged and not (res.energy > 0 and h1_norm(p, u) > 1e-3 * h1_norm(p, far)):
        res.status = "trivial"
    res.extra["below_threshold"] = bool(res.energy < c_star)
    return res


# ------------------------------------------------------------ two solutions


def _spectral_window(a, lam, N, rtol=1e-12):
    vals = []
    for e in ball_dirichlet_eigenvalues(N, 40):
        if not vals or e.value > vals[-1] * (1 + 1e-12):
            vals.append(e.value)
    if lam < a * vals[0] * (1 + rtol):
        raise UnsupportedCase(f"lambda = {lam:g} is not above a*lambda_1 = {a * vals[0]:g}")
    for k in range(len(vals) - 1):
        lo, hi = a * vals[k], a * vals[k + 1]
        if abs(lam - hi) <= rtol * hi:
            raise UnsupportedCase("lambda equals a*lambda_k: the sign-condition case "
                                  "is not supported")
        if lo < lam < hi:
            return k + 1, lo, hi
    raise UnsupportedCase("lambda beyond the computed part of the spectrum")


def two_solutions(p: ProblemSpec, tol: float = TOL, seed: int = 0, max_iter: int = 20_000,
                  n_path: int = 41, path_iter: int = 2000):
    """Two nontrivial critical points when J is coercive and a*lambda_k < lambda < a*lambda_{k+1}.

    Returns (first, second).  ``second.extra`` records how it was found
    (``second_source``) and whether it differs from the first up to sign.
    """
    reg = p.regime()
    if not reg.is_coercive:
        raise UnsupportedCase(f"two-solution search needs a coercive regime, got {reg.tag.value}")
    a = p.a
    if a <= 0:
        raise UnsupportedCase("two-solution search needs a > 0")
    k, lo, hi = _spectral_window(a, p.nonlin.lam, p.N)
    c_star = compactness_threshold(p.term, p.N)
    first, minima = minimize(p, tol=tol, seed=seed, max_iter=max_iter, c_star=c_star,
                             return_all=True)
    first.extra["spectral_window"] = {"k": k, "a_lambda_k": lo, "a_lambda_k1": hi}
    if not (first.converged and first.energy < 0):
        raise SecondSolutionNotFound("global minimizer with negative energy not found",
                                     first=first)
    attempts = []
    others = [m for m in minima if m is not first and distinct(p, m.u.values, first.u.values)]
    ends = [m.u.values for m in others[:1]] or [np.zeros(p.grid.M)]
    for B in ends:
        u, status, it, trace, path_max = _path_search(p, first.u.values, B, tol,
                                                       min(max_iter, path_iter), n_path)
        ok = status == "converged" and h1_norm(p, u) > 1e-3 * h1_norm(p, first.u.values)
        new = ok and all(distinct(p, u, s * w) for w in (first.u.values, B) for s in (1, -1)
                         if h1_norm(p, w) > 0)
        attempts.append({"status": status, "nontrivial": bool(ok), "new": bool(new),
                         "path_max": path_max})
        if new:
            second = _result(p, u, "Saddle", it, trace, status, c_star, seed, "path",
                             second_source="mountain-pass", path_max=path_max)
            second.extra["distinct_up_to_sign"] = True
            second.extra["saddle_attempts"] = attempts
            return first, second
    if others:
        m = others[0]
        m.kind = "LocalMin"
        m.extra["second_source"] = "second-basin"
        m.extra["distinct_up_to_sign"] = bool(distinct(p, m.u.values, -first.u.values))
        m.extra["saddle_attempts"] = attempts
        return first, m
    raise SecondSolutionNotFound("only one basin found and no saddle detected", first=first,
                                 attempts=attempts)
