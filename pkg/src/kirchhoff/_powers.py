"""Infimum of generalized polynomials  sum_i c_i t^{e_i}  over t > 0."""

import math

import numpy as np
from scipy.optimize import minimize_scalar

LOG_T_MIN = math.log(1e-8)
LOG_T_MAX = math.log(1e8)


def merge_powers(coeffs, exps, tol=1e-12):
    """Combine equal exponents and drop zero coefficients; sorted by exponent."""
    out = []
    for e, c in sorted(zip(exps, coeffs)):
        if out and abs(out[-1][0] - e) <= tol:
            out[-1][1] += c
        else:
            out.append([e, c])
    return [(e, c) for e, c in out if c != 0.0]


def evaluate_powers(terms, s):
    """sum c e^{e s} at log-argument(s) s."""
    s = np.asarray(s, dtype=float)
    total = np.zeros_like(s)
    with np.errstate(over="ignore"):
        for e, c in terms:
            total = total + c * np.exp(e * s)
    return total


def _limit(terms, at_zero):
    e, c = terms[0] if at_zero else terms[-1]
    grows = e < 0 if at_zero else e > 0
    if grows:
        return math.copysign(math.inf, c)
    if e == 0:
        return c
    return 0.0


def powers_inf(coeffs, exps, log_lo=LOG_T_MIN, log_hi=LOG_T_MAX, points=2001):
    """Infimum over t > 0 of sum c_i t^{e_i}.

    Returns ``(value, t_star)`` where ``t_star`` is the minimizing t, or
    0.0 / inf when the infimum is the limit at that end.  Limits at both
    ends come from the extreme exponents; the interior minimum is located
    on a logarithmic grid and refined with a bounded Brent search.
    """
    terms = merge_powers(coeffs, exps)
    if not terms:
        return 0.0, 1.0
    lim0 = _limit(terms, at_zero=True)
    liminf = _limit(terms, at_zero=False)

    # widen the window while the grid minimum sits on an edge
    s_cap = 700.0 / max(abs(e) for e, _ in terms) if any(e for e, _ in terms) else LOG_T_MAX
    while True:
        s = np.linspace(log_lo, log_hi, points)
        vals = evaluate_powers(terms, s)
        k = int(np.argmin(vals))
        if k == 0 and lim0 > vals[0] and -log_lo < s_cap:
            log_lo = max(2.0 * log_lo, -s_cap)
        elif k == points - 1 and liminf > vals[-1] and log_hi < s_cap:
            log_hi = min(2.0 * log_hi, s_cap)
        else:
            break
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, points - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: float(evaluate_powers(terms, x)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        s_best, v_best = float(res.x), float(res.fun)
        if vals[k] < v_best:
            s_best, v_best = float(s[k]), float(vals[k])
    else:
        s_best, v_best = float(s[k]), float(vals[k])

    best = (v_best, math.exp(s_best))
    if lim0 <= best[0]:
        best = (lim0, 0.0)
    if liminf < best[0]:
        best = (liminf, math.inf)
    return best
