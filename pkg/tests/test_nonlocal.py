import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from kirchhoff.errors import BadExponent, EmptyTerm, MissingEigenvalue, NegativeArgument
from kirchhoff.nonlinearity import PowerNonlinearity
from kirchhoff.nonlocal_term import (RegimeTag, Status, check_conditions, classify_regime,
                                     evaluate, make_power_sum, model_term, coercivity_predicate,
                                     coercivity_sides)
from kirchhoff.sobolev import critical_coefficient, critical_half, sobolev_constant

coef = st.floats(0.01, 10.0)
expo = st.floats(1.0, 6.0)
terms = st.lists(st.tuples(coef, expo), min_size=1, max_size=4)
dims = st.integers(3, 8)


def test_make_power_sum_basic():
    t = make_power_sum([(1, 1), (2, 2)])
    assert t.terms == ((1.0, 1.0), (2.0, 2.0))
    assert float(t.h(3.0)) == 7.0


def test_make_power_sum_merges_and_sorts():
    assert make_power_sum([(1, 2), (3, 2)]).terms == ((4.0, 2.0),)
    assert make_power_sum([(1, 3), (2, 1)]).terms == ((2.0, 1.0), (1.0, 3.0))


def test_make_power_sum_errors():
    with pytest.raises(EmptyTerm):
        make_power_sum([(0, 1)])
    with pytest.raises(EmptyTerm):
        make_power_sum([])
    with pytest.raises(BadExponent):
        make_power_sum([(1, 0.5)])


def test_evaluate_at_zero():
    v = evaluate(model_term(1.5, 2.0, 2.5), 0.0, 3)
    assert (v.h, v.H, v.K) == (1.5, 0.0, 0.0)


def test_evaluate_linear_h_gives_t_over_N():
    v = evaluate(model_term(1.0, 0.0, 3.0), 5.0, 4)
    assert v.K == pytest.approx(5.0 / 4.0, rel=1e-15)


def test_evaluate_model_case_values():
    # frozen from the per-term form a t/N + (1/(2 gamma) - 1/2*) b t^gamma
    v = evaluate(model_term(1.0, 2.0, 2.0), 3.0, 4)
    assert v.h == pytest.approx(7.0, rel=1e-15)
    assert v.H == pytest.approx(12.0, rel=1e-15)
    assert v.K == pytest.approx(0.75, rel=1e-14)


def test_evaluate_rejects_negative():
    with pytest.raises(NegativeArgument):
        evaluate(model_term(1, 1, 2), -1.0, 3)


@settings(max_examples=60, deadline=None)
@given(terms, dims, st.floats(0.0, 1e3))
def test_two_K_formulas_agree(pairs, N, t):
    # evaluate raises if the two forms differ beyond 1e-13 relative
    v = evaluate(make_power_sum(pairs), t, N)
    assert math.isfinite(v.K)


@settings(max_examples=40, deadline=None)
@given(terms, dims)
def test_H_is_primitive_of_h(pairs, N):
    term = make_power_sum(pairs)
    rng = np.random.default_rng(len(pairs) * 31 + N)
    for t in rng.uniform(1e-2, 100.0, 50):
        dt = 1e-6 * t
        fd = (term.H(t + dt) - term.H(t - dt)) / (2 * dt)
        assert fd == pytest.approx(float(term.h(t)), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(terms, dims)
def test_nonnegative_K_coefficients_give_superadditivity(pairs, N):
    term = make_power_sum(pairs)
    if np.any(term.k_coefficients(N) < 0):
        return
    t = np.logspace(-4, 4, 20)
    t1, t2 = np.meshgrid(t, t)
    lhs = term.K(t1 + t2, N)
    assert np.all(lhs >= term.K(t1, N) + term.K(t2, N) - 1e-12 * (1 + np.abs(lhs)))


def _numeric_min_positive(a, b, gamma, N):
    """Direct oracle: min over t > 0 of h - S^{-2*/2} t^{2*/2-1} in log t."""
    Sc = critical_coefficient(N)
    m = critical_half(N) - 1
    g = lambda s: (a + b * math.exp((gamma - 1) * s)) * math.exp(-m * s) - Sc
    grid = np.linspace(-60, 60, 4001)
    vals = [g(s) for s in grid]
    k = int(np.argmin(vals))
    res = minimize_scalar(g, bounds=(grid[max(k - 1, 0)], grid[min(k + 1, 4000)]),
                          method="bounded", options={"xatol": 1e-12})
    return min(res.fun, vals[k]) > 0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.05, 3.0), dims)
def test_classify_matches_closed_form_inequality(a, b, dg, N):
    gamma = critical_half(N) + dg
    lhs, rhs = coercivity_sides(a, b, gamma, N)
    if abs(lhs / rhs - 1) < 1e-6:
        return
    coercive = classify_regime(model_term(a, b, gamma), N).tag is RegimeTag.COERCIVE
    assert coercive == coercivity_predicate(a, b, gamma, N)
    assert coercive == _numeric_min_positive(a, b, gamma, N)


def test_classify_examples():
    S4 = sobolev_constant(4)
    assert classify_regime(model_term(1, 1, 2), 3).tag is RegimeTag.SUBCRITICAL_THRESHOLD
    assert classify_regime(model_term(1, 2 / S4 ** 2, 2), 4).tag is RegimeTag.COERCIVE
    assert classify_regime(model_term(1, 0.5 / S4 ** 2, 2), 4).tag is RegimeTag.BORDERLINE_THRESHOLD
    assert classify_regime(model_term(1, 1 / S4 ** 2, 2), 4).tag is RegimeTag.BORDERLINE_CRITICAL
    assert classify_regime(model_term(0, 1 / S4 ** 2, 2), 4).tag is RegimeTag.UNCLASSIFIED


def test_critical_case_N5_remark_form():
    # h = a + b t, N = 5: a^{N-4} b^2 > 4 (N-4)^{N-4} / (N-2)^{N-2} S^{-N}
    N, S = 5, sobolev_constant(5)
    rhs = 4 * 1 / 3 ** 3 * S ** (-N)
    for a, b in [(1.0, 1e-3), (2.0, 5e-4), (0.3, 2e-3)]:
        assert coercivity_predicate(a, b, 2.0, N) == (a * b * b > rhs)


def test_conditions_model_threshold_case():
    lam1 = math.pi ** 2
    rep = check_conditions(model_term(1, 2, 2), PowerNonlinearity(lam=5.0), 3, {1.0: lam1})
    assert rep.a1 is Status.HOLDS
    assert rep.a2 is Status.HOLDS
    assert rep.a3 is Status.HOLDS
    assert 0 <= rep.a3_limit < critical_coefficient(3)
    alpha, gamma, mu = rep.a1_witness[0]
    assert (alpha, gamma) == (pytest.approx(1 / 3), 1.0)
    assert mu == pytest.approx(5.0)


def test_conditions_lambda_above_eigenvalue_fails():
    rep = check_conditions(model_term(1, 2, 2), PowerNonlinearity(lam=12.0), 3,
                           {1.0: math.pi ** 2})
    assert rep.a1 is Status.FAILS


def test_conditions_a4_clause_ii():
    b = 2 * critical_coefficient(4)
    rep = check_conditions(make_power_sum([(b, 2)]), PowerNonlinearity(), 4, {})
    assert rep.a4 is Status.HOLDS and rep.a4_clause == "ii"
    assert rep.a3 is Status.FAILS


def test_conditions_a4_clause_i():
    Sc = critical_coefficient(4)
    # h = 1 + S^{-2} t covers S^{-2} t + eta t^{gamma-1} with gamma = 1 > p/2 fails,
    # but h = t^{0.5} + S^{-2} t gives gamma = 1.5 in (p/2, 2) for p = 2
    rep = check_conditions(make_power_sum([(1.0, 1.5), (Sc, 2.0)]), PowerNonlinearity(lam=1.0),
                           4, {1.5: 100.0, 1.0: 14.68})
    assert rep.a4 is Status.HOLDS and rep.a4_clause == "i"


def test_conditions_a4_clause_iii():
    Sc = critical_coefficient(4)
    rep = check_conditions(make_power_sum([(Sc, 2.0), (1.0, 3.0)]), PowerNonlinearity(), 4, {})
    assert rep.a4 is Status.HOLDS and rep.a4_clause == "iii"


def test_conditions_young_split_between_exponents():
    # K = t/3 + t^2/6 on N = 3 so F - tf/2* = c |t|^3 sits between |t|^2 and |t|^4
    nl = PowerNonlinearity(nu=0.01, q=3.0)
    rep = check_conditions(model_term(1, 2, 2), nl, 3, {1.0: math.pi ** 2, 2.0: 50.0})
    assert rep.a1 is Status.HOLDS
    big = PowerNonlinearity(nu=1e3, q=3.0)
    rep = check_conditions(model_term(1, 2, 2), big, 3, {1.0: math.pi ** 2, 2.0: 50.0})
    assert rep.a1 is Status.UNDECIDABLE


def test_conditions_missing_eigenvalue():
    with pytest.raises(MissingEigenvalue):
        check_conditions(model_term(1, 2, 2), PowerNonlinearity(lam=1.0), 3, {})


def test_conditions_a2_negative_coefficients_detected():
    # gamma > 2*/2 gives a negative K coefficient; K(2t) < 2K(t) for large t
    rep = check_conditions(model_term(1, 1, 5), PowerNonlinearity(), 3, {})
    assert rep.a2 is Status.FAILS


@settings(max_examples=60, deadline=None)
@given(terms, dims)
def test_a4_implies_empty_admissible_set(pairs, N):
    from kirchhoff.threshold import admissible_set
    term = make_power_sum(pairs)
    rep = check_conditions(term, PowerNonlinearity(), N, {})
    if rep.a4 is Status.HOLDS:
        assert admissible_set(term, N).empty
