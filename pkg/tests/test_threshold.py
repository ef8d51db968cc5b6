import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kirchhoff.errors import BadDimension, ConditionA3Violated
from kirchhoff.nonlocal_term import make_power_sum, model_term
from kirchhoff.sobolev import critical_coefficient, critical_half
from kirchhoff.threshold import (admissible_set, closed_form_oracle, compactness_threshold,
                                 sobolev_constant, threshold_report, threshold_root)

# Rayleigh quotient of (1 + r^2)^{-(N-2)/2} on R^N by adaptive quadrature
BUBBLE_QUOTIENT = {3: 5.477904089531331, 4: 10.260398641294914, 6: 19.2594566654732}


@pytest.mark.parametrize("N", sorted(BUBBLE_QUOTIENT))
def test_sobolev_constant_against_bubble_quotient(N):
    assert sobolev_constant(N) == pytest.approx(BUBBLE_QUOTIENT[N], rel=1e-12)


def test_sobolev_constant_closed_forms():
    assert sobolev_constant(3) == pytest.approx(3 * (math.pi / 2) ** (4 / 3), rel=1e-14)
    assert sobolev_constant(4) == pytest.approx(8 * math.pi / math.sqrt(6), rel=1e-14)
    with pytest.raises(BadDimension):
        sobolev_constant(2)


def test_root_linear_h():
    S = sobolev_constant(4)
    assert threshold_root(make_power_sum([(1, 1)]), 4) == pytest.approx(S ** 2, rel=1e-12)


def test_root_borderline_N4():
    S = sobolev_constant(4)
    b = 0.3 * S ** -2
    assert threshold_root(model_term(1, b, 2), 4) == pytest.approx(1 / (S ** -2 - b), rel=1e-12)


def test_root_N3_quadratic():
    S = sobolev_constant(3)
    a, b = 1.3, 0.7
    t0 = (b * S ** 3 + math.sqrt(b * b * S ** 6 + 4 * a * S ** 3)) / 2
    assert threshold_root(model_term(a, b, 2), 3) == pytest.approx(t0, rel=1e-12)


def test_root_requires_decreasing_ratio():
    with pytest.raises(ConditionA3Violated):
        threshold_root(model_term(1, 1, 5), 3)


def test_admissible_set_shapes():
    S = sobolev_constant(4)
    I = admissible_set(model_term(1, 2, 2), 3)
    assert len(I.intervals) == 1 and math.isinf(I.intervals[0][1])
    assert admissible_set(model_term(1, 2 * S ** -2, 2), 4).empty
    assert admissible_set(make_power_sum([(S ** -2, 2)]), 4).intervals == ((0.0, math.inf),)
    # a = 0, gamma > 2*/2: I = (0, t2]
    lo, hi = admissible_set(make_power_sum([(1.0, 4.0)]), 3).intervals[0]
    assert lo == 0.0 and math.isfinite(hi)


def test_admissible_set_two_sided_interval():
    # N = 5, gamma = 3 with a small: rho dips below 1 on a bounded interval
    N = 5
    term = model_term(1e-3, 1e-3, 3.0)
    I = admissible_set(term, N)
    lo, hi = I.intervals[0]
    assert 0 < lo < hi < math.inf
    Sc, m = critical_coefficient(N), critical_half(N) - 1
    for t in (lo, hi):
        assert abs(float(term.h(t)) - Sc * t ** m) / max(float(term.h(t)), 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 5), st.floats(1, 4)), min_size=1, max_size=3),
       st.integers(3, 6))
def test_admissible_set_membership(pairs, N):
    term = make_power_sum(pairs)
    I = admissible_set(term, N)
    Sc, m = critical_coefficient(N), critical_half(N) - 1
    rng = np.random.default_rng(7)
    ts = np.exp(rng.uniform(-15, 15, 1000))
    for t in ts:
        lhs = float(term.h(t))
        rhs = Sc * t ** m
        near = any(abs(t - e) <= 1e-9 * max(e, 1e-300) for iv in I.intervals for e in iv
                   if 0 < e < math.inf)
        if near:
            continue
        assert I.contains(t) == (lhs <= rhs), (t, I)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10))
def test_oracle_N3_gamma2(a, b):
    c = compactness_threshold(model_term(a, b, 2), 3)
    assert c == pytest.approx(closed_form_oracle(3, a, b, 2), rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.001, 0.999))
def test_oracle_N4_borderline(a, frac):
    b = frac * sobolev_constant(4) ** -2
    c = compactness_threshold(model_term(a, b, 2), 4)
    assert c == pytest.approx(a * a / (4 * (sobolev_constant(4) ** -2 - b)), rel=1e-10)
    assert c == pytest.approx(closed_form_oracle(4, a, b, 2), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 0.99), st.integers(3, 8))
def test_oracle_borderline_general_N(a, frac, N):
    b = frac * critical_coefficient(N)
    gamma = critical_half(N)
    c = compactness_threshold(model_term(a, b, gamma), N)
    assert c == pytest.approx(closed_form_oracle(N, a, b, gamma), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 10), st.floats(1.0, 2.4), st.integers(3, 8))
def test_oracle_pure_power(b, frac, N):
    gamma = 1 + (critical_half(N) - 1) * frac / 2.5
    c = compactness_threshold(make_power_sum([(b, gamma)]), N)
    assert c == pytest.approx(closed_form_oracle(N, 0.0, b, gamma), rel=1e-10)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_b_zero_reduction(N):
    S = sobolev_constant(N)
    assert compactness_threshold(make_power_sum([(1, 1)]), N) == pytest.approx(
        S ** (N / 2) / N, rel=1e-12)


def test_oracle_N3_b_zero_consistent():
    S = sobolev_constant(3)
    assert closed_form_oracle(3, 1, 0, 2) == pytest.approx(S ** 1.5 / 3, rel=1e-14)
    assert (4 * S) ** 1.5 / 24 == pytest.approx(S ** 1.5 / 3, rel=1e-14)


def test_oracle_coercive_cases():
    S4 = sobolev_constant(4)
    assert closed_form_oracle(4, 1, 2 * S4 ** -2, 2) == math.inf
    S5 = sobolev_constant(5)
    b = 2 * math.sqrt(4 / 27 * S5 ** -5)
    assert closed_form_oracle(5, 1, b, 2) == math.inf
    assert compactness_threshold(model_term(1, b, 2), 5) == math.inf
    assert closed_form_oracle(5, 1, b / 4, 2) is None


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(1.01, 2.9), st.floats(1.01, 3))
def test_t0_monotone_in_coefficients(a, b, gamma, scale):
    N = 3
    t_small = threshold_root(model_term(a, b, gamma), N)
    assert threshold_root(model_term(a * scale, b, gamma), N) >= t_small * (1 - 1e-12)
    assert threshold_root(model_term(a, b * scale, gamma), N) >= t_small * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(1.01, 2.9))
def test_root_residual(a, b, gamma):
    N = 3
    term = model_term(a, b, gamma)
    t0 = threshold_root(term, N)
    S = sobolev_constant(N)
    assert float(term.h(t0)) * S ** 3 == pytest.approx(t0 ** 2, rel=1e-12)
    assert compactness_threshold(term, N) == pytest.approx(float(term.K(t0, N)), rel=1e-14)
    assert compactness_threshold(term, N) > 0


def test_report_fields_and_fallback():
    rep = threshold_report(model_term(1, 2, 2), 3)
    assert rep.shortcut_used and rep.margin < 1e-10
    d = rep.to_dict()
    assert d["regime"]["tag"] == "SubcriticalThreshold"
    coercive = threshold_report(model_term(1, 1, 2), 4)
    assert coercive.to_dict()["c_star"] == "inf"
    # gamma above 2*/2 with nonempty I: K not monotone, generic minimization path
    rep = threshold_report(model_term(1e-3, 1e-3, 3.0), 5)
    assert not rep.shortcut_used
    lo, hi = rep.I.intervals[0]
    assert rep.c_star <= min(float(model_term(1e-3, 1e-3, 3.0).K(t, 5)) for t in (lo, hi)) + 1e-12
