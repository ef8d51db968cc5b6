import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kirchhoff.errors import BadParameters, GridMismatch, GridTooCoarse
from kirchhoff.mesh import (Field, bubble, bubble_asymptotics, build_radial_grid, dirichlet_energy,
                            expected_rates, fit_log_power_law, fit_power_law, lp_norm)
from kirchhoff.sobolev import critical_exponent, sobolev_constant, sphere_area


@pytest.mark.parametrize("N,M,grading", [(3, 256, 1.0), (4, 512, 2.0), (5, 64, 3.0)])
def test_moments_exact(N, M, grading):
    g = build_radial_grid(N, M, grading)
    area = sphere_area(N)
    for k in range(6):
        exact = area / (N + k)
        assert g.integrate(g.gauss_radii ** k) == pytest.approx(exact, rel=1e-10)
        if k <= 2:
            # nodal weights of int_0^1 . r^{N-1} dr
            assert float(g.quad_weights @ g.nodes ** k) == pytest.approx(1 / (N + k), rel=1e-10)


def test_quad_weights_positive():
    for N in (3, 4, 6):
        assert np.all(build_radial_grid(N, 128).quad_weights > 0)


def test_node_floor_and_grading():
    with pytest.raises(BadParameters):
        build_radial_grid(3, 32)
    with pytest.raises(BadParameters):
        build_radial_grid(3, 128, grading=0.0)
    g = build_radial_grid(3, 128, grading=2.0)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert np.all(np.diff(g.widths) > 0)


def test_field_boundary_and_finite():
    g = build_radial_grid(3, 64)
    f = Field.from_function(g, lambda r: 1 - r ** 2)
    assert f.full[-1] == 0.0
    with pytest.raises(BadParameters):
        Field(g, np.full(g.M, np.nan))
    with pytest.raises(GridMismatch):
        Field(g, np.zeros(g.M + 1))


def test_zero_field():
    g = build_radial_grid(4, 128)
    z = np.zeros(g.M)
    assert dirichlet_energy(g, z) == 0.0
    assert lp_norm(g, z, 2.0) == 0.0


def test_dirichlet_energy_parabola():
    # int_B |grad(1 - r^2)|^2 = 16 pi / 5 in R^3
    g = build_radial_grid(3, 1024)
    u = Field.from_function(g, lambda r: 1 - r ** 2)
    assert dirichlet_energy(g, u) == pytest.approx(16 * math.pi / 5, rel=1e-5)


def test_first_eigenfunction_quotient():
    g = build_radial_grid(3, 1024)
    u = Field.from_function(g, lambda r: np.sinc(r))
    assert dirichlet_energy(g, u) / lp_norm(g, u, 2) ** 2 == pytest.approx(math.pi ** 2, rel=1e-5)


def test_refinement_stability():
    fun = lambda r: np.cos(0.5 * math.pi * r) * (1 + r)
    e1 = dirichlet_energy(build_radial_grid(4, 512), Field.from_function(build_radial_grid(4, 512), fun))
    g2 = build_radial_grid(4, 1024)
    e2 = dirichlet_energy(g2, Field.from_function(g2, fun))
    assert abs(e2 - e1) / e2 < 1e-3


def test_field_csv_roundtrip(tmp_path):
    g = build_radial_grid(3, 64)
    f = Field.from_function(g, lambda r: np.cos(r))
    f.to_csv(tmp_path / "f.csv")
    assert np.array_equal(Field.from_csv(g, tmp_path / "f.csv").values, f.values)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 5), st.floats(1e-3, 5e-2))
def test_bubble_normalized_and_above_S(N, eps):
    g = build_radial_grid(N, 1024)
    b = bubble(g, eps)
    assert lp_norm(g, b.v, critical_exponent(N)) == pytest.approx(1.0, rel=1e-10)
    assert b.grad_sq >= sobolev_constant(N)


def test_bubble_rejects_unresolved_scale():
    with pytest.raises(GridTooCoarse):
        bubble(build_radial_grid(3, 64, grading=1.0), 1e-8)
    with pytest.raises(BadParameters):
        bubble(build_radial_grid(3, 256), -1.0)


def test_power_fits_recover_exponents():
    eps = np.logspace(-2, -4, 5)
    assert fit_power_law(eps, 3 * eps ** 0.7).exponent == pytest.approx(0.7, rel=1e-10)
    fit = fit_log_power_law(eps, eps * (2 * np.abs(np.log(eps)) + 1))
    assert fit.exponent == pytest.approx(1.0, rel=1e-6)
    assert fit.log_coefficient == pytest.approx(2.0, rel=1e-5)


def test_expected_rates():
    assert expected_rates(3, 3) == (0.5, 0.75, True)
    assert expected_rates(4, 2)[2] is True
    grad, q_exp, log_case = expected_rates(4, 3)
    assert (grad, q_exp, log_case) == (1.0, 0.5, False)


@pytest.mark.slow
def test_bubble_asymptotics_nonlog_case():
    ba = bubble_asymptotics(4, 3, M=4096)
    assert ba.grad_fit.exponent == pytest.approx(1.0, rel=0.1)
    assert ba.q_fit.exponent == pytest.approx(0.5, rel=0.1)
    assert not ba.log_detected
