"""Dimension-dependent constants: critical exponent and sharp Sobolev constant."""

import math

from .errors import BadDimension

# exponents closer than this are treated as equal (e.g. gamma == 2*/2)
EXPONENT_TOL = 1e-12


def check_dimension(N):
    if int(N) != N or N < 3:
        raise BadDimension(f"dimension must be an integer >= 3, got {N!r}")
    return int(N)


def critical_exponent(N):
    """2* = 2N/(N-2)."""
    N = check_dimension(N)
    return 2.0 * N / (N - 2)


def critical_half(N):
    """2*/2 = N/(N-2), the critical power of the Dirichlet energy."""
    N = check_dimension(N)
    return N / (N - 2)


def sobolev_constant(N):
    """Sharp constant S of  |grad u|_2^2 >= S |u|_{2*}^2  in R^N.

    Closed form  S = pi N (N-2) (Gamma(N/2) / Gamma(N))^{2/N}.
    """
    N = check_dimension(N)
    return math.pi * N * (N - 2) * math.exp(
        (2.0 / N) * (math.lgamma(N / 2) - math.lgamma(N)))


def critical_coefficient(N):
    """S^{-2*/2}, the coefficient of t^{2*/2-1} separating the regimes."""
    return sobolev_constant(N) ** (-critical_half(N))


def sphere_area(N):
    """Surface area of the unit sphere in R^N."""
    N = check_dimension(N)
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)
