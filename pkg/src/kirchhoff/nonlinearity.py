"""The odd power nonlinearity  f(t) = lam t + mu |t|^{2g-2} t + nu |t|^{q-2} t."""

from dataclasses import dataclass

import numpy as np

from .errors import BadParameters
from .sobolev import critical_exponent


@dataclass(frozen=True)
class PowerNonlinearity:
    lam: float = 0.0
    mu: float = 0.0
    gamma_f: float = 1.5
    nu: float = 0.0
    q: float = 3.0

    def validate(self, N):
        crit = critical_exponent(N)
        if min(self.lam, self.mu, self.nu) < 0:
            raise BadParameters("lambda, mu, nu must be >= 0")
        if self.mu > 0 and not (1.0 <= self.gamma_f and 2 * self.gamma_f < crit):
            raise BadParameters(
                f"mu-term needs 2 <= 2*gamma_f < 2* = {crit:g}, got gamma_f={self.gamma_f}")
        if self.nu > 0 and not (2.0 < self.q < crit):
            raise BadParameters(f"nu-term needs 2 < q < 2* = {crit:g}, got q={self.q}")
        return self

    def powers(self):
        """(coefficient, exponent) pairs of F(t) = sum c |t|^e."""
        out = []
        if self.lam:
            out.append((self.lam / 2.0, 2.0))
        if self.mu:
            out.append((self.mu / (2.0 * self.gamma_f), 2.0 * self.gamma_f))
        if self.nu:
            out.append((self.nu / self.q, self.q))
        return out

    def growth_exponent(self):
        """Smallest admissible p in |f(t)| <= c1 |t|^{p-1} + c2 (1 when f == 0)."""
        exps = [e for _, e in self.powers()]
        return max(exps) if exps else 1.0

    def pohozaev_powers(self, N):
        """(coefficient, exponent) pairs of F(t) - t f(t)/2*."""
        crit = critical_exponent(N)
        return [(c * (1.0 - e / crit), e) for c, e in self.powers()]

    def F(self, t):
        a = np.abs(t)
        out = np.zeros_like(a, dtype=float)
        for c, e in self.powers():
            out = out + c * a ** e
        return out

    def f(self, t):
        a = np.abs(t)
        out = np.zeros_like(a, dtype=float)
        for c, e in self.powers():
            out = out + c * e * a ** (e - 2.0) * t
        return out

    def df(self, t):
        a = np.abs(t)
        out = np.zeros_like(a, dtype=float)
        for c, e in self.powers():
            out = out + c * e * (e - 1.0) * a ** (e - 2.0)
        return out
