"""Closed-form sector inner products in adjustable precision.

On the symmetric sector {|z| < R, |arg z| < alpha*pi/2} every augmented-basis
member is a constant times a real power of z, so the area inner products
integrate in closed form:

    <z^p, z^q> = R^(p+q+2)/(p+q+2) * 2 sin((p-q) alpha pi / 2)/(p-q),

with the angular factor alpha*pi when p = q.  Corner-augmented bases on the
sector mix functions that binary64 cannot keep numerically independent (the
high-exponent corner terms agree with polynomials to more digits than the
machine carries), while the published convergence rows reach 1e-11 and below.
This module reproduces those rows by assembling the exact Gram in mpmath,
taking its nested Cholesky factor in the singular-functions-first order, and
reading every per-size kernel value off one forward substitution.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import numpy as np

__all__ = ["SectorExactSweep"]


def _angular(diff, alpha_pi):
    if diff == 0:
        return alpha_pi
    d = mp.mpf(diff) if not isinstance(diff, mp.mpf) else diff
    return 2 * mp.sin(d * alpha_pi / 2) / d


class SectorExactSweep:
    """Exact-arithmetic kernel errors for a corner-augmented sector basis.

    Generators are the corner functions gamma * z^(gamma - 1) (exponents from
    the corner stream, integers skipped) followed by the monomial derivatives
    j * z^(j-1).  All kernel moments come from the reproducing property.
    """

    def __init__(self, alpha: Fraction, gammas, n_monomials: int,
                 radius: float = 2.0, z0: float = 1.0, dps: int = 160):
        self.alpha = Fraction(alpha)
        self.gammas = [Fraction(g) for g in gammas]
        self.n_monomials = n_monomials
        self.n_singular = len(self.gammas)
        self.dps = dps
        with mp.workdps(dps):
            R = mp.mpf(radius)
            self.z0 = mp.mpf(z0)
            alpha_pi = mp.pi * mp.mpf(self.alpha.numerator) / self.alpha.denominator
            # generator exponents p_i and coefficients c_i (member = c z^p)
            exps = [mp.mpf(g.numerator) / g.denominator - 1 for g in self.gammas]
            coefs = [mp.mpf(g.numerator) / g.denominator for g in self.gammas]
            exps += [mp.mpf(j - 1) for j in range(1, n_monomials + 1)]
            coefs += [mp.mpf(j) for j in range(1, n_monomials + 1)]
            M = len(exps)

            def pair(i, j):
                p, q = exps[i], exps[j]
                return (coefs[i] * coefs[j] * R ** (p + q + 2) / (p + q + 2)
                        * _angular(p - q, alpha_pi))

            norms = [mp.sqrt(pair(i, i)) for i in range(M)]
            A = mp.matrix(M)
            for i in range(M):
                for j in range(i + 1):
                    A[i, j] = A[j, i] = pair(i, j) / (norms[i] * norms[j])
            L = mp.cholesky(A)
            moments = mp.matrix([coefs[i] * self.z0 ** exps[i] / norms[i]
                                 for i in range(M)])
            y = mp.matrix(M, 1)
            for i in range(M):
                acc = moments[i]
                for j in range(i):
                    acc -= L[i, j] * y[j]
                y[i] = acc / L[i, i]
            self._L = L
            self._y = y
            self._norms = norms
            self._exps = exps
            self._coefs = coefs
            four = R ** (2 / mp.mpf(self.alpha.numerator) * self.alpha.denominator)
            af = mp.mpf(self.alpha.numerator) / self.alpha.denominator
            self.kernel_exact = ((four + 1) / (2 * af * (four - 1))) ** 2 / mp.pi

    def member_values_at_z0(self) -> np.ndarray:
        """|P~_i(z0)| in the singular-first member order (exact flag)."""
        with mp.workdps(self.dps):
            return np.array([float(abs(v)) for v in self._y])

    def kernel_at_size(self, size: int) -> float:
        with mp.workdps(self.dps):
            return float(mp.fsum(self._y[i] ** 2 for i in range(size)))

    def error_l2(self, n: int) -> float:
        """Kernel error of pi~_n: singular block plus n - 1 monomials."""
        size = self.n_singular + max(n - 1, 0)
        with mp.workdps(self.dps):
            total = mp.fsum(self._y[i] ** 2 for i in range(min(size, len(self._y))))
            return float(mp.sqrt(max(self.kernel_exact - total, mp.mpf(0))))

    def map_coefficients(self, n: int):
        """Exact expansion of pi~_n over the raw generators (and its kernel value).

        Returns (coeffs over [corner terms, monomials], K~ value); the map is
        sum_i coeffs_i * mu_i(z) with mu_i = (c_i/(p_i+1)) (z^(p_i+1) - z0^(p_i+1)).
        """
        size = self.n_singular + max(n - 1, 0)
        with mp.workdps(self.dps):
            kval = mp.fsum(self._y[i] ** 2 for i in range(size))
            # back substitution on the leading Cholesky block
            x = mp.matrix(size, 1)
            for i in range(size - 1, -1, -1):
                acc = self._y[i]
                for j in range(i + 1, size):
                    acc -= self._L[j, i] * x[j]
                x[i] = acc / self._L[i, i]
            coeffs = [x[i] / self._norms[i] for i in range(size)]
            return coeffs, kval

    def map_values(self, n: int, points: np.ndarray) -> np.ndarray:
        """pi~_n evaluated at complex points (exact coefficients, mp summation)."""
        coeffs, kval = self.map_coefficients(n)
        size = len(coeffs)
        with mp.workdps(self.dps):
            out = np.empty(len(points), dtype=complex)
            z0 = self.z0
            for ip, zp in enumerate(points):
                z = mp.mpc(zp)
                acc = mp.mpc(0)
                for i in range(size):
                    p1 = self._exps[i] + 1
                    mu = (self._coefs[i] / p1) * (z ** p1 - z0 ** p1)
                    acc += coeffs[i] * mu
                out[ip] = complex(acc / kval)
            return out
