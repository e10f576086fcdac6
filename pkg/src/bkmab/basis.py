"""Augmented basis of pole, corner and monomial derivative functions.

The system consists of derivatives of rational pole terms (z - z_j)^(-k/m),
of corner terms (z - tau)^gamma drawn from the corner's exponent stream, and
of plain monomials, ordered poles first, then corner functions per corner in
increasing exponent, then monomials.  Every member carries a closed-form
antiderivative vanishing at the normalization point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import JordanBoundary

__all__ = [
    "BasisError",
    "PoleSpec",
    "CornerSpec",
    "BasisSpec",
    "BasisFunction",
    "lehman_exponents",
    "assemble_basis",
    "eval_eta",
    "eval_mu",
    "predicted_rates",
]

INTEGER_TOL = 1e-12


class BasisError(ValueError):
    """Raised for invalid basis specifications."""


@dataclass(frozen=True)
class PoleSpec:
    """Pole-type singular function [(z - location)^(-k/m)]'."""

    location: complex
    k: int = 1
    m: int = 1
    cut_angle: float | None = None  # branch-cut ray direction, used when m > 1

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise BasisError("pole orders k, m must be >= 1")


@dataclass(frozen=True)
class CornerSpec:
    """Request for `count` corner singular functions at one boundary corner."""

    corner_index: int
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise BasisError("corner function count must be >= 0")


@dataclass(frozen=True)
class BasisSpec:
    poles: tuple = ()
    corners: tuple = ()
    n_monomials: int = 0

    def total_size(self) -> int:
        return len(self.poles) + sum(c.count for c in self.corners) + self.n_monomials


@dataclass(frozen=True)
class BasisFunction:
    """One member eta_j of the augmented system with antiderivative mu_j."""

    kind: str  # 'monomial', 'pole' or 'corner'
    degree: int = 0  # monomial: eta = (z^degree)'
    pole: PoleSpec | None = None
    vertex: complex = 0j
    gamma: float = 0.0
    cut_angle: float = np.pi

    def label(self) -> str:
        if self.kind == "monomial":
            return f"(z^{self.degree})'"
        if self.kind == "pole":
            p = self.pole
            expo = f"-{p.k}" if p.m == 1 else f"-{p.k}/{p.m}"
            return f"[(z-({p.location:.6g}))^{expo}]'"
        return f"[(z-({self.vertex:.6g}))^{self.gamma:.6g}]'"


def _cut_power(w, exponent: float, cut_angle: float):
    """w^exponent with the branch cut along the ray at angle `cut_angle`."""
    w = np.asarray(w, dtype=complex)
    ang = np.angle(w * np.exp(-1j * (cut_angle + np.pi))) + cut_angle + np.pi
    return np.exp(exponent * (np.log(np.abs(w)) + 1j * ang))


def eval_eta(f: BasisFunction, z):
    """Evaluate the basis function eta at z (vectorized)."""
    z = np.asarray(z, dtype=complex)
    if f.kind == "monomial":
        j = f.degree
        return j * z ** (j - 1) if j != 1 else np.ones_like(z)
    if f.kind == "pole":
        p = f.pole
        expo = -p.k / p.m
        if p.m == 1:
            return expo * (z - p.location) ** (expo - 1)
        return expo * _cut_power(z - p.location, expo - 1, p.cut_angle)
    return f.gamma * _cut_power(z - f.vertex, f.gamma - 1.0, f.cut_angle)


def eval_mu(f: BasisFunction, z, z0: complex):
    """Antiderivative mu(z) = integral of eta from z0 to z, in closed form."""
    z = np.asarray(z, dtype=complex)
    if f.kind == "monomial":
        return z ** f.degree - z0 ** f.degree
    if f.kind == "pole":
        p = f.pole
        expo = -p.k / p.m
        if p.m == 1:
            return (z - p.location) ** expo - (z0 - p.location) ** expo
        return (_cut_power(z - p.location, expo, p.cut_angle)
                - _cut_power(np.asarray(z0, dtype=complex) - p.location, expo, p.cut_angle))
    return (_cut_power(z - f.vertex, f.gamma, f.cut_angle)
            - _cut_power(np.asarray(z0, dtype=complex) - f.vertex, f.gamma, f.cut_angle))


def lehman_exponents(kind: str, alpha: float, count: int) -> list:
    """First `count` exponents of the corner expansion of the mapping function.

    Corners formed by two straight lines carry the stream j/alpha; corners with
    irrational opening or involving circular arcs carry the increasing
    arrangement of {p + q/alpha : p >= 0, q >= 1}, deduplicated.  Logarithmic
    terms are assumed absent throughout.
    """
    if not (0.0 < alpha < 2.0):
        raise BasisError("corner opening fraction must lie in (0, 2)")
    if count <= 0:
        return []
    if kind == "straight-straight":
        return [j / alpha for j in range(1, count + 1)]
    if kind != "general":
        raise BasisError(f"unknown corner kind {kind!r}")
    qmax = count + 2
    pmax = int(np.ceil(count + count / alpha)) + 2
    raw = sorted(p + q / alpha for p in range(pmax + 1) for q in range(1, qmax + 1))
    out = []
    for g in raw:
        if not out or g - out[-1] > INTEGER_TOL:
            out.append(g)
        if len(out) == count:
            break
    return out


def _is_integer(x: float) -> bool:
    return abs(x - round(x)) < INTEGER_TOL


def corner_exponents_skipping_integers(kind: str, alpha: float, count: int) -> list:
    """First `count` non-integer exponents of the stream (integer ones omitted)."""
    take, found = count, []
    over = 0
    while len(found) < count:
        stream = lehman_exponents(kind, alpha, take + over)
        found = [g for g in stream if not _is_integer(g)]
        over += count + 4
    return found[:count]


def assemble_basis(spec: BasisSpec, boundary: JordanBoundary) -> list:
    """Ordered augmented system: poles, then corner functions, then monomials.

    Corner exponents that are integers are skipped and backfilled so exactly
    `count` singular functions per corner are emitted.  Poles must be strictly
    exterior; branch-cut rays (poles with m > 1, corner cuts) must not meet
    the closed domain.
    """
    out = []
    diam = boundary.diameter()
    for p in spec.poles:
        if boundary.contains(p.location):
            raise BasisError(f"pole at {p.location} lies inside the domain")
        dist = boundary.distance_to_boundary(p.location)
        if dist <= 1e-12 * diam:
            raise BasisError(f"pole at {p.location} touches the boundary")
        cut = p.cut_angle
        if p.m > 1:
            if cut is None:
                cut = float(np.angle(p.location - boundary.z0))
            _check_cut_ray(boundary, p.location, cut, diam)
            p = PoleSpec(location=p.location, k=p.k, m=p.m, cut_angle=cut)
        out.append(BasisFunction(kind="pole", pole=p))
    for cs in spec.corners:
        corner = boundary.corners[cs.corner_index]
        if corner.special and cs.count > 0:
            raise BasisError(f"corner {cs.corner_index} is special; no singular functions apply")
        cut = boundary.corner_exterior_bisector(cs.corner_index)
        gammas = corner_exponents_skipping_integers(
            "straight-straight" if corner.kind == "straight-straight" else "general",
            corner.alpha, cs.count)
        for g in gammas:
            out.append(BasisFunction(kind="corner", vertex=corner.vertex, gamma=g,
                                     cut_angle=cut))
    for j in range(1, spec.n_monomials + 1):
        out.append(BasisFunction(kind="monomial", degree=j))
    return out


def _check_cut_ray(boundary: JordanBoundary, origin: complex, angle: float, diam: float):
    ray = origin + np.exp(1j * angle) * np.linspace(1e-6 * diam, 4 * diam, 60)
    for z in ray:
        if boundary.contains(complex(z)):
            raise BasisError(
                f"branch cut from {origin} at angle {angle:.4g} meets the domain")


def predicted_rates(corner_alphas: list, corner_kinds: list, corner_counts: list,
                    levels: list | None = None, n_covered_poles: int = 0) -> dict:
    """Theoretical convergence exponents for a basis on a given geometry.

    corner_alphas are the opening fractions of the non-special corners, as
    Fractions for exact arithmetic; corner_counts the number of singular
    functions used per corner.  `levels` is the sorted singularity catalog
    [(location, level)]; the first `n_covered_poles` entries are cancelled by
    pole basis functions, so rho = |Phi| of the next one.

    Returns s (plain algebraic rate), s_star (augmented rate through the first
    unused non-integer exponent), sigma_plain and sigma_aug (decay exponents
    of the orthonormal member values at z0), and rho.
    """
    out = {}
    if corner_alphas:
        alphas = [Fraction(a) if not isinstance(a, Fraction) else a for a in corner_alphas]
        s_vals = [(2 - a) / a for a in alphas]
        out["s"] = min(s_vals)
        a0 = alphas[s_vals.index(out["s"])]
        out["sigma_plain"] = (2 - a0) / a0 + Fraction(1, 2)
        out["sigma_aug"] = 2 * (2 - a0) / a0 + Fraction(1, 2)
        out["s_star"] = min((2 - a) * _first_unused_noninteger(kind, a, used)
                            for a, kind, used in zip(alphas, corner_kinds, corner_counts))
    if levels:
        out["rho"] = levels[n_covered_poles][1] if n_covered_poles < len(levels) else None
    return out


def _first_unused_noninteger(kind: str, alpha: Fraction, used: int) -> Fraction:
    """gamma_nu with nu = min{ j > used : gamma_j not an integer }, exact."""
    if kind == "straight-straight":
        stream = (Fraction(j) / alpha for j in range(1, 1000000))
    else:
        qmax = 4 * (used + 4)
        stream = iter(sorted({Fraction(p) + Fraction(q) / alpha
                              for p in range(qmax) for q in range(1, qmax)}))
    skipped = 0
    for g in stream:
        if g.denominator > 1:
            skipped += 1
            if skipped == used + 1:
                return g
    raise BasisError("exponent stream exhausted")
