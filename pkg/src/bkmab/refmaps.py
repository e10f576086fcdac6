"""Exact reference maps, kernels and singularity catalogs for benchmark domains.

Covers lens domains with rational opening (two circular arcs through +-i),
symmetric circular sectors of radius 2, and disks.  Each case provides the
normalized interior map f0 (f0(z0) = 0, f0'(z0) = 1) with its analytic
derivative, the exact kernel value K(z0, z0), the exterior map modulus
|Phi(z)| on the complement, and the catalog of nearest singularities of f0
with their level-curve indices.

The lens exterior modulus follows the Moebius/power/Moebius composition with
the stated branch windows.  For sectors the exterior map is evaluated through
an elementary strip-domain Schwarz-Christoffel construction valid for every
opening fraction in (0, 2): in log coordinates the upper half of the sector
exterior is an L-shaped strip, whose half-plane map integrates in closed form;
the half-plane is then carried onto the exterior half-disk by the inverse
Joukowski map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basis import PoleSpec
from .geometry import JordanBoundary, build_disk, build_lens, build_sector

__all__ = [
    "ReferenceError",
    "SingularityEntry",
    "ReferenceCase",
    "reference_case",
    "exterior_level",
    "normalize_map",
    "CASE_NAMES",
]

CASE_NAMES = ("disk", "lens-i", "lens-ii", "lens-iii", "halfdisk",
              "sector-3/2", "sector-2/5", "sector-3/4", "sector-4/5")


class ReferenceError(ValueError):
    """Raised for unknown cases or evaluation outside a map's domain."""


@dataclass(frozen=True)
class SingularityEntry:
    location: complex
    level: float  # |Phi(location)|
    k: int = 1
    m: int = 1


@dataclass(frozen=True)
class CornerData:
    corner_index: int
    alpha: Fraction
    kind: str  # 'straight-straight' or 'general'
    special: bool


@dataclass
class ReferenceCase:
    name: str
    boundary: JordanBoundary
    f0: object
    f0_prime: object
    kernel_value: float  # exact K(z0, z0)
    radius: float  # exact conformal radius r0
    level_fn: object
    catalog: list
    corner_data: list
    canonical_poles: tuple = ()
    canonical_corner_counts: dict = field(default_factory=dict)

    @property
    def z0(self) -> complex:
        return self.boundary.z0


def normalize_map(g, z0: complex, scale: float = 1.0):
    """Normalize a conformal map with g(z0) = 0 so the derivative at z0 is 1.

    The derivative is computed by fourth-order central differencing; the
    normalized map g/g'(z0) is the unique map satisfying both conditions.
    Returns (normalized callable, derivative value).
    """
    h = 1e-3 * scale
    d = (8.0 * (g(z0 + h) - g(z0 - h)) - (g(z0 + 2 * h) - g(z0 - 2 * h))) / (12.0 * h)
    d = complex(d)
    if abs(d) < 1e-13:
        raise ReferenceError("map derivative at z0 is numerically zero")

    def normalized(z):
        return g(z) / d

    return normalized, d


# ----------------------------------------------------------------------------
# lens domains: boundary arcs through +-i, opening fraction alpha = k/m
# ----------------------------------------------------------------------------

def _arg_window(values: np.ndarray, low: float) -> np.ndarray:
    """Argument of `values` taken in the window (low, low + 2*pi]."""
    ang = np.angle(values)
    ang = np.where(ang <= low, ang + 2.0 * np.pi, ang)
    ang = np.where(ang > low + 2.0 * np.pi, ang - 2.0 * np.pi, ang)
    return ang


def _lens_W(z, m_over_k: float):
    """((z-i)/(z+i))^(m/k) on the branch continuous across the lens interior."""
    ratio = (np.asarray(z, dtype=complex) - 1j) / (np.asarray(z, dtype=complex) + 1j)
    ang = _arg_window(ratio, 0.0)  # lens interior maps near arg = pi
    return np.exp(m_over_k * (np.log(np.abs(ratio)) + 1j * ang)), ratio


def _make_lens_case(name: str, a: float, b: float, k: int, m: int) -> ReferenceCase:
    boundary = build_lens(a, b)
    mk = m / k
    c1 = np.exp(1j * np.pi * mk)
    c2 = c1 * np.exp(-2j * a * mk)

    def f0_raw(z):
        W, _ = _lens_W(z, mk)
        return (W - c1) / (W - c2)

    def f0_raw_prime(z):
        z = np.asarray(z, dtype=complex)
        W, ratio = _lens_W(z, mk)
        Wp = mk * W / ratio * (2j / (z + 1j) ** 2)
        return (c1 - c2) / (W - c2) ** 2 * Wp

    deriv = complex(f0_raw_prime(boundary.z0))

    def f0(z):
        return f0_raw(z) / deriv

    def f0_prime(z):
        return f0_raw_prime(z) / deriv

    r0 = (k / m) * math.sin(m * a / k)
    kernel_value = m * m / (np.pi * k * k * math.sin(m * a / k) ** 2)

    lo = -k * np.pi / m
    pref = np.exp(1j * ((m - k) * np.pi / m + a))
    lam = np.exp(1j * ((m - k) * np.pi + m * a) / (2 * m - k))
    expo = m / (2 * m - k)

    def level_fn(z):
        xi = pref * (np.asarray(z, dtype=complex) - 1j) / (np.asarray(z, dtype=complex) + 1j)
        ang = _arg_window(xi, lo)
        t = np.exp(expo * (np.log(np.abs(xi)) + 1j * ang))
        return np.abs((1.0 - lam * t) / (t - lam))

    poles = [(-math.tan(a), 1), (math.tan(b), 1)]
    if a == b:  # symmetric lenses: next pole pair of the continuation
        nxt = math.tan(3.0 * a)
        if nxt > 0 and not boundary.contains(nxt):
            poles += [(nxt, 1), (-nxt, 1)]
    catalog = sorted((SingularityEntry(location=complex(zj), level=float(level_fn(zj)), k=kj)
                      for zj, kj in poles), key=lambda e: e.level)

    alpha = Fraction(k, m)
    corner_data = [CornerData(0, alpha, "general", boundary.corners[0].special),
                   CornerData(1, alpha, "general", boundary.corners[1].special)]
    return ReferenceCase(
        name=name, boundary=boundary, f0=f0, f0_prime=f0_prime,
        kernel_value=float(kernel_value), radius=float(r0), level_fn=level_fn,
        catalog=catalog, corner_data=corner_data)


# ----------------------------------------------------------------------------
# circular sectors of radius 2 with z0 = 1
# ----------------------------------------------------------------------------

def _sector_forward_v(v, beta: float, radius: float):
    """Boundary-to-exterior strip map evaluated at v (vectorized)."""
    v = np.asarray(v, dtype=complex)
    r = (v - beta) / (v + beta)
    return radius * np.exp(beta * np.log(r)) * (v + 1.0) / (v - 1.0)


def _sector_forward_dlog(v, beta: float):
    """d(log z)/dv for the strip map."""
    return 2.0 * beta**2 / (v**2 - beta**2) - 2.0 / (v**2 - 1.0)


def _bisect_real(fn, lo: float, hi: float, target: float, iters: int = 200) -> float:
    flo, fhi = fn(lo) - target, fn(hi) - target
    if flo * fhi > 0:
        raise ReferenceError("bisection bracket failed in sector inversion")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fn(mid) - target
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _sector_invert(z: complex, beta: float, radius: float) -> complex:
    """Solve z(v) = z for v in the closed fourth quadrant (image: upper exterior)."""
    target = complex(z)
    if target.imag < 0:
        target = target.conjugate()
    if target.imag == 0.0:
        # real axis: v in (beta, 1) maps to (-inf, 0), v in (1, inf) to (radius, inf)
        real_z = lambda v: float(_sector_forward_v(v + 0j, beta, radius).real)
        if target.real < 0.0:
            return complex(_bisect_real(real_z, beta + 1e-14, 1.0 - 1e-14, target.real))
        if target.real > radius:
            return complex(_bisect_real(real_z, 1.0 + 1e-14, 1e15, target.real))
        raise ReferenceError(f"z={z} is not exterior to the sector")
    # interior targets of the upper half-exterior correspond to v in the
    # open fourth quadrant
    res = np.geomspace(0.05, 40.0, 12)
    ims = np.array([1e-3, 0.05, 0.3, 1.0, 3.0])
    starts = [complex(beta + rr, -ii) for rr in res for ii in ims]
    best = None
    for v in starts:
        for _ in range(80):
            zv = complex(_sector_forward_v(v, beta, radius))
            err = zv - target
            if abs(err) < 1e-13 * (1.0 + abs(target)):
                break
            dz = zv * complex(_sector_forward_dlog(v, beta))
            if dz == 0:
                break
            step = err / dz
            cap = 0.5 * min(abs(v - beta), abs(v - 1.0))
            if abs(step) > cap > 0:
                step *= cap / abs(step)
            v = v - step
            if v.real <= 0.0 or v.imag > 0.2:
                break
        zv = complex(_sector_forward_v(v, beta, radius))
        if abs(zv - target) < 1e-10 * (1.0 + abs(target)) and v.real > 0 and v.imag <= 1e-7:
            vv = complex(v.real, min(v.imag, 0.0))
            if best is None or abs(zv - target) < best[1]:
                best = (vv, abs(zv - target))
    if best is None:
        raise ReferenceError(f"sector exterior inversion failed at z={z}")
    return best[0]


def _sector_level_from_v(v: complex, beta: float) -> float:
    zeta = (v * v - beta * beta) / (v * v - 1.0)
    zt = 2.0 * zeta - 1.0
    root = np.sqrt(zt - 1.0) * np.sqrt(zt + 1.0)
    w = zt + root
    if abs(w) < 1.0:
        w = zt - root
    return float(abs(w))


def _make_sector_case(name: str, alpha: Fraction) -> ReferenceCase:
    boundary = build_sector(float(alpha), radius=2.0)
    af = float(alpha)
    inv_a = 1.0 / af
    R = 2.0**inv_a
    d = ((1j + R) / (1j - R)) ** 2

    def _t(z):
        zeta = np.asarray(z, dtype=complex) ** inv_a
        return ((1j * zeta + R) / (1j * zeta - R)) ** 2

    def f0_raw(z):
        t = _t(z)
        return (t - d) / (t * d - 1.0)

    def f0_raw_prime(z):
        z = np.asarray(z, dtype=complex)
        zeta = z**inv_a
        q = (1j * zeta + R) / (1j * zeta - R)
        qp = -2j * R / (1j * zeta - R) ** 2 * (inv_a * z ** (inv_a - 1.0))
        tp = 2.0 * q * qp
        t = q * q
        return (d * d - 1.0) / (t * d - 1.0) ** 2 * tp

    deriv = complex(f0_raw_prime(boundary.z0))

    def f0(z):
        return f0_raw(z) / deriv

    def f0_prime(z):
        return f0_raw_prime(z) / deriv

    four = 4.0**inv_a
    r0 = 2.0 * af * (four - 1.0) / (four + 1.0)
    kernel_value = ((four + 1.0) / (2.0 * af * (four - 1.0))) ** 2 / np.pi

    beta = float(1.0 - Fraction(alpha) / 2)

    def level_fn(z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=float)
        for i, zz in enumerate(flat):
            v = _sector_invert(complex(zz), beta, 2.0)
            out[i] = _sector_level_from_v(v, beta)
        return out.reshape(z.shape) if z.shape else float(out[0])

    pole_points = [4.0 + 0j]
    if alpha < Fraction(4, 3):  # segment mirrors of z0 lie in the exterior
        pole_points += [np.exp(1j * np.pi * af), np.exp(-1j * np.pi * af)]
    catalog = sorted((SingularityEntry(location=complex(zj), level=float(level_fn(zj)))
                      for zj in pole_points), key=lambda e: e.level)

    corner_data = [CornerData(2, alpha, "straight-straight", boundary.corners[2].special),
                   CornerData(0, Fraction(1, 2), "general", True),
                   CornerData(1, Fraction(1, 2), "general", True)]
    return ReferenceCase(
        name=name, boundary=boundary, f0=f0, f0_prime=f0_prime,
        kernel_value=float(kernel_value), radius=float(r0), level_fn=level_fn,
        catalog=catalog, corner_data=corner_data)


def _make_disk_case(radius: float = 1.0) -> ReferenceCase:
    boundary = build_disk(radius)

    def f0(z):
        return np.asarray(z, dtype=complex)

    def f0_prime(z):
        z = np.asarray(z, dtype=complex)
        return np.ones_like(z)

    def level_fn(z):
        return np.abs(np.asarray(z, dtype=complex)) / radius

    return ReferenceCase(
        name="disk", boundary=boundary, f0=f0, f0_prime=f0_prime,
        kernel_value=1.0 / (np.pi * radius**2), radius=radius, level_fn=level_fn,
        catalog=[], corner_data=[])


_CACHE: dict = {}


def reference_case(name: str) -> ReferenceCase:
    """Benchmark case by name; see CASE_NAMES for the recognized set."""
    key = name.strip().lower()
    if key in _CACHE:
        return _CACHE[key]
    if key == "disk":
        case = _make_disk_case()
    elif key == "lens-i":
        case = _make_lens_case(key, np.pi / 6, np.pi / 3, 1, 2)
        case.canonical_poles = (PoleSpec(location=case.catalog[0].location),)
    elif key == "lens-ii":
        case = _make_lens_case(key, np.pi / 4, np.pi / 4, 1, 2)
        case.canonical_poles = (PoleSpec(location=-1.0 + 0j), PoleSpec(location=1.0 + 0j))
    elif key == "lens-iii":
        case = _make_lens_case(key, np.pi / 13, np.pi / 13, 2, 13)
        z1 = math.tan(np.pi / 13)
        case.canonical_poles = (PoleSpec(location=-z1 + 0j), PoleSpec(location=z1 + 0j))
    elif key == "halfdisk":
        case = _make_sector_case(key, Fraction(1, 1))
        case.canonical_poles = (PoleSpec(location=-1.0 + 0j),)
    elif key == "sector-3/2":
        case = _make_sector_case(key, Fraction(3, 2))
        case.canonical_corner_counts = {2: 15}
    elif key == "sector-2/5":
        case = _make_sector_case(key, Fraction(2, 5))
    elif key == "sector-3/4":
        case = _make_sector_case(key, Fraction(3, 4))
        case.canonical_corner_counts = {2: 1}
    elif key == "sector-4/5":
        case = _make_sector_case(key, Fraction(4, 5))
        case.canonical_corner_counts = {2: 1}
    else:
        raise ReferenceError(f"unknown reference case {name!r}")
    _CACHE[key] = case
    return case


def exterior_level(case: ReferenceCase, z: complex) -> float:
    """|Phi(z)| for z in the exterior of the case's domain."""
    if case.boundary.contains(complex(z)):
        raise ReferenceError(f"z={z} lies inside the domain")
    return float(case.level_fn(complex(z)))
