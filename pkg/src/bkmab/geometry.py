"""Bounded Jordan domains with piecewise-analytic boundaries.

A boundary is an ordered, positively oriented, closed chain of line segments
and circular arcs, together with corner descriptors at the arc joints and an
interior normalization point.  Only these two arc kinds are supported; they
cover lens domains, circular sectors and disks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryError",
    "BoundaryArc",
    "Corner",
    "JordanBoundary",
    "segment",
    "circular_arc",
    "build_lens",
    "build_sector",
    "build_disk",
    "boundary_from_name",
]

ENDPOINT_TOL = 1e-13
CIRCLE_TOL = 1e-13
SPECIAL_TOL = 1e-12
ANGLE_TOL = 1e-10


class GeometryError(ValueError):
    """Raised when a boundary description is inconsistent or unsupported."""


@dataclass(frozen=True)
class BoundaryArc:
    """One analytic boundary piece, parametrized over t in [0, 1]."""

    kind: str  # 'segment' or 'circular'
    a: complex = 0j
    b: complex = 0j
    center: complex = 0j
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0

    def point(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "segment":
            return self.a + (self.b - self.a) * t
        theta = self.theta0 + (self.theta1 - self.theta0) * t
        return self.center + self.radius * np.exp(1j * theta)

    def tangent(self, t):
        """dz/dt at parameter t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "segment":
            return np.broadcast_to(self.b - self.a, t.shape).copy() if t.shape else self.b - self.a
        dtheta = self.theta1 - self.theta0
        theta = self.theta0 + dtheta * t
        return 1j * dtheta * self.radius * np.exp(1j * theta)

    def arclength(self) -> float:
        if self.kind == "segment":
            return abs(self.b - self.a)
        return self.radius * abs(self.theta1 - self.theta0)

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(1.0))

    def integral_dz(self) -> complex:
        return self.end - self.start

    def integral_zbar_dz(self) -> complex:
        """Closed-form integral of conj(z) dz along the arc."""
        if self.kind == "segment":
            d = self.b - self.a
            return d * np.conj(self.a) + abs(d) ** 2 / 2.0
        dtheta = self.theta1 - self.theta0
        e0, e1 = np.exp(1j * self.theta0), np.exp(1j * self.theta1)
        return np.conj(self.center) * self.radius * (e1 - e0) + 1j * self.radius**2 * dtheta


def segment(a: complex, b: complex) -> BoundaryArc:
    if abs(b - a) <= 0.0:
        raise GeometryError("segment must have positive length")
    return BoundaryArc(kind="segment", a=complex(a), b=complex(b))


def circular_arc(center: complex, radius: float, theta0: float, theta1: float) -> BoundaryArc:
    if radius <= 0.0:
        raise GeometryError("circular arc must have positive radius")
    if theta0 == theta1:
        raise GeometryError("circular arc must have positive arclength")
    return BoundaryArc(kind="circular", center=complex(center), radius=float(radius),
                       theta0=float(theta0), theta1=float(theta1))


@dataclass(frozen=True)
class Corner:
    """Corner where two boundary arcs meet at interior angle alpha*pi."""

    vertex: complex
    alpha: float
    kind: str  # 'straight-straight' or 'involving-circular'
    special: bool
    arc_in: int
    arc_out: int


def _is_special(alpha: float, tol: float = SPECIAL_TOL, m_max: int = 1000) -> bool:
    for m in range(1, m_max + 1):
        if abs(alpha - 1.0 / m) < tol:
            return True
        if 1.0 / m < alpha - tol:
            break
    return False


_GL64 = np.polynomial.legendre.leggauss(64)


def _winding_number(arcs, z: complex, panels_per_arc: int = 4) -> float:
    """Contour integral of dz/(2*pi*i*(t - z)) over the chain, by quadrature."""
    x, w = _GL64
    total = 0.0j
    for arc in arcs:
        for p in range(panels_per_arc):
            t0, t1 = p / panels_per_arc, (p + 1) / panels_per_arc
            t = t0 + (t1 - t0) * (x + 1.0) / 2.0
            zt = arc.point(t)
            dz = arc.tangent(t) * (t1 - t0) / 2.0
            total += np.sum(w * dz / (zt - z))
    return total / (2j * np.pi)


def _interior_angle(arc_in: BoundaryArc, arc_out: BoundaryArc) -> float:
    """Interior angle (radians) at the joint of two consecutive arcs."""
    t_in = complex(arc_in.tangent(1.0))
    t_out = complex(arc_out.tangent(0.0))
    turn = np.angle(t_out / t_in)
    theta = np.pi - turn
    if theta <= 0.0:
        theta += 2.0 * np.pi
    return float(theta)


@dataclass(frozen=True)
class JordanBoundary:
    """Positively oriented closed chain of arcs with corners and a base point z0."""

    arcs: tuple
    corners: tuple
    z0: complex
    name: str = ""

    def __post_init__(self):
        scale = max(arc.arclength() for arc in self.arcs)
        n = len(self.arcs)
        for i, arc in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % n]
            if abs(arc.end - nxt.start) > ENDPOINT_TOL * max(1.0, scale):
                raise GeometryError(f"arcs {i} and {(i + 1) % n} do not chain closed")
            if arc.kind == "circular":
                for z in (arc.start, arc.end):
                    if abs(abs(z - arc.center) - arc.radius) > CIRCLE_TOL * max(1.0, arc.radius):
                        raise GeometryError(f"arc {i} endpoints are off its circle")
        wn = _winding_number(self.arcs, self.z0)
        if abs(wn - 1.0) > 1e-8:
            raise GeometryError(f"z0={self.z0} is not interior (winding {wn:.3g})")
        for c in self.corners:
            theta = _interior_angle(self.arcs[c.arc_in], self.arcs[c.arc_out])
            if abs(theta - c.alpha * np.pi) > ANGLE_TOL:
                raise GeometryError(
                    f"corner at {c.vertex}: stored angle {c.alpha}*pi, measured {theta/np.pi}*pi")
            if c.special != _is_special(c.alpha):
                raise GeometryError(f"corner at {c.vertex}: special flag inconsistent")
            if not (0.0 < c.alpha < 2.0):
                raise GeometryError(f"corner at {c.vertex}: alpha={c.alpha} out of (0,2)")

    def perimeter(self) -> float:
        return sum(arc.arclength() for arc in self.arcs)

    def area(self) -> float:
        """Enclosed area from the closed-form contour integral (1/2i) oint conj(z) dz."""
        total = sum(arc.integral_zbar_dz() for arc in self.arcs)
        return float((total / 2j).real)

    def diameter(self) -> float:
        pts = self.sample(64)
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    def sample(self, per_arc: int = 64) -> np.ndarray:
        t = (np.arange(per_arc) + 0.5) / per_arc
        return np.concatenate([arc.point(t) for arc in self.arcs])

    def contains(self, z: complex) -> bool:
        return bool(abs(_winding_number(self.arcs, z) - 1.0) < 0.5)

    def distance_to_boundary(self, z: complex, per_arc: int = 512) -> float:
        t = np.linspace(0.0, 1.0, per_arc)
        return min(float(np.min(np.abs(arc.point(t) - z))) for arc in self.arcs)

    def corner_exterior_bisector(self, corner_index: int) -> float:
        """Angle of the exterior-angle bisector ray at the given corner."""
        c = self.corners[corner_index]
        t_out = complex(self.arcs[c.arc_out].tangent(0.0))
        interior = t_out / abs(t_out) * np.exp(1j * c.alpha * np.pi / 2.0)
        return float(np.angle(-interior))


def build_lens(a: float, b: float) -> JordanBoundary:
    """Lens bounded by two circular arcs through +-i making angles a, b with [-i, i].

    The left arc makes angle a, the right arc angle b; corners at +-i have
    interior angle (a+b).  Normalization point z0 = 0.
    """
    if not (0.0 < a < np.pi and 0.0 < b < np.pi):
        raise GeometryError("lens angles must lie in (0, pi)")
    if not (0.0 < a + b < 2.0 * np.pi):
        raise GeometryError("lens requires 0 < a + b < 2*pi")
    right = circular_arc(-1.0 / math.tan(b), 1.0 / math.sin(b), -b, b)
    left = circular_arc(1.0 / math.tan(a), 1.0 / math.sin(a), np.pi - a, np.pi + a)
    alpha = (a + b) / np.pi
    corners = (
        Corner(vertex=1j, alpha=alpha, kind="involving-circular",
               special=_is_special(alpha), arc_in=0, arc_out=1),
        Corner(vertex=-1j, alpha=alpha, kind="involving-circular",
               special=_is_special(alpha), arc_in=1, arc_out=0),
    )
    return JordanBoundary(arcs=(right, left), corners=corners, z0=0j,
                          name=f"lens(a={a:.12g},b={b:.12g})")


def build_sector(alpha: float, radius: float = 2.0, z0: complex | None = None) -> JordanBoundary:
    """Symmetric circular sector of the given radius and opening angle alpha*pi."""
    if not (0.0 < alpha < 2.0):
        raise GeometryError("sector opening fraction must lie in (0, 2)")
    if radius <= 0.0:
        raise GeometryError("sector radius must be positive")
    phi = alpha * np.pi / 2.0
    lo = radius * np.exp(-1j * phi)
    hi = radius * np.exp(1j * phi)
    arcs = (segment(0j, lo), circular_arc(0j, radius, -phi, phi), segment(hi, 0j))
    corners = (
        Corner(vertex=lo, alpha=0.5, kind="involving-circular", special=True,
               arc_in=0, arc_out=1),
        Corner(vertex=hi, alpha=0.5, kind="involving-circular", special=True,
               arc_in=1, arc_out=2),
        Corner(vertex=0j, alpha=alpha, kind="straight-straight",
               special=_is_special(alpha), arc_in=2, arc_out=0),
    )
    if z0 is None:
        z0 = radius / 2.0
    return JordanBoundary(arcs=arcs, corners=corners, z0=complex(z0),
                          name=f"sector(alpha={alpha:.12g},r={radius:.12g})")


def build_disk(radius: float = 1.0) -> JordanBoundary:
    if radius <= 0.0:
        raise GeometryError("disk radius must be positive")
    arc = circular_arc(0j, radius, 0.0, 2.0 * np.pi)
    return JordanBoundary(arcs=(arc,), corners=(), z0=0j, name=f"disk(r={radius:.12g})")


def _parse_angle(text: str) -> float:
    """Parse '0.5236', 'pi/6', '2pi/13' or '3*pi/4' into radians."""
    s = text.strip().lower().replace(" ", "").replace("*", "")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        num = float(head) if head else 1.0
        den = float(tail[1:]) if tail.startswith("/") else 1.0
        if tail and not tail.startswith("/"):
            raise GeometryError(f"cannot parse angle {text!r}")
        return num * np.pi / den
    return float(s)


def _parse_number(text: str) -> float:
    """Parse a plain number or a fraction 'a/b'."""
    s = text.strip()
    if "/" in s:
        num, _, den = s.partition("/")
        return float(num) / float(den)
    return float(s)


def boundary_from_name(name: str) -> JordanBoundary:
    """Build a boundary from 'lens:a,b', 'sector:alpha,radius' or 'disk:radius'."""
    kind, _, args = name.partition(":")
    kind = kind.strip().lower()
    parts = [p for p in args.split(",") if p.strip()] if args else []
    if kind == "lens":
        if len(parts) != 2:
            raise GeometryError("lens geometry needs 'lens:a,b'")
        return build_lens(_parse_angle(parts[0]), _parse_angle(parts[1]))
    if kind == "sector":
        if not 1 <= len(parts) <= 2:
            raise GeometryError("sector geometry needs 'sector:alpha[,radius]'")
        radius = _parse_number(parts[1]) if len(parts) == 2 else 2.0
        return build_sector(_parse_number(parts[0]), radius)
    if kind == "disk":
        radius = _parse_number(parts[0]) if parts else 1.0
        return build_disk(radius)
    raise GeometryError(f"unknown geometry {name!r}")
