"""Hyperbolic plane primitives in the Poincare disk model.

Conventions used throughout the package:

* points are complex numbers with ``|z| < 1``; the metric is
  ``lambda(z)^2 |dz|^2`` with ``lambda = 2 / (1 - |z|^2)`` (curvature -1);
* a geodesic is the ordered pair of its ideal endpoints ``a -> b``;
* the positive side of an oriented geodesic, and the sign of geodesic
  curvature, follow the left normal of the traversal direction.

Most operations go through the *standard map* of a geodesic, the disk
isometry sending ``a`` to ``-1`` and ``b`` to ``+1``, so that the geodesic
becomes the real diameter and its left side the upper half disk.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import kernels
from .errors import (
    AsymptoticGeodesics,
    CoincidentPoints,
    DegenerateSpacing,
    IntersectingGeodesics,
    OutsideDisk,
)

TWO_PI = 2.0 * math.pi
BOUNDARY_MARGIN = 1e-12
IDEAL_SEPARATION = 1e-12
MAX_SPACING = 0.1


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise OutsideDisk(f"non-finite point {z!r}")
        if abs(z) >= 1.0 - BOUNDARY_MARGIN:
            raise OutsideDisk(f"|z| = {abs(z)!r} is not inside the disk")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class IdealPoint:
    """A point of the circle at infinity, stored as an angle in [0, 2pi)."""

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not math.isfinite(t):
            raise ValueError("ideal point angle must be finite")
        object.__setattr__(self, "theta", normalize_angle(t))

    @property
    def z(self) -> complex:
        return cmath.exp(1j * self.theta)


@dataclass(frozen=True)
class Geodesic:
    """Oriented complete geodesic from ideal point ``a`` to ideal point ``b``."""

    a: IdealPoint
    b: IdealPoint

    def __post_init__(self):
        a = self.a if isinstance(self.a, IdealPoint) else IdealPoint(self.a)
        b = self.b if isinstance(self.b, IdealPoint) else IdealPoint(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if angular_separation(a.theta, b.theta) <= IDEAL_SEPARATION:
            raise CoincidentPoints("geodesic endpoints coincide")

    def reversed(self) -> "Geodesic":
        return Geodesic(self.b, self.a)

    @property
    def is_diameter(self) -> bool:
        return abs(angular_separation(self.a.theta, self.b.theta) - math.pi) < 1e-15

    def circle(self):
        """Euclidean (center, radius) of the supporting circle, or None for a diameter."""
        delta = (self.b.theta - self.a.theta) % TWO_PI
        half = 0.5 * delta
        c = math.cos(half)
        if abs(c) < 1e-15:
            return None
        mid = self.a.theta + half
        return cmath.exp(1j * mid) / c, abs(math.tan(half))

    def orthogonality_residual(self) -> float:
        """| |c|^2 - r^2 - 1 |: zero when the circle meets the unit circle at right angles."""
        circ = self.circle()
        if circ is None:
            return 0.0
        c, r = circ
        return abs(abs(c) ** 2 - r * r - 1.0) / max(1.0, r * r)


@dataclass(frozen=True)
class Polyline:
    """Ordered disk points; consecutive points must differ."""

    points: tuple
    arclength: tuple | None = field(default=None)

    def __post_init__(self):
        pts = tuple(p if isinstance(p, DiskPoint) else DiskPoint(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        for p, q in zip(pts[:-1], pts[1:]):
            if p.z == q.z:
                raise CoincidentPoints("consecutive polyline points coincide")
        object.__setattr__(self, "points", pts)
        if self.arclength is not None:
            s = tuple(float(x) for x in self.arclength)
            if len(s) != len(pts):
                raise ValueError("arclength must have one entry per point")
            object.__setattr__(self, "arclength", s)

    @classmethod
    def from_array(cls, z) -> "Polyline":
        return cls(tuple(DiskPoint(complex(w)) for w in np.asarray(z).ravel()))

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points], dtype=complex)

    def __len__(self):
        return len(self.points)

    def spacings(self) -> np.ndarray:
        z = self.z
        return dist_array(z[:-1], z[1:])

    def length(self) -> float:
        return float(np.sum(self.spacings()))


PointLike = Union[DiskPoint, complex, float]


class SignedDistance(NamedTuple):
    value: float
    foot: DiskPoint


class Perpendicular(NamedTuple):
    geodesic: Geodesic
    foot1: DiskPoint
    foot2: DiskPoint


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def normalize_angle(t: float) -> float:
    t = math.fmod(t, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


def angular_separation(s: float, t: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    d = abs(normalize_angle(s) - normalize_angle(t))
    return min(d, TWO_PI - d)


def _z(p) -> complex:
    if isinstance(p, DiskPoint):
        return p.z
    return DiskPoint(complex(p)).z


def _std_parts(g: Geodesic):
    """(p0, rot) such that z -> rot * (z - p0) / (1 - conj(p0) z) sends a->-1, b->+1."""
    a = g.a.theta
    delta = (g.b.theta - a) % TWO_PI
    phi = 0.5 * delta
    mid = a + phi
    p0 = cmath.exp(1j * mid) * math.tan(0.25 * math.pi - 0.5 * phi)
    ea = cmath.exp(1j * a)
    ta = (ea - p0) / (1.0 - p0.conjugate() * ea)
    rot = -1.0 / ta
    rot /= abs(rot)
    return p0, rot


def _to_std(z, p0, rot):
    return rot * (z - p0) / (1.0 - np.conj(p0) * z)


def _from_std(w, p0, rot):
    u = w / rot
    return (u + p0) / (1.0 + np.conj(p0) * u)


def to_standard(g: Geodesic, z):
    """Image of z under the isometry taking g to the real diameter (-1 -> +1)."""
    p0, rot = _std_parts(g)
    return _to_std(np.asarray(z, dtype=complex) if np.ndim(z) else complex(z), p0, rot)


def from_standard(g: Geodesic, w):
    p0, rot = _std_parts(g)
    return _from_std(np.asarray(w, dtype=complex) if np.ndim(w) else complex(w), p0, rot)


# --------------------------------------------------------------------------
# metric
# --------------------------------------------------------------------------

def dist(p: PointLike, q: PointLike) -> float:
    """Hyperbolic distance 2 artanh |(p - q) / (1 - conj(p) q)|."""
    zp, zq = _z(p), _z(q)
    r = abs((zp - zq) / (1.0 - zp.conjugate() * zq))
    return 2.0 * math.atanh(min(r, 1.0 - 1e-17))


def dist_array(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    r = np.abs((p - q) / (1.0 - np.conj(p) * q))
    return 2.0 * np.arctanh(r)


def conformal_factor(p: PointLike) -> float:
    zp = _z(p)
    return 2.0 / (1.0 - abs(zp) ** 2)


# --------------------------------------------------------------------------
# geodesics
# --------------------------------------------------------------------------

def _recenter(p: complex):
    def fwd(z):
        return (z - p) / (1.0 - p.conjugate() * z)

    def back(w):
        return (w + p) / (1.0 + p.conjugate() * w)

    return fwd, back


def geodesic_between(p, q) -> Geodesic:
    """Oriented geodesic through p then q; each may be a DiskPoint or an IdealPoint."""
    p_ideal = isinstance(p, IdealPoint)
    q_ideal = isinstance(q, IdealPoint)
    if p_ideal and q_ideal:
        if angular_separation(p.theta, q.theta) <= IDEAL_SEPARATION:
            raise CoincidentPoints("ideal endpoints coincide")
        return Geodesic(p, q)
    if p_ideal:
        g = geodesic_between(q, p)
        return Geodesic(p, g.a)
    zp = _z(p)
    fwd, back = _recenter(zp)
    if q_ideal:
        u = fwd(q.z)
        u /= abs(u)
    else:
        zq = _z(q)
        w = fwd(zq)
        if abs(w) < 1e-15:
            raise CoincidentPoints("points coincide")
        u = w / abs(w)
    a = back(-u)
    b = back(u)
    return Geodesic(IdealPoint(cmath.phase(a)), IdealPoint(cmath.phase(b)))


def point_on_geodesic_residual(g: Geodesic, p: PointLike) -> float:
    """Hyperbolic distance from p to g (0 when p lies on g)."""
    return abs(signed_dist_to_geodesic(p, g).value)


def tangent_direction(g: Geodesic, p: PointLike) -> complex:
    """Euclidean unit tangent of g (oriented a -> b) at its closest point to p."""
    p0, rot = _std_parts(g)
    zp = _z(p)
    deriv = rot * (1.0 - abs(p0) ** 2) / (1.0 - p0.conjugate() * zp) ** 2
    t = deriv.conjugate()
    return t / abs(t)


def _interleaved(g1: Geodesic, g2: Geodesic) -> bool:
    a, b = g1.a.theta, g1.b.theta
    span = (b - a) % TWO_PI

    def inside(t):
        return 0.0 < (t - a) % TWO_PI < span

    return inside(g2.a.theta) != inside(g2.b.theta)


def common_perpendicular(g1: Geodesic, g2: Geodesic) -> Perpendicular:
    """Geodesic meeting both g1 and g2 orthogonally, with its two feet.

    Computed in the Klein model, where a geodesic is a chord and the
    perpendiculars to it are exactly the lines through its pole.
    """
    thetas1 = (g1.a.theta, g1.b.theta)
    thetas2 = (g2.a.theta, g2.b.theta)
    for s in thetas1:
        for t in thetas2:
            if angular_separation(s, t) <= 1e-12:
                raise AsymptoticGeodesics("geodesics share an ideal endpoint")
    if _interleaved(g1, g2):
        raise IntersectingGeodesics("geodesics intersect")

    def chord(g):
        delta = (g.b.theta - g.a.theta) % TWO_PI
        half = 0.5 * delta
        mid = g.a.theta + half
        return np.array([math.cos(mid), math.sin(mid), math.cos(half)])

    c1 = chord(g1)
    c2 = chord(g2)
    line = np.cross(c1, c2)  # A x + B y + C w = 0 through both poles
    A, B, C = line
    nrm2 = A * A + B * B
    x0 = -C * np.array([A, B]) / nrm2
    d2 = C * C / nrm2
    t = math.sqrt(max(0.0, 1.0 - d2))
    direction = np.array([-B, A]) / math.sqrt(nrm2)

    def foot(c):
        chord_line = np.array([c[0], c[1], -c[2]])
        h = np.cross(line, chord_line)
        k = complex(h[0] / h[2], h[1] / h[2])
        return DiskPoint(k / (1.0 + math.sqrt(max(0.0, 1.0 - abs(k) ** 2))))

    f1 = foot(c1)
    f2 = foot(c2)
    e_minus = x0 - t * direction
    e_plus = x0 + t * direction
    ends = [math.atan2(e_minus[1], e_minus[0]), math.atan2(e_plus[1], e_plus[0])]
    # orient from g1 toward g2
    g = Geodesic(IdealPoint(ends[0]), IdealPoint(ends[1]))
    sd = to_standard(g, np.array([f1.z, f2.z])).real
    if sd[0] > sd[1]:
        g = g.reversed()
    return Perpendicular(g, f1, f2)


def intersection_angle(g1: Geodesic, g2: Geodesic, at: PointLike) -> float:
    """Unoriented angle in [0, pi/2] between g1 and g2 measured at a common point."""
    t1 = tangent_direction(g1, at)
    t2 = tangent_direction(g2, at)
    ang = abs(cmath.phase(t2 / t1))
    return min(ang, math.pi - ang)


# --------------------------------------------------------------------------
# isometries
# --------------------------------------------------------------------------

def reflect(p: PointLike, g: Geodesic) -> DiskPoint:
    """Reflection of p across g."""
    p0, rot = _std_parts(g)
    w = _to_std(_z(p), p0, rot)
    z = _from_std(w.conjugate(), p0, rot)
    return DiskPoint(z)


def translate(g: Geodesic, s: float, p: PointLike) -> DiskPoint:
    """Hyperbolic translation along g by signed length s (toward g.b for s > 0)."""
    p0, rot = _std_parts(g)
    w = _to_std(_z(p), p0, rot)
    t = math.tanh(0.5 * s)
    w = (w + t) / (1.0 + t * w)
    return DiskPoint(_from_std(w, p0, rot))


def parallel_transport(p: PointLike, q: PointLike, v: complex) -> complex:
    """Transport the tangent direction v at p to q along the geodesic segment pq.

    Returns the Euclidean unit direction at q.
    """
    zp, zq = _z(p), _z(q)
    fwd, _ = _recenter(zp)
    qq = fwd(zq)
    deriv = (1.0 - abs(qq) ** 2) / (1.0 + zp.conjugate() * qq) ** 2
    out = deriv * complex(v)
    return out / abs(out)


# --------------------------------------------------------------------------
# distances to geodesics and curvature
# --------------------------------------------------------------------------

def _signed_from_std(w):
    aw2 = np.abs(w) ** 2
    den = 1.0 - aw2
    x0 = (1.0 + aw2) / den
    x1 = 2.0 * np.real(w) / den
    x2 = 2.0 * np.imag(w) / den
    sd = np.arcsinh(x2)
    nrm = np.sqrt(x0 * x0 - x1 * x1)
    f0 = x0 / nrm
    f1 = x1 / nrm
    foot = f1 / (1.0 + f0)
    return sd, foot


def signed_dist_to_geodesic(p: PointLike, g: Geodesic) -> SignedDistance:
    """Signed distance from p to g (positive on the left of a -> b) and its foot."""
    p0, rot = _std_parts(g)
    w = _to_std(_z(p), p0, rot)
    sd, foot = _signed_from_std(w)
    return SignedDistance(float(sd), DiskPoint(_from_std(complex(foot), p0, rot)))


def signed_distances(z, g: Geodesic):
    """Vectorized signed distances and feet for an array of disk coordinates."""
    p0, rot = _std_parts(g)
    w = _to_std(np.asarray(z, dtype=complex), p0, rot)
    sd, foot = _signed_from_std(w)
    return sd, _from_std(foot.astype(complex), p0, rot)


def discrete_curvature(c: Polyline | Sequence) -> np.ndarray:
    """Signed geodesic curvature at each interior vertex of a polyline.

    Uses the circumscribed circle of each vertex triple after moving the
    middle vertex to the origin and pulling the neighbours back to its
    tangent plane by the logarithm map.  Requires spacings below 0.1.
    """
    if not isinstance(c, Polyline):
        c = Polyline.from_array(c)
    if len(c) < 3:
        raise DegenerateSpacing("need at least three points")
    z = c.z
    sp = dist_array(z[:-1], z[1:])
    if np.any(sp >= MAX_SPACING) or np.any(sp <= 0.0):
        raise DegenerateSpacing(
            f"hyperbolic spacing must lie in (0, {MAX_SPACING}); got max {sp.max():.3g}"
        )
    return kernels.polyline_curvature(z)
