"""Hopf data of an end: the square root of phi, its primitive W and thresholds.

Data are stored through the global square root

    sqrt_phi(z) = sum_k a_{-k} z^{-k} + lead * (z^m + a_{m-1} z^{m-1} + ... + a_0),

with ``lead = 1`` for data produced by :func:`validate`.  The primitive

    W(z) = sum_j a_j z^{j+1}/(j+1) + a_{-1} (log|z| + i theta) + sum_{k>=2} a_{-k} z^{1-k}/(1-k)

is evaluated term by term; ``theta`` is a determination of ``arg z`` which the
caller tracks continuously.  With ``a_{-1} = i beta`` the imaginary part of W
is single valued and the real part has period ``-2 pi beta``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InsideCore,
    NoConvergence,
    OriginPole,
    PathThroughOrigin,
    PathThroughZeroOfPhi,
    RealPeriodInHeight,
    TooClose,
    ZeroPolynomial,
)

SEARCH_CAP = 1e6
LOWER_CAP = 2.0
C0_SAFETY = 1.05


@dataclass(frozen=True)
class HopfData:
    """Coefficients of sqrt(phi).

    poly holds a_0..a_{m-1} (the leading coefficient is ``lead``), laurent
    holds a_{-1}..a_{-K}.
    """

    m: int
    poly: tuple = ()
    laurent: tuple = ()
    lead: complex = 1.0 + 0.0j

    def __post_init__(self):
        m = int(self.m)
        if m < 0:
            raise ValueError("degree m must be nonnegative")
        poly = tuple(complex(c) for c in self.poly)
        laurent = tuple(complex(c) for c in self.laurent)
        if len(poly) != m:
            raise ValueError(f"expected {m} lower coefficients, got {len(poly)}")
        lead = complex(self.lead)
        for c in poly + laurent + (lead,):
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("coefficients must be finite")
        if lead == 0:
            raise ZeroPolynomial("leading coefficient is zero")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "laurent", laurent)
        object.__setattr__(self, "lead", lead)

    @property
    def a_minus_1(self) -> complex:
        return self.laurent[0] if self.laurent else 0j

    @property
    def beta(self) -> float:
        return self.a_minus_1.imag

    @property
    def is_monic(self) -> bool:
        return self.lead == 1

    @property
    def pc(self) -> np.ndarray:
        """Full polynomial coefficients, low to high degree, leading term included."""
        return self.lead * np.array(list(self.poly) + [1.0], dtype=complex)

    @property
    def lc(self) -> np.ndarray:
        return np.array(self.laurent, dtype=complex)

    def as_dict(self) -> dict:
        def enc(cs):
            return [[c.real, c.imag] for c in cs]

        return {
            "m": self.m,
            "poly": enc(self.poly),
            "laurent": enc(self.laurent),
            "lead": [self.lead.real, self.lead.imag],
        }


@dataclass(frozen=True)
class ThresholdSet:
    R0: float
    R1: float
    R2: float
    R3: float
    C0: float
    c1: float
    source: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        eps = 1e-12
        if not (1.0 < self.R0 <= self.R1 <= self.R2 <= self.R3):
            raise ValueError(
                f"thresholds must satisfy 1 < R0 <= R1 <= R2 <= R3, got "
                f"{self.R0}, {self.R1}, {self.R2}, {self.R3}"
            )
        if not (self.C0 > 0 and self.c1 > 0):
            raise ValueError("C0 and c1 must be positive")
        if self.R3 < max(2 * self.R2, 2 / self.c1) * (1 - eps):
            raise ValueError("R3 must be at least max(2 R2, 2 / c1)")

    def as_dict(self) -> dict:
        return {
            "R0": self.R0,
            "R1": self.R1,
            "R2": self.R2,
            "R3": self.R3,
            "C0": self.C0,
            "c1": self.c1,
            "source": dict(self.source),
        }


@dataclass(frozen=True)
class BranchedW:
    """Value of W at the end of a path with the tracked determination of arg z."""

    value: complex
    theta: float
    domain_index: int
    arg_interval: tuple


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def _coerce(c) -> complex:
    if isinstance(c, (list, tuple)):
        if len(c) != 2:
            raise ValueError(f"complex coefficient pairs need two entries, got {c!r}")
        return complex(float(c[0]), float(c[1]))
    return complex(c)


def validate(raw: Mapping) -> HopfData:
    """Normalize raw coefficient data into monic :class:`HopfData`.

    ``raw`` has keys ``poly`` and ``laurent`` (lists of complex numbers or
    ``[re, im]`` pairs, low degree first) and optionally ``m``.  When ``m`` is
    given and ``poly`` has exactly ``m`` entries, the polynomial is taken as
    monic with those lower coefficients.  Otherwise ``poly`` is the full list
    of coefficients; trailing zeros are dropped and the result is rescaled
    (z = mu zeta) to be monic.
    """
    poly = [_coerce(c) for c in raw.get("poly", [])]
    laurent = [_coerce(c) for c in raw.get("laurent", [])]
    for c in poly + laurent:
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("coefficients must be finite")
    if laurent and laurent[0].real != 0.0:
        raise RealPeriodInHeight(
            f"Re a_-1 = {laurent[0].real!r}: the height would not be single valued"
        )
    m = raw.get("m")
    if m is not None and len(poly) == int(m):
        return HopfData(int(m), tuple(poly), tuple(laurent))
    while poly and poly[-1] == 0:
        poly.pop()
    if not poly:
        raise ZeroPolynomial("the polynomial part of sqrt(phi) vanishes identically")
    deg = len(poly) - 1
    if m is not None and int(m) != deg:
        raise ValueError(f"declared m={m} but polynomial has degree {deg}")
    cm = poly[-1]
    # z = mu zeta with mu^(m+1) cm = 1 makes the leading coefficient one
    mu = cmath.exp(-cmath.log(cm) / (deg + 1))
    new_poly = tuple(poly[j] * mu ** (j + 1) for j in range(deg))
    new_laurent = tuple(laurent[k - 1] * mu ** (1 - k) for k in range(1, len(laurent) + 1))
    return HopfData(deg, new_poly, new_laurent)


def asymptotic_to_vertical_plane(d: HopfData) -> bool:
    """Ends asymptotic to a vertical geodesic plane are exactly those of degree 0."""
    return d.m == 0


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def sqrt_phi(d: HopfData, z):
    """Evaluate sqrt(phi) by Horner in z and in 1/z."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise OriginPole("sqrt(phi) has a pole at the origin")
    s = np.zeros_like(z)
    for c in d.pc[::-1]:
        s = s * z + c
    lc = d.lc
    if lc.size:
        y = 1.0 / z
        acc = np.zeros_like(z)
        for c in lc[::-1]:
            acc = acc * y + c
        s = s + acc * y
    return complex(s) if scalar else s


def W_value(d: HopfData, z, theta=None):
    """Term-wise primitive W(z) with the given determination of arg z."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise OriginPole("W is singular at the origin")
    if theta is None:
        theta = np.angle(z)
    theta = np.asarray(theta, dtype=float)
    pc = d.pc
    t = np.zeros_like(z)
    for j in range(len(pc) - 1, -1, -1):
        t = t * z + pc[j] / (j + 1)
    t = t * z
    lc = d.lc
    if lc.size:
        y = 1.0 / z
        lp = np.zeros_like(z)
        for k in range(len(lc) - 1, 0, -1):
            lp = lp * y + lc[k] / (-k)
        t = t + lp * y + lc[0] * (np.log(np.abs(z)) + 1j * theta)
    return complex(t) if scalar else t


def im_W(d: HopfData, z, theta=None):
    return np.imag(W_value(d, z, theta))


def ima_leading(d: HopfData, z):
    """Leading large-|z| behaviour beta log r + r^(m+1) sin((m+1) theta)/(m+1)."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    th = np.angle(z)
    m1 = d.m + 1
    return d.beta * np.log(r) + r ** m1 * np.sin(m1 * th) / m1


def phi_zeros(d: HopfData) -> np.ndarray:
    """Zeros of sqrt(phi) in C* (roots of z^K sqrt(phi))."""
    K = len(d.laurent)
    coeffs = np.concatenate([d.lc[::-1], d.pc])  # z^0 .. z^(m+K)
    while coeffs.size and coeffs[0] == 0 and K > 0:
        coeffs = coeffs[1:]
        K -= 1
    if coeffs.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs[::-1])


def _nearest_alpha_index(theta: float, m: int) -> int:
    return int(math.floor(theta * (m + 1) / math.pi + 0.5))


def continue_W(d: HopfData, path, theta0: float | None = None,
               zero_margin: float = 1e-6) -> BranchedW:
    """Continue W along a z-plane polyline, tracking arg z continuously."""
    z = np.asarray(path, dtype=complex).ravel()
    if z.size == 0:
        raise ValueError("empty path")
    a = z[:-1]
    b = z[1:]
    seg = b - a
    # closest approach of each segment to the origin
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(-np.real(np.conj(seg) * a) / np.abs(seg) ** 2, 0.0, 1.0)
    t = np.where(np.abs(seg) > 0, t, 0.0)
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.any(np.abs(z) <= 1e-14 * scale) or (
        seg.size and np.min(np.abs(a + t * seg)) <= 1e-14 * scale
    ):
        raise PathThroughOrigin("path passes through the origin")
    zeros = phi_zeros(d)
    if zeros.size:
        for q in zeros:
            if np.min(np.abs(z - q)) <= zero_margin:
                raise PathThroughZeroOfPhi(f"path passes within {zero_margin} of a zero of sqrt(phi)")
            if seg.size:
                with np.errstate(invalid="ignore", divide="ignore"):
                    tq = np.clip(np.real(np.conj(seg) * (q - a)) / np.abs(seg) ** 2, 0.0, 1.0)
                tq = np.where(np.abs(seg) > 0, tq, 0.0)
                if np.min(np.abs(a + tq * seg - q)) <= zero_margin:
                    raise PathThroughZeroOfPhi(
                        f"path passes within {zero_margin} of a zero of sqrt(phi)"
                    )
    th = float(np.angle(z[0])) if theta0 is None else float(theta0)
    if seg.size:
        th += float(np.sum(np.angle(b / a)))
    value = W_value(d, complex(z[-1]), th)
    m = d.m
    kr = _nearest_alpha_index(th, m)
    k = kr % (2 * m + 2)
    margin = math.pi / (10 * (m + 1))
    step = math.pi / (m + 1)
    interval = ((kr - 1) * step - margin, (kr + 1) * step + margin)
    return BranchedW(value, th, k, interval)


def height(d: HopfData, z, branch=None):
    """Height 2 Im W.  ``branch`` may be a BranchedW or an angle; only
    data with a non-imaginary a_-1 actually depend on it."""
    if isinstance(branch, BranchedW):
        theta = branch.theta
    else:
        theta = branch
    return 2.0 * im_W(d, z, theta)


def invert_W(d: HopfData, w: complex, k: int, tol: float = 1e-12, max_iter: int = 100,
             z_guess: complex | None = None) -> complex:
    """Solve W(z) = w for z in the sector around alpha_k by Newton's method.

    The argument is determined in (alpha_k - pi, alpha_k + pi].
    """
    m = d.m
    m1 = m + 1
    alpha = k * math.pi / m1

    def theta_of(z):
        return alpha + cmath.phase(z * cmath.exp(-1j * alpha))

    if z_guess is None:
        base = complex(m1 * w / d.lead) ** (1.0 / m1)
        cands = [base * cmath.exp(2j * math.pi * j / m1) for j in range(m1)]
        z = min(cands, key=lambda c: abs(cmath.phase(c * cmath.exp(-1j * alpha))))
    else:
        z = complex(z_guess)
    for _ in range(max_iter):
        f = W_value(d, z, theta_of(z)) - w
        scale = max(1.0, abs(w))
        if abs(f) <= tol * scale:
            return z
        dz = f / sqrt_phi(d, z)
        # damp steps that would move too far relative to |z|
        lim = 0.5 * abs(z)
        if abs(dz) > lim:
            dz *= lim / abs(dz)
        z = z - dz
    raise NoConvergence(f"W inversion did not converge for w={w!r}")


# --------------------------------------------------------------------------
# thresholds
# --------------------------------------------------------------------------

def _require_monic(d: HopfData):
    if not d.is_monic:
        raise ValueError("thresholds are defined for monic data")


def _tail_ratio(d: HopfData, R):
    """Upper bound of |sqrt(phi)/z^m - 1| on the circle of radius R."""
    m = d.m
    R = np.asarray(R, dtype=float)
    f = np.zeros_like(R)
    for j, c in enumerate(d.poly):
        f = f + abs(c) * R ** (j - m)
    for k, c in enumerate(d.laurent, start=1):
        f = f + abs(c) * R ** (-k - m)
    return f


def _solve_decreasing(fun, target, lo, hi, what):
    """Smallest R in [lo, hi] with fun(R) < target, for decreasing fun."""
    if fun(lo) < target:
        return lo
    if fun(hi) >= target:
        raise NoConvergence(f"{what}: no radius below {hi:g}")
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if fun(math.exp(mid)) < target:
            b = mid
        else:
            a = mid
        if b - a < 1e-15:
            break
    return math.exp(b)


def monotone_radius(d: HopfData, cap: float = SEARCH_CAP) -> float:
    """Radius beyond which Im W is strictly monotone on every arc A_k(R)."""
    _require_monic(d)
    target = math.cos(math.pi / 10)
    return _solve_decreasing(lambda R: float(_tail_ratio(d, R)), target, LOWER_CAP, cap, "R0")


def comparison_radius(d: HopfData, cap: float = SEARCH_CAP) -> float:
    """Certified radius beyond which |z|^m/2 < |sqrt(phi)| < 2|z|^m."""
    _require_monic(d)
    return _solve_decreasing(lambda R: float(_tail_ratio(d, R)), 0.5, LOWER_CAP, cap, "large-|z| ratio bound")


def _level_margin(d: HopfData, C: float, R):
    m = d.m
    m1 = m + 1
    R = np.asarray(R, dtype=float)
    E = np.zeros_like(R)
    for j, c in enumerate(d.poly):
        E = E + abs(c) * R ** (j + 1) / (j + 1)
    for k, c in enumerate(d.laurent[1:], start=2):
        E = E + abs(c) * R ** (1 - k) / (k - 1)
    return R ** m1 * math.sin(math.pi / 10) / m1 - E - abs(d.beta) * np.log(R) - abs(C)


def level_radius(d: HopfData, C: float, r_min: float | None = None,
                 cap: float = SEARCH_CAP) -> float:
    """r(C): beyond this radius the level {Im W = C} meets S_R only inside the arcs A_k(R).

    Certified by a lower bound of |Im W| off the arcs, scanned on a geometric
    grid and refined by bisection at the last sign change.
    """
    _require_monic(d)
    lo = monotone_radius(d, cap) if r_min is None else float(r_min)
    n = int(math.ceil(math.log(cap / lo) / math.log(1.01))) + 1
    grid = lo * 1.01 ** np.arange(n)
    g = _level_margin(d, C, grid)
    bad = np.nonzero(g <= 0)[0]
    if bad.size == 0:
        return lo
    i = int(bad[-1])
    if i == n - 1:
        raise NoConvergence(f"r(C) for C={C:g} exceeds the search cap {cap:g}")
    a, b = grid[i], grid[i + 1]
    for _ in range(200):
        mid = 0.5 * (a + b)
        if _level_margin(d, C, mid) > 0:
            b = mid
        else:
            a = mid
        if b - a <= 1e-14 * b:
            break
    return float(b)


def winding_number(d: HopfData, R: float, n: int = 16384) -> int:
    """Number of zeros of z^K sqrt(phi) inside |z| < R (argument principle)."""
    K = len(d.laurent)
    th = np.linspace(0.0, 2 * math.pi, n + 1)
    z = R * np.exp(1j * th)
    vals = sqrt_phi(d, z) * z ** K
    dphase = np.angle(vals[1:] / vals[:-1])
    return int(round(float(np.sum(dphase)) / (2 * math.pi)))


def max_abs_im_W(d: HopfData, R: float, n: int | None = None) -> float:
    if n is None:
        n = 8192 * (d.m + 1)
    th = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return float(np.max(np.abs(im_W(d, R * np.exp(1j * th), th))))


def slope_constant(m: int, R2: float) -> float:
    """Explicit lower-bound slope c1 of the phi-distance to the domain boundary."""
    if m == 0:
        return 0.25
    m1 = m + 1
    half = R2 ** m / 2
    return min(
        half * math.sin(4 * math.pi / (10 * m1)),
        min(math.sin(9 * math.pi / (10 * m1)), math.sin(14 * math.pi / (10 * m1))) * half,
        R2 ** m / 4,
    )


def compute_thresholds(d: HopfData, overrides: Mapping | None = None,
                       cap: float = SEARCH_CAP) -> ThresholdSet:
    """Threshold radii, the level bound C0 and the slope c1, with provenance."""
    _require_monic(d)
    src: dict = {}
    R0 = monotone_radius(d, cap)
    src["R0"] = "certificate: tail ratio < cos(pi/10), lower cap 2"
    r0 = level_radius(d, 0.0, R0, cap)
    R1 = max(R0, r0)
    total = d.m + len(d.laurent)
    pushes = 0
    while winding_number(d, R1) != total:
        R1 *= 1.25
        pushes += 1
        if R1 > cap:
            raise NoConvergence("zeros of sqrt(phi) persist up to the search cap")
    src["R1"] = f"max(R0, r(0)); argument-principle check pushed {pushes} times"
    imw_max = max_abs_im_W(d, R1)
    C0 = C0_SAFETY * imw_max
    src["C0"] = f"1.05 x sampled max |Im W| on S_R1 ({8192 * (d.m + 1)} samples)"
    src["max_abs_im_W_R1"] = imw_max
    r_c0 = level_radius(d, C0, R0, cap)
    R_big = comparison_radius(d, cap)
    R2 = max(R1, r_c0, R_big, LOWER_CAP)
    src["R2"] = "max(R1, r(C0), large-|z| ratio certificate, 2)"
    src["R2_comparison"] = R_big
    src["r_C0"] = r_c0
    c1 = slope_constant(d.m, R2)
    src["c1"] = "explicit minimum of the three sector estimates" if d.m else "m = 0 constant 1/4"
    R3 = max(2 * R2, 2 / c1)
    src["R3"] = "max(2 R2, 2 / c1)"
    vals = {"R0": R0, "R1": R1, "R2": R2, "R3": R3, "C0": C0, "c1": c1}
    if overrides:
        for key, v in overrides.items():
            if key not in vals:
                raise ValueError(f"unknown threshold override {key!r}")
            vals[key] = float(v)
            src[key] = "override"
    return ThresholdSet(source=src, **vals)


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------

def alpha(k: int, m: int) -> float:
    return k * math.pi / (m + 1)


def domain_membership(d: HopfData, th: ThresholdSet, z: complex) -> set:
    """Indices k of the domains Omega_k assigned to z by the half-angle rule."""
    z = complex(z)
    if abs(z) <= th.R1:
        raise InsideCore(f"|z| = {abs(z):g} is inside the core radius R1 = {th.R1:g}")
    m = d.m
    n = 2 * m + 2
    step = math.pi / (m + 1)
    theta = cmath.phase(z) % (2 * math.pi)
    k = min(int(theta // step), n - 1)
    mid = (k + 0.5) * step
    out = set()
    if theta <= mid:
        out.add(k)
    if theta >= mid:
        out.add((k + 1) % n)
    return out


def phi_distance_lower_bound(d: HopfData, th: ThresholdSet, z: complex) -> float:
    """Certified lower bound c1 |z| of the phi-distance from z to the boundary of its domain."""
    r = abs(complex(z))
    if r <= 2 * th.R2:
        raise TooClose(f"|z| = {r:g} must exceed 2 R2 = {2 * th.R2:g}")
    return th.c1 * r
