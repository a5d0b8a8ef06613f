"""End-level verification: ideal endpoints, convergence to geodesics, graph
and asymptote checks on curves of bounded curvature, and curvature decay.

Every check returns a :class:`Verdict` carrying its metrics, so the
thresholds that decide pass/fail can be set in one place by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import hopf, hyp2
from .errors import CurvatureHypothesisViolated, InsufficientSpan, TailNotConverged
from .hyp2 import Geodesic, IdealPoint, Polyline

DISTINCT_SEPARATION = 1e-3
TANGENCY_ANGLE = 1e-3


@dataclass
class Verdict:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"passed": bool(self.passed), "metrics": _plain(self.metrics)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class EndReport:
    m: int
    beta: float
    theta: list
    decay: dict
    verdicts: dict
    distinct: list = field(default_factory=list)

    def __post_init__(self):
        n = 2 * self.m + 2
        if len(self.theta) != n:
            raise ValueError(f"expected {n} ideal points, got {len(self.theta)}")
        if not self.distinct:
            self.distinct = consecutive_distinct(self.theta)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "beta": float(self.beta),
            "theta": [float(t.theta) for t in self.theta],
            "distinct": [bool(x) for x in self.distinct],
            "decay": _plain(self.decay),
            "verdicts": {k: v.as_dict() for k, v in self.verdicts.items()},
        }


def consecutive_distinct(points: Sequence[IdealPoint], sep: float = DISTINCT_SEPARATION) -> list:
    """flags[k] says whether theta_k and theta_{k+1} (cyclically) are separated by more than sep."""
    n = len(points)
    return [
        hyp2.angular_separation(points[k].theta, points[(k + 1) % n].theta) > sep
        for k in range(n)
    ]


# --------------------------------------------------------------------------
# ideal endpoints of developed curves
# --------------------------------------------------------------------------

def _forward_endpoint(p: complex, q: complex) -> float:
    return hyp2.geodesic_between(hyp2.DiskPoint(p), hyp2.DiskPoint(q)).b.theta


def tail_ideal_point(z, tol: float = 1e-2, lags=(1, 2, 4, 8, 16)) -> tuple:
    """Ideal point approached by the last vertex of a disk polyline.

    Each estimate is the forward endpoint of the geodesic through a vertex
    ``lag`` steps back and the last vertex; the spread of the estimates must
    stay below ``tol``.  Returns (IdealPoint, spread).
    """
    z = np.asarray(z, dtype=complex).ravel()
    if z.size < 2:
        raise TailNotConverged("need at least two points")
    lags = [s for s in lags if s < z.size] or [1]
    est = [_forward_endpoint(z[-1 - s], z[-1]) for s in lags]
    spread = max(hyp2.angular_separation(est[0], e) for e in est)
    if spread > tol:
        raise TailNotConverged(f"tail direction spread {spread:.3g} exceeds {tol:g}")
    return IdealPoint(est[0]), float(spread)


class AsymptoticEstimate(NamedTuple):
    points: list
    cross_level: float
    angle_gap: float
    tail_spread: float


def asymptotic_points(ends: Sequence, levels=(-1, -2), tol: float = 1e-2) -> AsymptoticEstimate:
    """Ideal endpoints theta_0..theta_{2m+1} from developed ends.

    ``ends[j]`` are the immersion samples of the j-th chart; its sections
    end at theta_{2j} (u at its maximum) and theta_{2j+1} (u at its
    minimum).  Each tail is estimated at the two section indices in
    ``levels``; the first is reported.  ``cross_level`` is the largest
    hyperbolic distance between the tails of the two sections and
    ``angle_gap`` the largest angular disagreement of their estimates.
    """
    i1, i2 = levels
    pts, gap, cross, spread = [], 0.0, 0.0, 0.0
    for s in ends:
        for tail in (slice(None), slice(None, None, -1)):
            r1 = s.z[i1][tail]
            r2 = s.z[i2][tail]
            p1, s1 = tail_ideal_point(r1, tol)
            p2, s2 = tail_ideal_point(r2, tol)
            pts.append(p1)
            gap = max(gap, hyp2.angular_separation(p1.theta, p2.theta))
            cross = max(cross, hyp2.dist(complex(r1[-1]), complex(r2[-1])))
            spread = max(spread, s1, s2)
    return AsymptoticEstimate(pts, float(cross), float(gap), float(spread))


# --------------------------------------------------------------------------
# convergence to a geodesic
# --------------------------------------------------------------------------

def _chord_directions(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit direction at p of the geodesic from p to q."""
    t = (q - p) / (1.0 - np.conj(p) * q)
    return t / np.abs(t)


def _vertex_tangents(z: np.ndarray) -> np.ndarray:
    """Bisector of the chords to the neighbours; one-sided at the ends."""
    t = np.empty_like(z)
    fwd = _chord_directions(z[:-1], z[1:])
    bwd = -_chord_directions(z[1:], z[:-1])
    t[1:-1] = fwd[1:] + bwd[:-1]
    t[0] = fwd[0]
    t[-1] = bwd[-1]
    return t / np.abs(t)


def tangent_angles(curve, target: Geodesic) -> np.ndarray:
    """Unoriented angle at each vertex between the curve and the geodesic
    tangent transported from the vertex's foot on ``target``."""
    z = curve.z if isinstance(curve, Polyline) else np.asarray(curve, dtype=complex)
    _, feet = hyp2.signed_distances(z, target)
    tz = _vertex_tangents(z)
    out = np.empty(z.size)
    for i, (p, f, t) in enumerate(zip(z, feet, tz)):
        g = hyp2.tangent_direction(target, complex(f))
        if abs(p - f) > 0:
            g = hyp2.parallel_transport(complex(f), complex(p), g)
        a = abs(np.angle(t * np.conj(g)))
        out[i] = min(a, math.pi - a)
    return out


def c1_convergence_report(curves: Sequence, target: Geodesic, eps: float = 1e-2,
                          slack: float = 0.0) -> Verdict:
    """Check (i) band containment and (ii) tangent alignment along a sequence.

    Both per-curve maxima must be nonincreasing (up to ``slack``) and the
    last ones below ``eps``.
    """
    dists, angles = [], []
    for c in curves:
        z = c.z if isinstance(c, Polyline) else np.asarray(c, dtype=complex)
        sd, _ = hyp2.signed_distances(z, target)
        dists.append(float(np.max(np.abs(sd))))
        angles.append(float(np.max(tangent_angles(z, target))))
    d = np.array(dists)
    a = np.array(angles)
    band_mono = bool(np.all(np.diff(d) <= slack))
    tan_mono = bool(np.all(np.diff(a) <= slack))
    band_ok = band_mono and bool(d[-1] < eps)
    tan_ok = tan_mono and bool(a[-1] < eps)
    return Verdict("c1_convergence", band_ok and tan_ok, {
        "distance": dists, "angle": angles, "band_monotone": band_mono,
        "tangent_monotone": tan_mono, "band_ok": band_ok, "tangent_ok": tan_ok,
        "max_distance_increase": float(np.max(np.diff(d), initial=0.0)),
        "max_angle_increase": float(np.max(np.diff(a), initial=0.0)),
    })


# --------------------------------------------------------------------------
# curves of bounded curvature
# --------------------------------------------------------------------------

def _check_curvature(curve: Polyline, k_bound: float, enforce: bool) -> float:
    if not k_bound < 1.0:
        raise ValueError("k_bound must be below 1")
    kmax = float(np.max(np.abs(hyp2.discrete_curvature(curve))))
    if enforce and kmax > k_bound:
        raise CurvatureHypothesisViolated(f"curvature {kmax:.4g} exceeds the bound {k_bound:g}")
    return kmax


def count_crossings(sd: np.ndarray, seglen: np.ndarray, level: float,
                    angle_tol: float = TANGENCY_ANGLE) -> tuple:
    """Transversal crossings of the polyline with {signed distance = level}.

    Returns (count, ambiguous, min_sine): a crossing or touching whose
    sine of incidence is below sin(angle_tol) is ambiguous and not counted.
    """
    f = sd - level
    slope = np.abs(np.diff(sd)) / seglen
    s_tol = math.sin(angle_tol)
    cross = f[:-1] * f[1:] < 0
    count = 0
    ambiguous = 0
    min_sine = math.inf
    for i in np.flatnonzero(cross):
        min_sine = min(min_sine, slope[i])
        if slope[i] < s_tol:
            ambiguous += 1
        else:
            count += 1
    # vertices lying on the line within the tangency band
    near = np.flatnonzero(np.abs(f) <= s_tol * np.concatenate([seglen, seglen[-1:]]))
    for i in near:
        if f[i] == 0.0 or (0 < i < f.size - 1 and f[i - 1] * f[i + 1] > 0):
            ambiguous += 1
    return count, ambiguous, min_sine


def horizontal_graph_check(curve, gamma1: Geodesic, k_bound: float, n_rho: int = 64,
                           enforce_hypothesis: bool = True,
                           angle_tol: float = TANGENCY_ANGLE) -> Verdict:
    """Every equidistant line of gamma1 beyond rho_0 meets the curve once.

    rho_0 = max(d(c(0), gamma1), atanh k_bound); levels are sampled up to the
    largest distance the curve reaches on the side where it ends.
    ``enforce_hypothesis=False`` skips the curvature gate so counterexamples
    can be examined.
    """
    if not isinstance(curve, Polyline):
        curve = Polyline.from_array(curve)
    kmax = _check_curvature(curve, k_bound, enforce_hypothesis) if enforce_hypothesis else (
        float(np.max(np.abs(hyp2.discrete_curvature(curve)))) if len(curve) >= 3 else 0.0
    )
    z = curve.z
    sd, _ = hyp2.signed_distances(z, gamma1)
    seglen = curve.spacings()
    side = 1.0 if sd[-1] >= 0 else -1.0
    rho0 = max(abs(float(sd[0])), math.atanh(min(k_bound, 1.0 - 1e-15)) if k_bound >= 0 else 0.0)
    rho_max = float(np.max(side * sd))
    counts, amb, sines = [], 0, []
    if rho_max > rho0:
        rhos = rho0 + (rho_max - rho0) * (np.arange(1, n_rho + 1) - 0.5) / n_rho
        for rho in rhos:
            c_pos, a_pos, s_pos = count_crossings(sd, seglen, side * rho, angle_tol)
            c_neg, a_neg, s_neg = count_crossings(sd, seglen, -side * rho, angle_tol)
            counts.append(c_pos + c_neg)
            amb += a_pos + a_neg
            sines.append(min(s_pos, s_neg))
    else:
        rhos = np.array([])
    passed = bool(counts) and all(c == 1 for c in counts) and amb == 0
    return Verdict("horizontal_graph", passed, {
        "rho0": rho0, "rho_max": rho_max, "n_levels": len(counts),
        "max_count": max(counts) if counts else 0, "min_count": min(counts) if counts else 0,
        "ambiguous": amb, "min_sine": float(min(sines)) if sines else math.inf,
        "k_max": kmax,
    })


def unique_asymptote_check(curve, k_bound: float, length_floor: float = 10.0,
                           tail_frac: float = 0.25, spread_tol: float = 1e-2,
                           enforce_hypothesis: bool = True) -> Verdict:
    """Finite-length shadow of "the curve has a single ideal limit point".

    (a) over the last ``tail_frac`` of arclength the distance to the first
    vertex increases strictly; (b) the forward endpoints of the tail chords
    spread by less than ``spread_tol``.
    """
    if not isinstance(curve, Polyline):
        curve = Polyline.from_array(curve)
    if enforce_hypothesis:
        kmax = _check_curvature(curve, k_bound, True)
    else:
        kmax = float(np.max(np.abs(hyp2.discrete_curvature(curve))))
    length = curve.length()
    if length <= length_floor:
        raise ValueError(f"curve length {length:.4g} is below the floor {length_floor:g}")
    z = curve.z
    s = np.concatenate([[0.0], np.cumsum(curve.spacings())])
    tail = np.flatnonzero(s >= (1.0 - tail_frac) * length)
    r = hyp2.dist_array(np.full(tail.size, z[0]), z[tail])
    escape = bool(np.all(np.diff(r) > 0))
    ends = np.array([_forward_endpoint(z[i - 1], z[i]) for i in tail if i > 0])
    ref = ends[-1]
    spread = float(max(hyp2.angular_separation(ref, e) for e in ends))
    passed = escape and spread < spread_tol
    return Verdict("unique_asymptote", passed, {
        "length": length, "escape_monotone": escape, "tail_spread": spread,
        "ideal_angle": float(ref), "k_max": kmax,
    })


# --------------------------------------------------------------------------
# decay of the section curvature
# --------------------------------------------------------------------------

def curvature_decay_fit(samples, min_samples: int = 10, min_span: float = 4.0,
                        floor: float = 1e-14, flat_drop: float = 1e-3) -> dict:
    """Least-squares fit log|kappa| = log c2 - c1 |z| over (|z|, |kappa|) pairs.

    Samples with |kappa| at or below ``floor`` are dropped first.  The fit
    is flagged ``no_decay`` when the fitted curvature drops by less than
    the fraction ``flat_drop`` across the sampled range.
    """
    a = np.asarray(samples, dtype=float).reshape(-1, 2)
    r, k = a[:, 0], np.abs(a[:, 1])
    keep = np.isfinite(r) & np.isfinite(k) & (k > floor) & (r > 0)
    r, k = r[keep], k[keep]
    if r.size < min_samples:
        raise InsufficientSpan(f"{r.size} usable samples, need {min_samples}")
    span = float(r.max() / r.min())
    if span < min_span:
        raise InsufficientSpan(f"|z| spans a factor {span:.4g}, need {min_span:g}")
    y = np.log(k)
    slope, icept = np.polyfit(r, y, 1)
    res = y - (slope * r + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(res ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    c1 = float(-slope)
    drop = 1.0 - math.exp(-c1 * float(r.max() - r.min())) if c1 > 0 else 0.0
    return {
        "c1_fit": c1, "c2_fit": float(math.exp(icept)), "r2": float(r2),
        "n": int(r.size), "span": span, "no_decay": bool(drop < flat_drop),
    }


def section_decay_samples(d: hopf.HopfData, th: hopf.ThresholdSet, end, j: int,
                          C: float | None = None, params=None) -> np.ndarray:
    """(|z|, |kappa|) pairs along the traced level curve L_j at level C.

    The curve is traced in the z-plane, mapped to w = W(z), and the developed
    section of chart ``end`` nearest to Im w = C supplies the curvature at
    u = Re w.  Only points whose Re w falls inside the chart are kept.
    """
    from . import levelset

    params = params or levelset.DEFAULT_PARAMS
    v = end.v[:, 0]
    iv = int(np.argmin(np.abs(v - C))) if C is not None else v.size // 2
    iv = min(max(iv, 1), v.size - 2)
    C = float(v[iv])
    ls = levelset.level_structure(d, th, C, params=params)
    curve = next((c for c in ls.curves if c.kind == "L" and c.index == j), None)
    if curve is None:
        raise InsufficientSpan(f"no complete curve L_{j} at level {C:g}")
    w = hopf.W_value(d, curve.points, curve.thetas)
    u = end.u[iv]
    kappa = hyp2.discrete_curvature(end.z[iv])
    inside = (w.real > u[1]) & (w.real < u[-2])
    kap = np.interp(w.real[inside], u[1:-1], kappa)
    return np.column_stack([np.abs(curve.points[inside]), np.abs(kap)])


# --------------------------------------------------------------------------
# properness
# --------------------------------------------------------------------------

def properness_check(end, rows=None) -> Verdict:
    """Each developed section moves monotonically away from its midpoint
    towards both ends, so no section accumulates inside the disk."""
    nv, nu = end.z.shape
    rows = range(1, nv - 1) if rows is None else rows
    mid = nu // 2
    bad, worst = 0, math.inf
    for iv in rows:
        zr = end.z[iv]
        for half in (zr[mid:], zr[mid::-1]):
            r = hyp2.dist_array(np.full(half.size, half[0]), half)
            inc = np.diff(r)
            worst = min(worst, float(inc.min()))
            bad += int(np.any(inc <= 0))
    return Verdict("properness", bad == 0, {"rows": len(rows), "bad_halves": bad,
                                              "min_increment": worst})
