"""Level curves of Im W: circle crossings, tracing and classification.

A level curve {Im W = C} outside the core disk is either

* semi-complete (``kind == "H"``): it starts on a circle S_R inside the arc
  A_k(R) around alpha_k = k pi/(m+1) and escapes to infinity along that ray;
* complete (``kind == "L"``): both ends escape, along alpha_{2j}, alpha_{2j+1}
  when C > 0 and along alpha_{2j+1}, alpha_{2j+2} when C < 0.

Tracing uses a predictor-corrector scheme whose tangent is conj(sqrt phi)
(the direction of increasing Re W) and whose corrector is a Newton step
along the gradient of Im W.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import hopf, kernels
from .errors import (
    AmbiguousClassification,
    LeftWorkingAnnulus,
    RadiusTooSmall,
    StagnantTrace,
)
from .hopf import HopfData, ThresholdSet

_STATUS = {
    kernels.ESCAPED: "escape",
    kernels.CIRCLE: "circle",
    kernels.STAGNANT: "stagnant",
    kernels.BREAKDOWN: "breakdown",
}


@dataclass(frozen=True)
class TraceParams:
    """Step control for the level tracer.

    The step is ``min(step_frac |z|, max(w_step / |sqrt phi|, min_frac |z|))``;
    the corrector accepts ``|Im W - C| <= tol * max(1, |z| |sqrt phi|)``.
    """

    step_frac: float = 0.05
    w_step: float = 0.5
    min_frac: float = 0.005
    tol: float = 1e-9
    max_steps: int = 200_000
    max_newton: int = 30
    escape_factor: float = 1e3
    sector_margin: float | None = None

    def margin(self, m: int) -> float:
        if self.sector_margin is not None:
            return self.sector_margin
        return math.pi / (10 * (m + 1))


DEFAULT_PARAMS = TraceParams()


@dataclass
class RawTrace:
    C: float
    points: np.ndarray
    thetas: np.ndarray
    start_kind: str
    end_kind: str


@dataclass
class TracedCurve:
    C: float
    points: np.ndarray
    thetas: np.ndarray
    kind: str  # "H" semi-complete or "L" complete
    index: int
    asymptotic_dirs: tuple
    start: complex | None
    max_residual: float
    max_scaled_residual: float

    @property
    def label(self) -> str:
        return f"{self.kind}_{self.index}"


@dataclass
class LevelStructure:
    C: float
    curves: list
    counts: dict = field(default_factory=dict)


# --------------------------------------------------------------------------

def _arc_bounds(k: int, m: int, margin: float):
    a = k * math.pi / (m + 1)
    return a - margin, a + margin


def circle_level_points(d: HopfData, th: ThresholdSet, C: float, R: float,
                        margin: float | None = None) -> list:
    """The 2m+2 points of S_R where Im W = C, one in each arc A_k(R).

    Requires R >= max(R0, r(C)); otherwise RadiusTooSmall.
    """
    m = d.m
    if margin is None:
        margin = math.pi / (10 * (m + 1))
    try:
        rc = hopf.level_radius(d, C, th.R0)
    except hopf.NoConvergence as exc:
        raise RadiusTooSmall(str(exc)) from exc
    need = max(th.R0, rc)
    if R < need * (1 - 1e-12):
        raise RadiusTooSmall(f"R = {R:g} is below the certified radius {need:g} for C = {C:g}")
    out = []
    for k in range(2 * m + 2):
        lo, hi = _arc_bounds(k, m, margin)

        def f(t):
            return hopf.im_W(d, R * np.exp(1j * t), t) - C

        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            t = lo
        elif fhi == 0.0:
            t = hi
        elif np.sign(flo) == np.sign(fhi):
            raise RadiusTooSmall(f"no crossing of level {C:g} on arc {k} of S_{R:g}")
        else:
            t = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        out.append(R * np.exp(1j * t))
    return out


def _outward_direction(d: HopfData, z: complex) -> int:
    sp = hopf.sqrt_phi(d, z)
    return 1 if (np.conj(sp) * np.conj(z)).real > 0 else -1


def trace_raw(d: HopfData, th: ThresholdSet, C: float, start: complex, direction: int,
              theta0: float | None = None, escape_radius: float | None = None,
              r_inner: float | None = None, params: TraceParams = DEFAULT_PARAMS) -> RawTrace:
    """Trace one branch of {Im W = C} from ``start``; returns the raw polyline."""
    if escape_radius is None:
        escape_radius = params.escape_factor * th.R2
    if r_inner is None:
        r_inner = th.R1
    start = complex(start)
    if theta0 is None:
        theta0 = float(np.angle(start))
    pts, ths, status = kernels.trace_level_curve(
        d.pc, d.lc, float(C), start, float(theta0), int(direction), float(r_inner),
        float(escape_radius), params.step_frac, params.w_step, params.min_frac,
        params.tol, params.max_steps, params.max_newton,
    )
    return RawTrace(float(C), np.asarray(pts), np.asarray(ths), "seed", _STATUS[int(status)])


def _raise_for(kind: str, C: float):
    if kind == "stagnant":
        raise StagnantTrace(f"trace of level {C:g} stalled before escaping")
    if kind == "breakdown":
        raise LeftWorkingAnnulus(f"trace of level {C:g} left the working annulus")


def trace_level(d: HopfData, th: ThresholdSet, C: float, start: complex,
                direction: int | None = None, escape_radius: float | None = None,
                params: TraceParams = DEFAULT_PARAMS, classify_result: bool = True):
    """Trace a semi-complete curve from a point ``start`` on a circle S_R.

    ``direction`` is +1 (Re W increasing) or -1; by default the branch
    leaving the circle outward is followed.
    """
    if direction is None:
        direction = _outward_direction(d, start)
    raw = trace_raw(d, th, C, start, direction, escape_radius=escape_radius, params=params)
    raw.start_kind = "circle"
    _raise_for(raw.end_kind, C)
    if not classify_result:
        return raw
    return classify(raw, th, d, params)


def _direction_index(theta: float, m: int, margin: float):
    step = math.pi / (m + 1)
    kr = int(math.floor(theta / step + 0.5))
    if abs(theta - kr * step) > margin:
        return None
    return kr % (2 * m + 2)


def _residuals(d: HopfData, C: float, z: np.ndarray, thetas: np.ndarray):
    imw = hopf.im_W(d, z, thetas)
    scale = np.maximum(1.0, np.abs(z) * np.abs(hopf.sqrt_phi(d, z)))
    res = np.abs(imw - C)
    return float(np.max(res)), float(np.max(res / scale))


def classify(raw: RawTrace, th: ThresholdSet, d: HopfData,
             params: TraceParams = DEFAULT_PARAMS) -> TracedCurve:
    """Classify a completed trace as semi-complete H_k or complete L_j."""
    m = d.m
    n = 2 * m + 2
    margin = params.margin(m)
    kinds = (raw.start_kind, raw.end_kind)
    res, sres = _residuals(d, raw.C, raw.points, raw.thetas)
    if sorted(kinds) == ["circle", "escape"]:
        if raw.end_kind == "escape":
            t_end, start = raw.thetas[-1], raw.points[0]
        else:
            t_end, start = raw.thetas[0], raw.points[-1]
        k = _direction_index(float(t_end), m, margin)
        if k is None:
            raise AmbiguousClassification(
                f"escape direction {t_end:.6g} is not within {margin:.3g} of any alpha_k"
            )
        return TracedCurve(raw.C, raw.points, raw.thetas, "H", k, (float(t_end),),
                           complex(start), res, sres)
    if kinds == ("escape", "escape"):
        ka = _direction_index(float(raw.thetas[0]), m, margin)
        kb = _direction_index(float(raw.thetas[-1]), m, margin)
        if ka is None or kb is None or ka == kb and m > 0:
            raise AmbiguousClassification("complete curve escapes along unexpected directions")
        pair = {ka, kb}
        j = None
        if raw.C > 0:
            lo = min(pair)
            if lo % 2 == 0 and pair == {lo, lo + 1}:
                j = lo // 2
        elif raw.C < 0:
            odd = [k for k in pair if k % 2 == 1]
            if odd and pair == {odd[0], (odd[0] + 1) % n}:
                j = (odd[0] - 1) // 2
        if j is None:
            raise AmbiguousClassification(
                f"directions {sorted(pair)} inconsistent with the sign of C = {raw.C:g}"
            )
        return TracedCurve(raw.C, raw.points, raw.thetas, "L", j,
                           (float(raw.thetas[0]), float(raw.thetas[-1])), None, res, sres)
    raise AmbiguousClassification(f"trace ends {kinds} fit neither curve type")


def _radial_seed(d: HopfData, th: ThresholdSet, C: float, theta: float) -> complex:
    def f(r):
        return hopf.im_W(d, r * np.exp(1j * theta), theta) - C

    lo = th.R1
    hi = 2 * lo
    flo = f(lo)
    while np.sign(f(hi)) == np.sign(flo):
        hi *= 2
        if hi > 1e12:
            raise RadiusTooSmall(f"no crossing of level {C:g} on the ray {theta:.6g}")
    r = brentq(f, lo, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    return r * np.exp(1j * theta)


def seed_rays(m: int, C: float) -> list:
    """Ray angles where the complete curves of level C are seeded."""
    step = math.pi / (m + 1)
    off = 0.5 if C > 0 else 1.5
    return [(2 * j + off) * step for j in range(m + 1)]


def level_structure(d: HopfData, th: ThresholdSet, C: float,
                    escape_radius: float | None = None,
                    params: TraceParams = DEFAULT_PARAMS) -> LevelStructure:
    """Trace and classify every component of {Im W = C} outside the core."""
    curves = []
    if abs(C) <= th.C0:
        # a small margin keeps the arc endpoints strictly off the level
        R = max(th.R1, 1.01 * hopf.level_radius(d, C, th.R0))
        for z in circle_level_points(d, th, C, R, params.margin(d.m)):
            curves.append(trace_level(d, th, C, z, escape_radius=escape_radius, params=params))
    else:
        for ang in seed_rays(d.m, C):
            z = _radial_seed(d, th, C, ang)
            fwd = trace_raw(d, th, C, z, +1, theta0=ang, escape_radius=escape_radius, params=params)
            bwd = trace_raw(d, th, C, z, -1, theta0=ang, escape_radius=escape_radius, params=params)
            _raise_for(fwd.end_kind, C)
            _raise_for(bwd.end_kind, C)
            raw = RawTrace(
                float(C),
                np.concatenate([bwd.points[::-1], fwd.points[1:]]),
                np.concatenate([bwd.thetas[::-1], fwd.thetas[1:]]),
                bwd.end_kind,
                fwd.end_kind,
            )
            curves.append(classify(raw, th, d, params))
    counts = {"H": sum(c.kind == "H" for c in curves), "L": sum(c.kind == "L" for c in curves)}
    return LevelStructure(float(C), curves, counts)


def expected_counts(m: int, C: float, C0: float) -> dict:
    if abs(C) <= C0:
        return {"H": 2 * m + 2, "L": 0}
    return {"H": 0, "L": m + 1}


def sector_violations(curve: TracedCurve, d: HopfData, th: ThresholdSet,
                      margin: float | None = None) -> int:
    """Number of vertices of an H_k curve beyond R2 outside the truncated sector around alpha_k."""
    if curve.kind != "H":
        return 0
    m = d.m
    if margin is None:
        margin = math.pi / (10 * (m + 1))
    a = curve.index * math.pi / (m + 1)
    sel = np.abs(curve.points) > th.R2
    dev = np.angle(curve.points[sel] * np.exp(-1j * a))
    return int(np.sum(np.abs(dev) >= margin))


def re_W_along(curve: TracedCurve, d: HopfData) -> np.ndarray:
    return np.real(hopf.W_value(d, curve.points, curve.thetas))
