"""Geometry of an end from its sinh-Gordon field omega.

In the w = u + iv chart the horizontal projection F pulls the hyperbolic
metric back to ``4 cosh^2(omega) du^2 + 4 sinh^2(omega) dv^2`` and the height
is ``h = 2v``, so the induced metric is conformal with factor
``4 cosh^2(omega)``.  Horizontal sections are the lines v = const.

The projection is rebuilt by transporting an orthonormal frame [F, e1, e2]
of the hyperboloid model (Minkowski metric diag(-1, 1, 1)) along grid
lines, with

    dF  = A du e1 + B dv e2,        A = 2 cosh(omega), B = 2 sinh(omega),
    de1 = A du F + (P du + Q dv) e2, P = -omega_v,     Q = omega_u,

and then mapped to the Poincare disk.  Each grid step applies the exact
exponential of the midpoint generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _pykernels, hyp2, kernels
from .errors import DegenerateRegion, FrameDrift
from .hopf import HopfData
from .sinhgordon import OmegaField, discrete_laplacian, gradient

DEGENERACY_FLOOR = 1e-6
DEFAULT_DRIFT_TOL = 0.5


@dataclass(frozen=True)
class MetricSample:
    guu: float
    gvv: float
    induced: float
    energy: float

    @property
    def consistency(self) -> float:
        """|gvv + 4 - induced|: the height contributes 4 dv^2."""
        return abs(self.gvv + 4.0 - self.induced)


@dataclass
class ImmersionSamples:
    u: np.ndarray
    v: np.ndarray
    z: np.ndarray  # disk positions, shape (nv, nu)
    h: np.ndarray
    frame_angle: np.ndarray
    n3: np.ndarray
    kappa: np.ndarray
    K: np.ndarray
    seed: tuple
    drift: float = 0.0
    drift_per_area: float = 0.0
    frames: np.ndarray | None = field(default=None, repr=False)

    def row(self, iv: int) -> np.ndarray:
        """Disk polyline of the horizontal section v = v[iv]."""
        return self.z[iv]


# --------------------------------------------------------------------------
# pointwise quantities
# --------------------------------------------------------------------------

def metric_at(field: OmegaField, node) -> MetricSample:
    iu, iv = node
    w = field.at(iu, iv)
    c = math.cosh(w)
    s = math.sinh(w)
    guu = 4.0 * c * c
    gvv = 4.0 * s * s
    return MetricSample(guu, gvv, guu, 2.0 * math.cosh(2.0 * w))


def metric_arrays(field: OmegaField):
    w = field.values
    guu = 4.0 * np.cosh(w) ** 2
    gvv = 4.0 * np.sinh(w) ** 2
    return guu, gvv, guu.copy(), 2.0 * np.cosh(2.0 * w)


def vertical_normal(field: OmegaField, node) -> float:
    iu, iv = node
    return math.tanh(field.at(iu, iv))


def horizontal_curvature_field(field: OmegaField) -> np.ndarray:
    """|kappa| = |omega_v| / (2 cosh omega) on all nodes (one-sided on edges)."""
    _, wv = gradient(field)
    return np.abs(wv) / (2.0 * np.cosh(field.values))


def _require_interior(field: OmegaField, node):
    iu, iv = node
    g = field.grid
    if not (0 < iu < g.nu - 1 and 0 < iv < g.nv - 1):
        raise ValueError(f"node {node} is not an interior node")


def horizontal_curvature(field: OmegaField, node) -> float:
    """Geodesic curvature magnitude of the horizontal section through an interior node."""
    _require_interior(field, node)
    iu, iv = node
    w = field.values
    wv = (w[iv + 1, iu] - w[iv - 1, iu]) / (2.0 * field.grid.dv)
    return abs(wv) / (2.0 * math.cosh(w[iv, iu]))


def gauss_curvature_field(field: OmegaField) -> np.ndarray:
    """K = -tanh(w) Lap(w) / (4 cosh^2 w) - |grad w|^2 / (4 cosh^4 w), interior nodes."""
    w = field.values[1:-1, 1:-1]
    lap = discrete_laplacian(field.grid, field.values)
    wu, wv = gradient(field)
    g2 = wu[1:-1, 1:-1] ** 2 + wv[1:-1, 1:-1] ** 2
    c2 = np.cosh(w) ** 2
    return -np.tanh(w) * lap / (4.0 * c2) - g2 / (4.0 * c2 * c2)


def gauss_curvature(field: OmegaField, node) -> float:
    _require_interior(field, node)
    iu, iv = node
    return float(gauss_curvature_field(field)[iv - 1, iu - 1])


def gauss_curvature_conformal(field: OmegaField) -> np.ndarray:
    """Independent evaluation K = -Lap log(2 cosh w) / (4 cosh^2 w)."""
    lam = np.log(2.0 * np.cosh(field.values))
    lap = discrete_laplacian(field.grid, lam)
    return -lap / (4.0 * np.cosh(field.values[1:-1, 1:-1]) ** 2)


def pullback_curvature(field: OmegaField, floor: float = 0.05) -> np.ndarray:
    """Gauss curvature of 4cosh^2 du^2 + 4sinh^2 dv^2 at interior nodes with |w| > floor.

    For an orthogonal metric with sqrt(E) = 2 cosh w and sqrt(G) = 2 sinh w it
    reduces to -Lap(w) / (2 sinh 2w); nodes below the floor are NaN.
    """
    w = field.values[1:-1, 1:-1]
    lap = discrete_laplacian(field.grid, field.values)
    out = np.full_like(w, np.nan)
    sel = np.abs(w) > floor
    out[sel] = -lap[sel] / (2.0 * np.sinh(2.0 * w[sel]))
    return out


# --------------------------------------------------------------------------
# development
# --------------------------------------------------------------------------

def _to_hyperboloid(p: complex) -> np.ndarray:
    s = abs(p) ** 2
    return np.array([1.0 + s, 2.0 * p.real, 2.0 * p.imag]) / (1.0 - s)


def _tangent_at(p: complex, t: complex) -> np.ndarray:
    s = abs(p) ** 2
    D = 1.0 - s
    ds = 2.0 * (p.conjugate() * t).real
    X = np.array([
        2.0 * ds / D ** 2,
        (2.0 * t.real * D + 2.0 * p.real * ds) / D ** 2,
        (2.0 * t.imag * D + 2.0 * p.imag * ds) / D ** 2,
    ])
    n2 = -X[0] ** 2 + X[1] ** 2 + X[2] ** 2
    return X / math.sqrt(n2)


def seed_frame(p: complex, direction: float) -> np.ndarray:
    """Frame [F, e1, e2] (as columns) at disk point p with e1 pointing at angle ``direction``."""
    p = complex(p)
    t = complex(math.cos(direction), math.sin(direction))
    F = _to_hyperboloid(p)
    e1 = _tangent_at(p, t)
    e2 = _tangent_at(p, 1j * t)
    return np.column_stack([F, e1, e2])


def _to_disk(Phi: np.ndarray):
    F = Phi[..., :, 0]
    z = (F[..., 1] + 1j * F[..., 2]) / (1.0 + F[..., 0])
    e = Phi[..., :, 1]
    dz = (e[..., 1] + 1j * e[..., 2]) / (1.0 + F[..., 0]) - (F[..., 1] + 1j * F[..., 2]) * e[..., 0] / (
        1.0 + F[..., 0]
    ) ** 2
    return z, np.angle(dz)


def _coefficients(values: np.ndarray, grid):
    A = 2.0 * np.cosh(values)
    B = 2.0 * np.sinh(values)
    wv, wu = np.gradient(values, grid.dv, grid.du, edge_order=2)
    return A, B, -wv, wu


def plaquette_holonomy(field: OmegaField, zero_region: bool = False) -> float:
    """Largest frame holonomy around a grid cell, per unit cell area.

    Compares the two transports u-then-v and v-then-u across every cell
    away from the boundary ring, where one-sided differences and corner
    singularities dominate; for compatible data this vanishes as the grid
    is refined.
    """
    g = field.grid
    vals = np.zeros_like(field.values) if zero_region else np.asarray(field.values, float)
    A, B, P, Q = _coefficients(vals, g)
    Eu = _pykernels.so21_exp(0.5 * (A[:, 1:] + A[:, :-1]) * g.du, 0.0,
                             0.5 * (P[:, 1:] + P[:, :-1]) * g.du)
    Ev = _pykernels.so21_exp(0.0, 0.5 * (B[1:] + B[:-1]) * g.dv,
                             0.5 * (Q[1:] + Q[:-1]) * g.dv)
    loop_a = Eu[:-1] @ Ev[:, 1:]
    loop_b = Ev[:, :-1] @ Eu[1:]
    hol = np.linalg.norm(loop_a - loop_b, axis=(-2, -1))[1:-1, 1:-1]
    return float(np.max(hol)) / (g.du * g.dv) if hol.size else 0.0


def develop(field: OmegaField, seed=None, zero_region: bool = False,
            drift_tol: float | None = DEFAULT_DRIFT_TOL, order: int = 1) -> ImmersionSamples:
    """Develop the horizontal projection of the end into the disk.

    seed = (node (iu, iv), disk point, angle of e1); by default the middle
    of the bottom row is sent to the origin with e1 along the real axis.
    ``zero_region`` declares omega identically zero (the image is then one
    geodesic).  ``order=1`` integrates the seed column first and then each
    row along u, which keeps sections accurate; ``order=0`` does the
    reverse.  The cell holonomy per unit area is checked against
    ``drift_tol``; the largest disagreement between the two orders is
    reported as ``drift``.
    """
    g = field.grid
    vals = np.array(field.values, dtype=float)
    inner = vals[1:-1, 1:-1]
    if zero_region:
        vals = np.zeros_like(vals)
    elif np.any(inner > DEGENERACY_FLOOR) and np.any(inner < -DEGENERACY_FLOOR):
        raise DegenerateRegion("omega changes sign inside the region; split it or flag it")
    if seed is None:
        seed = ((g.nu // 2, 0), 0j, 0.0)
    (i0, j0), p, ang = seed
    p = hyp2.DiskPoint(p).z if not isinstance(p, hyp2.DiskPoint) else p.z
    Phi0 = seed_frame(p, float(ang))
    A, B, P, Q = _coefficients(vals, g)
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    Phi = kernels.develop_frames(A, B, P, Q, g.du, g.dv, int(i0), int(j0), Phi0, order)
    z, angle = _to_disk(Phi)
    per_area = plaquette_holonomy(field, zero_region)
    if drift_tol is not None and per_area > drift_tol:
        raise FrameDrift(f"cell holonomy {per_area:.3g} per unit area exceeds {drift_tol:g}")
    Phi_alt = kernels.develop_frames(A, B, P, Q, g.du, g.dv, int(i0), int(j0), Phi0, 1 - order)
    z_alt, _ = _to_disk(Phi_alt)
    drift = float(np.max(hyp2.dist_array(z, z_alt)))
    U, V = g.mesh()
    kappa = horizontal_curvature_field(field)
    K = np.full_like(vals, np.nan)
    K[1:-1, 1:-1] = gauss_curvature_field(field)
    return ImmersionSamples(
        u=U, v=V, z=z, h=2.0 * V, frame_angle=angle, n3=np.tanh(field.values),
        kappa=kappa, K=K, seed=((int(i0), int(j0)), p, float(ang)), drift=drift,
        drift_per_area=per_area, frames=Phi,
    )


IMMERSION_FORMAT_VERSION = 1
IMMERSION_COLUMNS = ("u", "v", "re_F", "im_F", "h", "n3", "kappa", "K")


def write_immersion_csv(path, samples: ImmersionSamples) -> None:
    """One row per node (v outer), columns IMMERSION_COLUMNS; NaN where undefined."""
    cols = (samples.u, samples.v, samples.z.real, samples.z.imag, samples.h, samples.n3,
            samples.kappa, samples.K)
    flat = np.column_stack([np.asarray(c, dtype=float).ravel() for c in cols])
    lines = [f"# format_version={IMMERSION_FORMAT_VERSION}", ",".join(IMMERSION_COLUMNS)]
    lines.extend(",".join(format(float(x), ".17g") for x in row) for row in flat)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def isometry_error(samples: ImmersionSamples, field: OmegaField, b_floor: float = 1e-3):
    """Largest relative mismatch between developed edge lengths and metric lengths.

    Only edges joining interior nodes count (the boundary ring is excluded).
    Vertical edges shorter than ``b_floor * dv`` are skipped since their
    relative error is meaningless near omega = 0.
    """
    g = field.grid
    A = 2.0 * np.cosh(field.values)
    B = 2.0 * np.abs(np.sinh(field.values))
    z = samples.z
    du_len = hyp2.dist_array(z[1:-1, 1:-2], z[1:-1, 2:-1])
    du_ref = g.du * 0.5 * (A[1:-1, 1:-2] + A[1:-1, 2:-1])
    err_u = float(np.max(np.abs(du_len - du_ref) / du_ref)) if du_ref.size else 0.0
    dv_len = hyp2.dist_array(z[1:-2, 1:-1], z[2:-1, 1:-1])
    dv_ref = g.dv * 0.5 * (B[1:-2, 1:-1] + B[2:-1, 1:-1])
    sel = dv_ref > b_floor * g.dv
    err_v = float(np.max(np.abs(dv_len[sel] - dv_ref[sel]) / dv_ref[sel])) if np.any(sel) else 0.0
    return {"u": err_u, "v": err_v}


# --------------------------------------------------------------------------
# conjugation
# --------------------------------------------------------------------------

def conjugate(d: HopfData) -> HopfData:
    """Hopf data of the conjugate end: sqrt(phi*) = -i sqrt(phi), so W* = -i W."""
    return HopfData(d.m, d.poly, tuple(-1j * c for c in d.laurent), -1j * d.lead)


def conjugate_height(d: HopfData, z, theta=None):
    """Height of the conjugate end, -2 Re W."""
    from .hopf import W_value

    return -2.0 * np.real(W_value(d, z, theta))
