"""Finite-difference solver for Delta omega = 2 sinh(2 omega) on w-plane rectangles.

Grids are node-centred; field values are stored as arrays of shape
``(nv, nu)`` so that ``values[iv, iu]`` sits at ``w = u0 + iu du + i (v0 + iv dv)``.
Dirichlet data are given per edge; the ``physical`` edges are the ones the
boundary distance d(w) is measured to (the other edges only truncate the
domain).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateExtent, NewtonDiverged, NotConverged

TRUST = 5.0
EDGES = ("bottom", "top", "left", "right")


@dataclass(frozen=True)
class GridSpec:
    u0: float
    u1: float
    v0: float
    v1: float
    du: float
    dv: float
    nu: int
    nv: int

    @property
    def u(self) -> np.ndarray:
        return self.u0 + self.du * np.arange(self.nu)

    @property
    def v(self) -> np.ndarray:
        return self.v0 + self.dv * np.arange(self.nv)

    def mesh(self):
        return np.meshgrid(self.u, self.v)

    def as_dict(self) -> dict:
        return {"u": [self.u0, self.u1], "v": [self.v0, self.v1], "du": self.du, "dv": self.dv}


def _count(lo, hi, h, name):
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(h)):
        raise DegenerateExtent(f"{name}: non-finite extent or spacing")
    if h <= 0:
        raise DegenerateExtent(f"{name}: spacing must be positive")
    if hi <= lo:
        raise DegenerateExtent(f"{name}: empty range [{lo}, {hi}]")
    n = int(round((hi - lo) / h)) + 1
    if n < 8:
        raise DegenerateExtent(f"{name}: {n} nodes, need at least 8")
    return n, (hi - lo) / (n - 1)


def make_grid(u_range, v_range, du: float, dv: float | None = None) -> GridSpec:
    """Validated grid; spacings are adjusted to divide the extents exactly."""
    if dv is None:
        dv = du
    u0, u1 = map(float, u_range)
    v0, v1 = map(float, v_range)
    nu, du_eff = _count(u0, u1, float(du), "u")
    nv, dv_eff = _count(v0, v1, float(dv), "v")
    return GridSpec(u0, u1, v0, v1, du_eff, dv_eff, nu, nv)


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet data per edge: a constant or an array of edge samples.

    Bottom/top samples have length nu, left/right length nv; at corners the
    bottom and top values win.
    """

    bottom: object = 0.0
    top: object = 0.0
    left: object = 0.0
    right: object = 0.0
    physical: tuple = ("bottom",)

    def __post_init__(self):
        for e in EDGES:
            a = np.asarray(getattr(self, e), dtype=float)
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{e} boundary data must be finite")
            if np.any(np.abs(a) > TRUST):
                raise ValueError(f"{e} boundary data exceed the trust bound |omega| <= {TRUST}")
        phys = tuple(self.physical)
        for e in phys:
            if e not in EDGES:
                raise ValueError(f"unknown edge {e!r}")
        object.__setattr__(self, "physical", phys)

    def fill(self, grid: GridSpec) -> np.ndarray:
        out = np.zeros((grid.nv, grid.nu))
        out[:, 0] = np.broadcast_to(np.asarray(self.left, float), (grid.nv,))
        out[:, -1] = np.broadcast_to(np.asarray(self.right, float), (grid.nv,))
        out[0, :] = np.broadcast_to(np.asarray(self.bottom, float), (grid.nu,))
        out[-1, :] = np.broadcast_to(np.asarray(self.top, float), (grid.nu,))
        return out

    def as_dict(self) -> dict:
        def enc(x):
            a = np.asarray(x, dtype=float)
            return float(a) if a.ndim == 0 else a.tolist()

        out = {e: enc(getattr(self, e)) for e in EDGES}
        out["physical"] = list(self.physical)
        return out


@dataclass
class OmegaField:
    grid: GridSpec
    values: np.ndarray
    bc: BoundaryCondition | None = None
    residual_sup: float = float("nan")
    converged: bool = False
    history: list = field(default_factory=list)

    def at(self, iu: int, iv: int) -> float:
        return float(self.values[iv, iu])


def field_from_function(grid: GridSpec, fn, physical=("bottom",)) -> OmegaField:
    """Field sampled from fn(u, v); used for synthetic data and tests."""
    U, V = grid.mesh()
    vals = np.asarray(fn(U, V), dtype=float) * np.ones_like(U)
    bc = BoundaryCondition(
        bottom=vals[0].copy(), top=vals[-1].copy(), left=vals[:, 0].copy(),
        right=vals[:, -1].copy(), physical=physical,
    ) if np.all(np.abs(vals) <= TRUST) else None
    f = OmegaField(grid, vals, bc)
    f.residual_sup = residual_sup(f)
    return f


# --------------------------------------------------------------------------
# discretization
# --------------------------------------------------------------------------

def _second_difference(n: int, h: float):
    e = np.ones(n)
    return sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], format="csr") / (h * h)


def _operator(grid: GridSpec):
    mu, mv = grid.nu - 2, grid.nv - 2
    Du = _second_difference(mu, grid.du)
    Dv = _second_difference(mv, grid.dv)
    return (sp.kron(sp.identity(mv), Du) + sp.kron(Dv, sp.identity(mu))).tocsc()


def _boundary_term(grid: GridSpec, full: np.ndarray) -> np.ndarray:
    b = np.zeros((grid.nv - 2, grid.nu - 2))
    b[:, 0] += full[1:-1, 0] / grid.du ** 2
    b[:, -1] += full[1:-1, -1] / grid.du ** 2
    b[0, :] += full[0, 1:-1] / grid.dv ** 2
    b[-1, :] += full[-1, 1:-1] / grid.dv ** 2
    return b.ravel()


def discrete_laplacian(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """5-point Laplacian at interior nodes, shape (nv-2, nu-2)."""
    w = values
    return (
        (w[1:-1, 2:] - 2 * w[1:-1, 1:-1] + w[1:-1, :-2]) / grid.du ** 2
        + (w[2:, 1:-1] - 2 * w[1:-1, 1:-1] + w[:-2, 1:-1]) / grid.dv ** 2
    )


def residual_field(field: OmegaField) -> np.ndarray:
    v = field.values
    return discrete_laplacian(field.grid, v) - 2.0 * np.sinh(2.0 * v[1:-1, 1:-1])


def residual_sup(field: OmegaField) -> float:
    """Sup over interior nodes of |Delta_h omega - 2 sinh 2 omega|."""
    r = residual_field(field)
    return float(np.max(np.abs(r))) if r.size else 0.0


def solve(grid: GridSpec, bc: BoundaryCondition, tol: float = 1e-10,
          contract: float = 1e-8, max_iter: int = 60) -> OmegaField:
    """Damped Newton solve of the 5-point discretization.

    Starts from the harmonic extension of the boundary data, halves the
    step until the sup-norm residual decreases, and keeps iterates inside
    the trust region |omega| <= 5.
    """
    full = bc.fill(grid)
    L = _operator(grid)
    b = _boundary_term(grid, full)
    x = spla.spsolve(L, -b)
    x = np.clip(x, -TRUST, TRUST)

    def F(x):
        return L @ x + b - 2.0 * np.sinh(2.0 * x)

    r = F(x)
    rn = float(np.max(np.abs(r))) if r.size else 0.0
    history = [rn]
    n = x.size
    for _ in range(max_iter):
        if rn < tol:
            break
        J = (L - sp.diags(4.0 * np.cosh(2.0 * x), 0, shape=(n, n))).tocsc()
        dx = spla.splu(J).solve(-r)
        alpha = 1.0
        while True:
            xt = np.clip(x + alpha * dx, -TRUST, TRUST)
            rt = F(xt)
            rtn = float(np.max(np.abs(rt)))
            if rtn < (1.0 - 1e-4 * alpha) * rn or alpha < 1e-6:
                break
            alpha *= 0.5
        if not np.isfinite(rtn) or rtn >= rn:
            full[1:-1, 1:-1] = x.reshape(grid.nv - 2, grid.nu - 2)
            raise NewtonDiverged("line search failed to reduce the residual", full, history)
        x, r, rn = xt, rt, rtn
        history.append(rn)
    full[1:-1, 1:-1] = x.reshape(grid.nv - 2, grid.nu - 2)
    if not rn < contract:
        raise NewtonDiverged(f"residual {rn:.3g} above {contract:g}", full, history)
    out = OmegaField(grid, full, bc, rn, True, history)
    out.residual_sup = residual_sup(out)
    return out


# --------------------------------------------------------------------------
# decay diagnostics
# --------------------------------------------------------------------------

def boundary_distance(grid: GridSpec, physical=("bottom",)) -> np.ndarray:
    """Distance from each node to the nearest physical edge."""
    U, V = grid.mesh()
    parts = []
    if "bottom" in physical:
        parts.append(V - grid.v0)
    if "top" in physical:
        parts.append(grid.v1 - V)
    if "left" in physical:
        parts.append(U - grid.u0)
    if "right" in physical:
        parts.append(grid.u1 - U)
    if not parts:
        raise ValueError("at least one physical edge is required")
    return np.min(parts, axis=0)


def gradient(field: OmegaField):
    """(omega_u, omega_v) by central differences, one-sided on the boundary."""
    g = field.grid
    wv, wu = np.gradient(field.values, g.dv, g.du, edge_order=2)
    return wu, wv


def decay_report(field: OmegaField, d_value: float = 1.0, d_gradient: float = 2.0,
                 d_shell: float = 2.0) -> dict:
    """Fitted decay constants of omega and its gradient against the boundary distance."""
    if not field.converged:
        raise NotConverged("decay report needs a converged field")
    g = field.grid
    physical = field.bc.physical if field.bc is not None else ("bottom",)
    dist = boundary_distance(g, physical)
    interior = np.zeros_like(dist, dtype=bool)
    interior[1:-1, 1:-1] = True
    w = np.abs(field.values)
    wu, wv = gradient(field)
    grad = np.hypot(wu, wv)
    sel = interior & (dist >= d_value)
    K0 = float(np.max(w[sel] * np.cosh(dist[sel]))) if np.any(sel) else 0.0
    selg = interior & (dist >= d_gradient)
    delta = float(np.max(grad[selg] * np.exp(dist[selg]))) if np.any(selg) else 0.0
    width = max(g.du, g.dv)
    sels = interior & (dist >= d_shell)
    shells = np.floor((dist[sels] - d_shell) / width + 1e-9).astype(int)
    if shells.size:
        maxima = np.full(shells.max() + 1, -np.inf)
        np.maximum.at(maxima, shells, w[sels])
        maxima = maxima[np.isfinite(maxima)]
        diffs = np.diff(maxima)
        scale = max(float(np.max(maxima)), 1e-300)
        monotone = bool(np.all(diffs <= 1e-12 * scale))
    else:
        monotone = True
    return {"K0_fit": K0, "delta_fit": delta, "monotone_ok": monotone}


def bump_condition(grid: GridSpec, amplitude: float = 0.2) -> BoundaryCondition:
    """Smooth bottom data amplitude * cos^2 over the u-extent, zero elsewhere.

    The data vanish to second order at the bottom corners, which keeps the
    solution free of corner singularities.
    """
    L = 0.5 * (grid.u1 - grid.u0)
    mid = 0.5 * (grid.u0 + grid.u1)
    bottom = amplitude * np.cos(0.5 * np.pi * (grid.u - mid) / L) ** 2
    return BoundaryCondition(bottom=bottom)


# --------------------------------------------------------------------------
# CSV exchange
# --------------------------------------------------------------------------

FIELD_FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(path, field: OmegaField) -> None:
    """Versioned header line, the grid line ``nu,nv,u0,v0,du,dv``, then
    the values row-major (v outer), one per line."""
    g = field.grid
    lines = [
        f"# format_version={FIELD_FORMAT_VERSION}",
        "nu,nv,u0,v0,du,dv",
        ",".join([str(g.nu), str(g.nv), _fmt(g.u0), _fmt(g.v0), _fmt(g.du), _fmt(g.dv)]),
    ]
    lines.extend(_fmt(x) for x in np.asarray(field.values, dtype=float).ravel())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> OmegaField:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines[0].startswith("# format_version="):
        raise ValueError("missing format_version line")
    version = int(lines[0].split("=", 1)[1])
    if version != FIELD_FORMAT_VERSION:
        raise ValueError(f"unsupported field format version {version}")
    nu, nv, u0, v0, du, dv = lines[2].split(",")
    nu, nv = int(nu), int(nv)
    u0, v0, du, dv = map(float, (u0, v0, du, dv))
    vals = np.array([float(x) for x in lines[3:]])
    if vals.size != nu * nv:
        raise ValueError(f"expected {nu * nv} values, found {vals.size}")
    grid = GridSpec(u0, u0 + du * (nu - 1), v0, v0 + dv * (nv - 1), du, dv, nu, nv)
    f = OmegaField(grid, vals.reshape(nv, nu))
    f.residual_sup = residual_sup(f)
    return f
