"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` function for function and are used when the
compiled extension is unavailable or ``MINEND_PURE_PYTHON=1`` is set.
"""
import cmath
import math

import numpy as np

ESCAPED = 0
CIRCLE = 1
STAGNANT = 2
BREAKDOWN = 3


# --------------------------------------------------------------------------
# polyline curvature
# --------------------------------------------------------------------------

def polyline_curvature(z):
    """Signed geodesic curvature at interior vertices of a disk polyline.

    Each triple is moved so the middle vertex sits at the origin, the
    neighbours are pulled back to the tangent plane by the log map and the
    circumscribed-circle curvature is taken there.
    """
    z = np.asarray(z, dtype=complex)
    p = z[1:-1]
    denom_m = 1.0 - np.conj(p) * z[:-2]
    denom_p = 1.0 - np.conj(p) * z[2:]
    qm = (z[:-2] - p) / denom_m
    qp = (z[2:] - p) / denom_p
    rm = np.abs(qm)
    rp = np.abs(qp)
    vm = 2.0 * np.arctanh(rm) * qm / rm
    vp = 2.0 * np.arctanh(rp) * qp / rp
    cross = np.imag(np.conj(-vm) * vp)
    return 2.0 * cross / (np.abs(vm) * np.abs(vp) * np.abs(vp - vm))


# --------------------------------------------------------------------------
# level tracing
# --------------------------------------------------------------------------

def _eval(pc, lc, z, theta):
    """Return (sqrt_phi(z), Im W(z), residual scale)."""
    s = 0j
    t = 0j
    for j in range(len(pc) - 1, -1, -1):
        s = s * z + pc[j]
        t = t * z + pc[j] / (j + 1)
    t = t * z
    K = len(lc)
    if K:
        y = 1.0 / z
        acc = 0j
        for k in range(K - 1, -1, -1):
            acc = acc * y + lc[k]
        s = s + acc * y
        lp = 0j
        for k in range(K - 1, 0, -1):
            lp = lp * y + lc[k] / (-k)
        lp = lp * y
        t = t + lp + lc[0] * complex(math.log(abs(z)), theta)
    az = abs(z)
    scale = max(1.0, az * abs(s))
    return s, t.imag, scale


def _correct(pc, lc, C, z, theta, tol, max_newton):
    for _ in range(max_newton):
        sp, imw, scale = _eval(pc, lc, z, theta)
        g = imw - C
        if abs(g) <= tol * scale:
            return z, theta, True
        a = abs(sp)
        if not (a > 0.0) or not math.isfinite(g):
            return z, theta, False
        n = 1j * sp.conjugate() / a
        zn = z + (-g / a) * n
        if zn == 0:
            return z, theta, False
        theta = theta + cmath.phase(zn / z)
        z = zn
    sp, imw, scale = _eval(pc, lc, z, theta)
    return z, theta, abs(imw - C) <= tol * scale


def _land_on_circle(pc, lc, C, R, theta, tol, max_newton):
    phi = theta
    for _ in range(4 * max_newton):
        z = R * cmath.exp(1j * phi)
        sp, imw, scale = _eval(pc, lc, z, phi)
        g = imw - C
        if abs(g) <= tol * scale:
            return z, phi, True
        d = (sp * z).real
        if d == 0.0 or not math.isfinite(g):
            return z, phi, False
        step = -g / d
        # keep the angular update local to the crossing
        if abs(step) > 0.1:
            step = math.copysign(0.1, step)
        phi = phi + step
    return R * cmath.exp(1j * phi), phi, False


def trace_level_curve(pc, lc, C, z0, theta0, direction, r_inner, r_escape,
                      step_frac, w_step, min_frac, tol, max_steps, max_newton):
    """Predictor-corrector trace of {Im W = C} starting at z0.

    Returns (points, thetas, status); thetas is the continuously tracked
    argument of each vertex.
    """
    pc = [complex(c) for c in pc]
    lc = [complex(c) for c in lc]
    z, th, ok = _correct(pc, lc, C, complex(z0), float(theta0), tol, max_newton)
    pts = [z]
    ths = [th]
    if not ok:
        return np.array(pts), np.array(ths), BREAKDOWN
    for _ in range(max_steps):
        sp, _, _ = _eval(pc, lc, z, th)
        a = abs(sp)
        if not (a > 0.0):
            return np.array(pts), np.array(ths), BREAKDOWN
        az = abs(z)
        h = min(step_frac * az, max(w_step / a, min_frac * az))
        accepted = False
        zc = z
        thc = th
        for _ in range(40):
            t1 = direction * sp.conjugate() / a
            zm = z + 0.5 * h * t1
            spm, _, _ = _eval(pc, lc, zm, th + cmath.phase(zm / z))
            am = abs(spm)
            if not (am > 0.0):
                h *= 0.5
                continue
            t2 = direction * spm.conjugate() / am
            zp = z + h * t2
            thp = th + cmath.phase(zp / z)
            zc, thc, ok = _correct(pc, lc, C, zp, thp, tol, max_newton)
            if ok and abs(zc - zp) <= 0.5 * h and ((zc - z) * t1.conjugate()).real > 0.0:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            return np.array(pts), np.array(ths), STAGNANT
        if abs(zc) <= r_inner:
            zl, phl, ok = _land_on_circle(pc, lc, C, r_inner, thc, tol, max_newton)
            pts.append(zl)
            ths.append(phl)
            return np.array(pts), np.array(ths), (CIRCLE if ok else BREAKDOWN)
        z, th = zc, thc
        pts.append(z)
        ths.append(th)
        if abs(z) >= r_escape:
            return np.array(pts), np.array(ths), ESCAPED
    return np.array(pts), np.array(ths), STAGNANT


# --------------------------------------------------------------------------
# moving-frame development
# --------------------------------------------------------------------------

def so21_exp(a, b, c):
    """exp(Y) for Y = [[0,a,b],[a,0,-c],[b,c,0]] (broadcast over arrays)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    shape = np.broadcast(a, b, c).shape
    a, b, c = (np.broadcast_to(x, shape) for x in (a, b, c))
    mu2 = a * a + b * b - c * c
    f1 = np.empty(shape)
    f2 = np.empty(shape)
    small = np.abs(mu2) < 1e-8
    pos = (mu2 > 0) & ~small
    neg = (mu2 < 0) & ~small
    mu = np.sqrt(mu2[pos])
    f1[pos] = np.sinh(mu) / mu
    f2[pos] = (np.cosh(mu) - 1.0) / mu2[pos]
    nu = np.sqrt(-mu2[neg])
    f1[neg] = np.sin(nu) / nu
    f2[neg] = (1.0 - np.cos(nu)) / (nu * nu)
    f1[small] = 1.0 + mu2[small] / 6.0
    f2[small] = 0.5 + mu2[small] / 24.0
    Y = np.zeros(shape + (3, 3))
    Y[..., 0, 1] = a
    Y[..., 0, 2] = b
    Y[..., 1, 0] = a
    Y[..., 1, 2] = -c
    Y[..., 2, 0] = b
    Y[..., 2, 1] = c
    Y2 = Y @ Y
    E = f1[..., None, None] * Y + f2[..., None, None] * Y2
    E[..., 0, 0] += 1.0
    E[..., 1, 1] += 1.0
    E[..., 2, 2] += 1.0
    return E


def develop_frames(A, B, P, Q, du, dv, i0, j0, phi0, order=0):
    """Transport the frame [F, e1, e2] over the grid.

    A, B: coefficient fields of F_u = A e1 and F_v = B e2; P, Q: connection
    coefficients (omega12 = P du + Q dv).  Arrays are indexed [iv, iu].
    order 0 walks the seed row then every column; order 1 the seed column
    then every row.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    nv, nu = A.shape
    Phi = np.zeros((nv, nu, 3, 3))
    Phi[j0, i0] = phi0
    zero = np.zeros(1)

    if order == 0:
        # seed row
        for i in range(i0, nu - 1):
            E = so21_exp(0.5 * (A[j0, i] + A[j0, i + 1]) * du, zero,
                         0.5 * (P[j0, i] + P[j0, i + 1]) * du)[0]
            Phi[j0, i + 1] = Phi[j0, i] @ E
        for i in range(i0, 0, -1):
            E = so21_exp(-0.5 * (A[j0, i] + A[j0, i - 1]) * du, zero,
                         -0.5 * (P[j0, i] + P[j0, i - 1]) * du)[0]
            Phi[j0, i - 1] = Phi[j0, i] @ E
        # all columns at once
        for j in range(j0, nv - 1):
            E = so21_exp(0.0, 0.5 * (B[j] + B[j + 1]) * dv, 0.5 * (Q[j] + Q[j + 1]) * dv)
            Phi[j + 1] = Phi[j] @ E
        for j in range(j0, 0, -1):
            E = so21_exp(0.0, -0.5 * (B[j] + B[j - 1]) * dv, -0.5 * (Q[j] + Q[j - 1]) * dv)
            Phi[j - 1] = Phi[j] @ E
    else:
        for j in range(j0, nv - 1):
            E = so21_exp(zero, 0.5 * (B[j, i0] + B[j + 1, i0]) * dv,
                         0.5 * (Q[j, i0] + Q[j + 1, i0]) * dv)[0]
            Phi[j + 1, i0] = Phi[j, i0] @ E
        for j in range(j0, 0, -1):
            E = so21_exp(zero, -0.5 * (B[j, i0] + B[j - 1, i0]) * dv,
                         -0.5 * (Q[j, i0] + Q[j - 1, i0]) * dv)[0]
            Phi[j - 1, i0] = Phi[j, i0] @ E
        for i in range(i0, nu - 1):
            E = so21_exp(0.5 * (A[:, i] + A[:, i + 1]) * du, 0.0,
                         0.5 * (P[:, i] + P[:, i + 1]) * du)
            Phi[:, i + 1] = Phi[:, i] @ E
        for i in range(i0, 0, -1):
            E = so21_exp(-0.5 * (A[:, i] + A[:, i - 1]) * du, 0.0,
                         -0.5 * (P[:, i] + P[:, i - 1]) * du)
            Phi[:, i - 1] = Phi[:, i] @ E
    return Phi
