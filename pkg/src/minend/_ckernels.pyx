# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see _pykernels for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, sinh, cosh, sin, cos, atanh, atan2, isfinite, copysign

cnp.import_array()

ctypedef double complex cplx

cdef int ESCAPED = 0
cdef int CIRCLE = 1
cdef int STAGNANT = 2
cdef int BREAKDOWN = 3


cdef inline double cabs_(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double carg_(cplx z) nogil:
    return atan2(z.imag, z.real)


cdef inline cplx conj_(cplx z) nogil:
    return z.real - 1j * z.imag


def polyline_curvature(z_in):
    cdef cnp.ndarray[cplx, ndim=1] z = np.ascontiguousarray(z_in, dtype=np.complex128)
    cdef Py_ssize_t n = z.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(max(n - 2, 0))
    cdef Py_ssize_t i
    cdef cplx p, qm, qp, vm, vp
    cdef double rm, rp, cross
    for i in range(1, n - 1):
        p = z[i]
        qm = (z[i - 1] - p) / (1.0 - conj_(p) * z[i - 1])
        qp = (z[i + 1] - p) / (1.0 - conj_(p) * z[i + 1])
        rm = cabs_(qm)
        rp = cabs_(qp)
        vm = 2.0 * atanh(rm) * qm / rm
        vp = 2.0 * atanh(rp) * qp / rp
        cross = (conj_(-vm) * vp).imag
        out[i - 1] = 2.0 * cross / (cabs_(vm) * cabs_(vp) * cabs_(vp - vm))
    return out


cdef struct Eval:
    cplx sp
    double imw
    double scale


cdef Eval _eval(cplx[::1] pc, cplx[::1] lc, cplx z, double theta) nogil:
    cdef Eval r
    cdef cplx s = 0.0
    cdef cplx t = 0.0
    cdef cplx y, acc, lp
    cdef Py_ssize_t j, k
    cdef Py_ssize_t m1 = pc.shape[0]
    cdef Py_ssize_t K = lc.shape[0]
    cdef double az, a
    for j in range(m1 - 1, -1, -1):
        s = s * z + pc[j]
        t = t * z + pc[j] / (j + 1)
    t = t * z
    if K > 0:
        y = 1.0 / z
        acc = 0.0
        for k in range(K - 1, -1, -1):
            acc = acc * y + lc[k]
        s = s + acc * y
        lp = 0.0
        for k in range(K - 1, 0, -1):
            lp = lp * y + lc[k] / (-k)
        lp = lp * y
        t = t + lp + lc[0] * (log(cabs_(z)) + 1j * theta)
    az = cabs_(z)
    a = az * cabs_(s)
    r.sp = s
    r.imw = t.imag
    r.scale = a if a > 1.0 else 1.0
    return r


cdef int _correct(cplx[::1] pc, cplx[::1] lc, double C, cplx* z, double* theta,
                  double tol, int max_newton) nogil:
    cdef Eval e
    cdef double g, a
    cdef cplx n, zn
    cdef int it
    for it in range(max_newton):
        e = _eval(pc, lc, z[0], theta[0])
        g = e.imw - C
        if fabs(g) <= tol * e.scale:
            return 1
        a = cabs_(e.sp)
        if not (a > 0.0) or not isfinite(g):
            return 0
        n = 1j * conj_(e.sp) / a
        zn = z[0] + (-g / a) * n
        if zn.real == 0.0 and zn.imag == 0.0:
            return 0
        theta[0] = theta[0] + carg_(zn / z[0])
        z[0] = zn
    e = _eval(pc, lc, z[0], theta[0])
    return 1 if fabs(e.imw - C) <= tol * e.scale else 0


cdef int _land_on_circle(cplx[::1] pc, cplx[::1] lc, double C, double R, cplx* z,
                         double* theta, double tol, int max_newton) nogil:
    cdef double phi = theta[0]
    cdef Eval e
    cdef double g, d, step
    cdef cplx zz
    cdef int it
    for it in range(4 * max_newton):
        zz = R * (cos(phi) + 1j * sin(phi))
        e = _eval(pc, lc, zz, phi)
        g = e.imw - C
        if fabs(g) <= tol * e.scale:
            z[0] = zz
            theta[0] = phi
            return 1
        d = (e.sp * zz).real
        if d == 0.0 or not isfinite(g):
            z[0] = zz
            theta[0] = phi
            return 0
        step = -g / d
        if fabs(step) > 0.1:
            step = copysign(0.1, step)
        phi = phi + step
    z[0] = R * (cos(phi) + 1j * sin(phi))
    theta[0] = phi
    return 0


def trace_level_curve(pc_in, lc_in, double C, z0, double theta0, int direction,
                      double r_inner, double r_escape, double step_frac, double w_step,
                      double min_frac, double tol, int max_steps, int max_newton):
    cdef cplx[::1] pc = np.ascontiguousarray(pc_in, dtype=np.complex128)
    cdef cplx[::1] lc = np.ascontiguousarray(np.asarray(lc_in, dtype=np.complex128).reshape(-1))
    cdef cplx z = complex(z0)
    cdef double th = theta0
    cdef int ok
    cdef int status = STAGNANT
    cdef Py_ssize_t cap = max_steps + 2
    cdef cnp.ndarray[cplx, ndim=1] pts = np.empty(cap, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] ths = np.empty(cap)
    cdef Py_ssize_t n = 0
    cdef Eval e, em
    cdef double a, am, az, h, hmax, hw, thc, thp
    cdef cplx zc, zm, zp, t1, t2
    cdef int step, half, accepted
    cdef double dirf = direction

    ok = _correct(pc, lc, C, &z, &th, tol, max_newton)
    pts[0] = z
    ths[0] = th
    n = 1
    if not ok:
        return pts[:n].copy(), ths[:n].copy(), BREAKDOWN
    with nogil:
        for step in range(max_steps):
            e = _eval(pc, lc, z, th)
            a = cabs_(e.sp)
            if not (a > 0.0):
                status = BREAKDOWN
                break
            az = cabs_(z)
            hmax = step_frac * az
            hw = w_step / a
            if min_frac * az > hw:
                hw = min_frac * az
            h = hmax if hmax < hw else hw
            accepted = 0
            zc = z
            thc = th
            for half in range(40):
                t1 = dirf * conj_(e.sp) / a
                zm = z + 0.5 * h * t1
                em = _eval(pc, lc, zm, th + carg_(zm / z))
                am = cabs_(em.sp)
                if not (am > 0.0):
                    h *= 0.5
                    continue
                t2 = dirf * conj_(em.sp) / am
                zp = z + h * t2
                thp = th + carg_(zp / z)
                zc = zp
                thc = thp
                ok = _correct(pc, lc, C, &zc, &thc, tol, max_newton)
                if ok and cabs_(zc - zp) <= 0.5 * h and ((zc - z) * conj_(t1)).real > 0.0:
                    accepted = 1
                    break
                h *= 0.5
            if not accepted:
                status = STAGNANT
                break
            if cabs_(zc) <= r_inner:
                ok = _land_on_circle(pc, lc, C, r_inner, &zc, &thc, tol, max_newton)
                pts[n] = zc
                ths[n] = thc
                n += 1
                status = CIRCLE if ok else BREAKDOWN
                break
            z = zc
            th = thc
            pts[n] = z
            ths[n] = th
            n += 1
            if cabs_(z) >= r_escape:
                status = ESCAPED
                break
    return pts[:n].copy(), ths[:n].copy(), status


cdef void _so21_exp(double a, double b, double c, double* E) nogil:
    cdef double mu2 = a * a + b * b - c * c
    cdef double f1, f2, mu, nu
    if fabs(mu2) < 1e-8:
        f1 = 1.0 + mu2 / 6.0
        f2 = 0.5 + mu2 / 24.0
    elif mu2 > 0:
        mu = sqrt(mu2)
        f1 = sinh(mu) / mu
        f2 = (cosh(mu) - 1.0) / mu2
    else:
        nu = sqrt(-mu2)
        f1 = sin(nu) / nu
        f2 = (1.0 - cos(nu)) / (nu * nu)
    # Y = [[0,a,b],[a,0,-c],[b,c,0]] and its square
    E[0] = 1.0 + f2 * (a * a + b * b)
    E[1] = f1 * a + f2 * (b * c)
    E[2] = f1 * b + f2 * (-a * c)
    E[3] = f1 * a + f2 * (-b * c)
    E[4] = 1.0 + f2 * (a * a - c * c)
    E[5] = -f1 * c + f2 * (a * b)
    E[6] = f1 * b + f2 * (a * c)
    E[7] = f1 * c + f2 * (a * b)
    E[8] = 1.0 + f2 * (b * b - c * c)


def so21_exp(double a, double b, double c):
    cdef double E[9]
    _so21_exp(a, b, c, E)
    return np.array([[E[0], E[1], E[2]], [E[3], E[4], E[5]], [E[6], E[7], E[8]]])


cdef inline void _apply(double[:, :, :, ::1] Phi, Py_ssize_t js, Py_ssize_t is_,
                        Py_ssize_t jd, Py_ssize_t id_, double* E) nogil:
    cdef Py_ssize_t r
    cdef double x0, x1, x2
    for r in range(3):
        x0 = Phi[js, is_, r, 0]
        x1 = Phi[js, is_, r, 1]
        x2 = Phi[js, is_, r, 2]
        Phi[jd, id_, r, 0] = x0 * E[0] + x1 * E[3] + x2 * E[6]
        Phi[jd, id_, r, 1] = x0 * E[1] + x1 * E[4] + x2 * E[7]
        Phi[jd, id_, r, 2] = x0 * E[2] + x1 * E[5] + x2 * E[8]


cdef inline void _ustep(double[:, ::1] A, double[:, ::1] P, double du, double[:, :, :, ::1] Phi,
                        Py_ssize_t j, Py_ssize_t i, Py_ssize_t i2) nogil:
    cdef double E[9]
    cdef double s = du if i2 > i else -du
    _so21_exp(0.5 * (A[j, i] + A[j, i2]) * s, 0.0, 0.5 * (P[j, i] + P[j, i2]) * s, E)
    _apply(Phi, j, i, j, i2, E)


cdef inline void _vstep(double[:, ::1] B, double[:, ::1] Q, double dv, double[:, :, :, ::1] Phi,
                        Py_ssize_t j, Py_ssize_t j2, Py_ssize_t i) nogil:
    cdef double E[9]
    cdef double s = dv if j2 > j else -dv
    _so21_exp(0.0, 0.5 * (B[j, i] + B[j2, i]) * s, 0.5 * (Q[j, i] + Q[j2, i]) * s, E)
    _apply(Phi, j, i, j2, i, E)


def develop_frames(A_in, B_in, P_in, Q_in, double du, double dv, Py_ssize_t i0,
                   Py_ssize_t j0, phi0, int order=0):
    cdef double[:, ::1] A = np.ascontiguousarray(A_in, dtype=np.float64)
    cdef double[:, ::1] B = np.ascontiguousarray(B_in, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef Py_ssize_t nv = A.shape[0]
    cdef Py_ssize_t nu = A.shape[1]
    out = np.zeros((nv, nu, 3, 3))
    out[j0, i0] = phi0
    cdef double[:, :, :, ::1] Phi = out
    cdef Py_ssize_t i, j
    with nogil:
        if order == 0:
            for i in range(i0, nu - 1):
                _ustep(A, P, du, Phi, j0, i, i + 1)
            for i in range(i0, 0, -1):
                _ustep(A, P, du, Phi, j0, i, i - 1)
            for i in range(nu):
                for j in range(j0, nv - 1):
                    _vstep(B, Q, dv, Phi, j, j + 1, i)
                for j in range(j0, 0, -1):
                    _vstep(B, Q, dv, Phi, j, j - 1, i)
        else:
            for j in range(j0, nv - 1):
                _vstep(B, Q, dv, Phi, j, j + 1, i0)
            for j in range(j0, 0, -1):
                _vstep(B, Q, dv, Phi, j, j - 1, i0)
            for j in range(nv):
                for i in range(i0, nu - 1):
                    _ustep(A, P, du, Phi, j, i, i + 1)
                for i in range(i0, 0, -1):
                    _ustep(A, P, du, Phi, j, i, i - 1)
    return out
