# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Mittag-Leffler kernels.

Scalar counterparts of fracspde.specfun._fallback, looped in C over the
argument array.  The series accumulates in 80-bit long double; the integral
representation uses recursive Gauss-Kronrod bisection with the same panel
layout as the fallback.
"""

from libc.math cimport (
    cos, sin, exp, log, pow, fabs, ceil, floor, lgamma, INFINITY, M_PI,
)
from libc.stdlib cimport free, malloc

import numpy as np

from .errors import AccuracyError, DomainError
from .specfun._shared import SERIES_TERM_CAP, contour_constants

cdef extern from "math.h" nogil:
    long double expl(long double)
    long double lgammal(long double)
    long double fabsl(long double)

cdef int _TERM_CAP = SERIES_TERM_CAP

cdef double[15] XGK
cdef double[15] WGK
cdef double[7] WG7
cdef int[7] G7_IDX

XGK[0] = -0.991455371120813; XGK[1] = -0.949107912342759
XGK[2] = -0.864864423359769; XGK[3] = -0.741531185599394
XGK[4] = -0.586087235467691; XGK[5] = -0.405845151377397
XGK[6] = -0.207784955007898; XGK[7] = 0.0
XGK[8] = 0.207784955007898;  XGK[9] = 0.405845151377397
XGK[10] = 0.586087235467691; XGK[11] = 0.741531185599394
XGK[12] = 0.864864423359769; XGK[13] = 0.949107912342759
XGK[14] = 0.991455371120813

WGK[0] = 0.022935322010529;  WGK[1] = 0.063092092629979
WGK[2] = 0.104790010322250;  WGK[3] = 0.140653259715525
WGK[4] = 0.169004726639267;  WGK[5] = 0.190350578064785
WGK[6] = 0.204432940075298;  WGK[7] = 0.209482141084728
WGK[8] = 0.204432940075298;  WGK[9] = 0.190350578064785
WGK[10] = 0.169004726639267; WGK[11] = 0.140653259715525
WGK[12] = 0.104790010322250; WGK[13] = 0.063092092629979
WGK[14] = 0.022935322010529

WG7[0] = 0.129484966168870; WG7[1] = 0.279705391489277
WG7[2] = 0.381830050505119; WG7[3] = 0.417959183673469
WG7[4] = 0.381830050505119; WG7[5] = 0.279705391489277
WG7[6] = 0.129484966168870

G7_IDX[0] = 1; G7_IDX[1] = 3; G7_IDX[2] = 5; G7_IDX[3] = 7
G7_IDX[4] = 9; G7_IDX[5] = 11; G7_IDX[6] = 13


cdef long double _rgamma_l(long double x) nogil:
    # reciprocal gamma; zero at the poles, sign from the reflection strip
    cdef long double lg
    cdef long long fl
    if x > 0.0:
        return expl(-lgammal(x))
    if x == floor(<double> x):
        return 0.0
    lg = lgammal(x)
    if lg == INFINITY:
        return 0.0
    fl = <long long> floor(<double> x)
    if fl % 2 == 0:
        return expl(-lg)
    return -expl(-lg)


cdef int _series_one(double a, double b, double z, double tol,
                     long double* rg, double* out) nogil:
    # rg holds the reciprocal-gamma table, shared across arguments
    cdef long double total = 0.0
    cdef long double zk = 1.0
    cdef long double zl = z
    cdef long double term, mag, prev_mag = INFINITY
    cdef int k, run = 0
    for k in range(_TERM_CAP):
        term = zk * rg[k]
        total += term
        mag = fabsl(term)
        if mag <= tol * (fabsl(total) + 1e-300) and mag <= prev_mag:
            run += 1
            if run >= 3:
                out[0] = <double> total
                return 0
        else:
            run = 0
        prev_mag = mag
        zk *= zl
    out[0] = <double> total
    return 1


def series_eval(double a, double b, z, double tol=1e-14):
    """Guarded power series; same contract as the fallback version."""
    zarr = np.asarray(z, dtype=float)
    scalar = zarr.ndim == 0
    cdef double[::1] zv = np.ascontiguousarray(np.atleast_1d(zarr))
    out_arr = np.empty(zv.shape[0], dtype=float)
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    cdef int k, bad = 0
    cdef double first_bad = 0.0
    cdef long double* rg = <long double*> malloc(
        _TERM_CAP * sizeof(long double))
    if rg == NULL:
        raise MemoryError
    try:
        with nogil:
            for k in range(_TERM_CAP):
                rg[k] = _rgamma_l(a * k + b)
            for i in range(zv.shape[0]):
                if _series_one(a, b, zv[i], tol, rg, &ov[i]):
                    if bad == 0:
                        first_bad = zv[i]
                    bad += 1
    finally:
        free(rg)
    if bad:
        raise AccuracyError(
            f"series did not converge within {_TERM_CAP} terms at "
            f"z={first_bad!r} ({bad} arguments); use the integral "
            "representation",
        )
    return float(out_arr[0]) if scalar else out_arr


cdef struct MLCtx:
    double a
    double b
    double v
    double eta1
    double eta3
    double s2
    double phase
    double e2a
    int m


cdef double _f_plain(double u, MLCtx* c) nogil:
    cdef double ua = pow(u, c.a)
    cdef double psi = u * c.s2 + c.phase
    cdef double num = pow(u, c.a - c.b) * exp(-c.eta1 * u) * (
        ua * sin(psi - c.e2a) + c.v * sin(psi))
    cdef double den = ua * ua + 2.0 * ua * c.v * c.eta3 + c.v * c.v
    return num / (M_PI * den)


cdef double _f_singular(double w, MLCtx* c) nogil:
    cdef double u = pow(w, c.m)
    return _f_plain(u, c) * c.m * pow(w, c.m - 1)


cdef void _panel_shared(double lo, double hi, bint singular, MLCtx* c,
                        double[::1] vv, double* val_acc, double* err_acc,
                        double* maxerr) nogil:
    """One Gauss-Kronrod panel evaluated for every argument at once.

    All u-dependent transcendentals are shared across arguments; per
    argument the integrand costs a handful of flops.
    """
    cdef double half = 0.5 * (hi - lo)
    cdef double mid = 0.5 * (hi + lo)
    cdef double A[15]
    cdef double B[15]
    cdef double S1[15]
    cdef double S2[15]
    cdef double u, w, psi, jac, vj, num, den, f
    cdef double k15, g7, err
    cdef double fv[15]
    cdef int i, n
    cdef Py_ssize_t j
    for i in range(15):
        w = mid + half * XGK[i]
        if singular:
            u = pow(w, c.m)
            jac = c.m * pow(w, c.m - 1)
        else:
            u = w
            jac = 1.0
        psi = u * c.s2 + c.phase
        B[i] = pow(u, c.a)
        A[i] = pow(u, c.a - c.b) * exp(-c.eta1 * u) * jac / M_PI
        S1[i] = sin(psi - c.e2a)
        S2[i] = sin(psi)
    maxerr[0] = 0.0
    for j in range(vv.shape[0]):
        vj = vv[j]
        if vj == 0.0:
            continue
        k15 = 0.0
        g7 = 0.0
        for i in range(15):
            num = A[i] * (B[i] * S1[i] + vj * S2[i])
            den = B[i] * B[i] + 2.0 * B[i] * vj * c.eta3 + vj * vj
            f = num / den
            fv[i] = f
            k15 += WGK[i] * f
        for i in range(7):
            g7 += WG7[i] * fv[G7_IDX[i]]
        err = fabs(half * (k15 - g7))
        val_acc[j] += half * k15
        err_acc[j] += err
        if err > maxerr[0]:
            maxerr[0] = err


DEF STACK_CAP = 4096


cdef void _gk15_probe(double lo, double hi, bint singular, MLCtx* c,
                      double[::1] vv, double* maxerr) nogil:
    # error probe only: same nodes, no accumulation
    cdef double half = 0.5 * (hi - lo)
    cdef double mid = 0.5 * (hi + lo)
    cdef double A[15]
    cdef double B[15]
    cdef double S1[15]
    cdef double S2[15]
    cdef double u, w, psi, jac, vj, num, den, f
    cdef double k15, g7, err
    cdef double fv[15]
    cdef int i
    cdef Py_ssize_t j
    for i in range(15):
        w = mid + half * XGK[i]
        if singular:
            u = pow(w, c.m)
            jac = c.m * pow(w, c.m - 1)
        else:
            u = w
            jac = 1.0
        psi = u * c.s2 + c.phase
        B[i] = pow(u, c.a)
        A[i] = pow(u, c.a - c.b) * exp(-c.eta1 * u) * jac / M_PI
        S1[i] = sin(psi - c.e2a)
        S2[i] = sin(psi)
    maxerr[0] = 0.0
    for j in range(vv.shape[0]):
        vj = vv[j]
        if vj == 0.0:
            continue
        k15 = 0.0
        g7 = 0.0
        for i in range(15):
            num = A[i] * (B[i] * S1[i] + vj * S2[i])
            den = B[i] * B[i] + 2.0 * B[i] * vj * c.eta3 + vj * vj
            f = num / den
            fv[i] = f
            k15 += WGK[i] * f
        for i in range(7):
            g7 += WG7[i] * fv[G7_IDX[i]]
        err = fabs(half * (k15 - g7))
        if err > maxerr[0]:
            maxerr[0] = err


cdef int _integrate_shared(MLCtx* c, double upper, double tol,
                           int max_panels, double[::1] vv,
                           double* val_acc, double* err_acc,
                           double* achieved) nogil:
    cdef double stack_lo[STACK_CAP]
    cdef double stack_hi[STACK_CAP]
    cdef bint stack_sing[STACK_CAP]
    cdef int depth = 0, used = 0
    cdef double lo, hi, mid, maxerr, dummy
    cdef bint singular
    cdef double x, width, per_panel_tol
    cdef int n0 = 2
    cdef Py_ssize_t j

    x = 1.0
    while x < upper:
        width = min(max(x, 1.0), 64.0)
        x += width
        n0 += 1
    per_panel_tol = 0.5 * tol / max(n0, 8)

    stack_lo[depth] = 0.0; stack_hi[depth] = 1.0; stack_sing[depth] = 1
    depth += 1
    x = 1.0
    while x < upper and depth < STACK_CAP - 2:
        width = min(max(x, 1.0), 64.0)
        stack_lo[depth] = x
        stack_hi[depth] = min(x + width, upper)
        stack_sing[depth] = 0
        depth += 1
        x += width

    while depth > 0:
        depth -= 1
        lo = stack_lo[depth]; hi = stack_hi[depth]
        singular = stack_sing[depth]
        _gk15_probe(lo, hi, singular, c, vv, &maxerr)
        if maxerr > per_panel_tol and used < max_panels \
                and hi - lo > 1e-14 and depth < STACK_CAP - 2:
            mid = 0.5 * (lo + hi)
            stack_lo[depth] = lo; stack_hi[depth] = mid
            stack_sing[depth] = singular
            depth += 1
            stack_lo[depth] = mid; stack_hi[depth] = hi
            stack_sing[depth] = singular
            depth += 1
            used += 2
            continue
        _panel_shared(lo, hi, singular, c, vv, val_acc, err_acc, &dummy)
    achieved[0] = 0.0
    for j in range(vv.shape[0]):
        if err_acc[j] > achieved[0]:
            achieved[0] = err_acc[j]
    return 0 if achieved[0] <= 100.0 * tol else 1


def integral_eval(double a, double b, v, double tol=1e-13,
                  int max_panels=40000):
    """Real-line representation of E_{a,b}(-v); contract as in the fallback."""
    if not 0.0 < a < 2.0:
        raise DomainError(f"order a must lie in (0, 2), got {a}")
    if not b < a + 1.0:
        raise DomainError(
            f"integral representation needs b < a + 1, got a={a}, b={b}")
    varr = np.asarray(v, dtype=float)
    scalar = varr.ndim == 0
    cdef double[::1] vv = np.ascontiguousarray(np.atleast_1d(varr))
    if np.any(np.atleast_1d(varr) < 0.0):
        raise DomainError("integral representation is for arguments -v, v >= 0")

    eta1, eta2, eta3 = contour_constants(a)
    n = vv.shape[0]
    out_arr = np.zeros(n, dtype=float)
    err_arr = np.zeros(n, dtype=float)
    cdef double[::1] ov = out_arr
    cdef double[::1] ev = err_arr
    cdef MLCtx c
    c.a = a; c.b = b
    c.eta1 = eta1; c.eta3 = eta3
    c.s2 = sin(eta2)
    c.phase = eta2 * (a + 1.0 - b)
    c.e2a = eta2 * a
    c.m = <int> max(1, ceil(2.0 / (1.0 + a - b)))
    cdef double upper = max(60.0 / c.eta1, 8.0)
    cdef double rg_b = <double> _rgamma_l(b)

    cdef double worst = 0.0
    cdef int failed = 0
    cdef Py_ssize_t i
    with nogil:
        failed = _integrate_shared(&c, upper, tol, max_panels, vv,
                                   &ov[0], &ev[0], &worst)
        for i in range(n):
            if vv[i] == 0.0:
                ov[i] = rg_b
    if failed:
        raise AccuracyError(
            f"quadrature stalled at absolute error {worst:.3e}",
            achieved=worst,
        )
    return float(out_arr[0]) if scalar else out_arr
