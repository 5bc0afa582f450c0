"""Pure NumPy implementation of the Mittag-Leffler kernels.

Selected at import time when the compiled core is unavailable (or when
``FSPDE_PURE=1``).  Algorithms mirror the compiled ones: a guarded power
series and adaptive Gauss-Kronrod panels on the real-line integral
representation, vectorized over the argument array.
"""

import math

import numpy as np
from scipy.special import rgamma as _rgamma

from ..errors import AccuracyError, DomainError
from ._shared import SERIES_TERM_CAP, contour_constants

# 15-point Kronrod extension of 7-point Gauss on [-1, 1].
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG7 = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])
_G7_IDX = np.array([1, 3, 5, 7, 9, 11, 13])

_LD = np.longdouble


def series_eval(a, b, z, tol=1e-14):
    """Power series sum_k z^k / Gamma(a k + b), truncated adaptively.

    Accumulation runs in extended precision.  Truncates once three
    consecutive terms fall below ``tol`` relative to the partial sum on the
    decaying side of the term peak.  Raises :class:`AccuracyError` when the
    term cap is hit first.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    zl = np.atleast_1d(z).astype(_LD)
    n = zl.shape[0]

    total = np.zeros(n, dtype=_LD)
    zk = np.ones(n, dtype=_LD)
    small_run = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    prev_mag = np.full(n, np.inf, dtype=_LD)

    for k in range(SERIES_TERM_CAP):
        rg = _LD(float(_rgamma(a * k + b)))
        term = zk * rg
        total = np.where(done, total, total + term)
        mag = np.abs(term)
        small = mag <= tol * (np.abs(total) + _LD(1e-300))
        decaying = mag <= prev_mag
        small_run = np.where(small & decaying, small_run + 1, 0)
        done |= small_run >= 3
        if bool(done.all()):
            break
        prev_mag = mag
        zk = zk * zl
    # the double-precision gamma reciprocal underflows around arguments of
    # 180, which can zero the tail while terms are still growing; any
    # partial sum beyond float range is a failed summation, not a value
    done &= np.abs(total) < _LD(1e300)
    if not bool(done.all()):
        bad = np.atleast_1d(z)[~done]
        raise AccuracyError(
            f"series did not converge within {SERIES_TERM_CAP} terms at "
            f"z={bad[:4].tolist()}; use the integral representation",
        )
    out = total.astype(float)
    return float(out[0]) if scalar else out


def _integrand(u, a, b, v, eta1, eta2, eta3):
    # u is the substituted variable r^(1/a); v broadcasts against u
    ua = u ** a
    psi = u * math.sin(eta2) + eta2 * (a + 1.0 - b)
    num = u ** (a - b) * np.exp(-eta1 * u) * (
        ua * np.sin(psi - eta2 * a) + v * np.sin(psi)
    )
    den = ua * ua + 2.0 * ua * v * eta3 + v * v
    return num / (math.pi * den)


def _panel_gk(f, lo, hi):
    """Kronrod value and |K15 - G7| error bound per argument row."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    u = mid + half * _XGK
    fv = f(u)  # (n_v, 15)
    k15 = half * fv @ _WGK
    g7 = half * fv[:, _G7_IDX] @ _WG7
    return k15, np.abs(k15 - g7)


def integral_eval(a, b, v, tol=1e-13, max_panels=40000):
    """Real-line integral representation of E_{a,b}(-v), v >= 0.

    Valid for 0 < a < 2 and b < a + 1.  Adaptive bisection of
    Gauss-Kronrod panels, shared across the whole ``v`` array; the first
    panel absorbs the u^(a-b) endpoint behaviour through a power
    substitution.  Raises :class:`AccuracyError` with the achieved bound if
    the panel budget runs out.
    """
    if not 0.0 < a < 2.0:
        raise DomainError(f"order a must lie in (0, 2), got {a}")
    if not b < a + 1.0:
        raise DomainError(
            f"integral representation needs b < a + 1, got a={a}, b={b}"
        )
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    vv = np.atleast_1d(v).astype(float)
    if np.any(vv < 0.0):
        raise DomainError("integral representation is for arguments -v, v >= 0")

    eta1, eta2, eta3 = contour_constants(a)
    out = np.empty_like(vv)
    zero = vv == 0.0
    out[zero] = float(_rgamma(b))
    vpos = vv[~zero]
    if vpos.size:
        out[~zero] = _integrate_positive(
            a, b, vpos, eta1, eta2, eta3, tol, max_panels
        )
    return float(out[0]) if scalar else out


def _integrate_positive(a, b, vpos, eta1, eta2, eta3, tol, max_panels):
    vcol = vpos[:, None]
    upper = max(60.0 / eta1, 8.0)
    # endpoint substitution u = w^m renders the first panel smooth
    m = max(1, math.ceil(2.0 / (1.0 + a - b)))

    def f_singular(w):
        u = w ** m
        return _integrand(u, a, b, vcol, eta1, eta2, eta3) * m * w ** (m - 1)

    def f_plain(u):
        return _integrand(u, a, b, vcol, eta1, eta2, eta3)

    panels = [(0.0, 1.0, True)]
    x = 1.0
    while x < upper:
        width = min(max(x, 1.0), 64.0)
        panels.append((x, min(x + width, upper), False))
        x += width

    total = np.zeros(vpos.shape[0])
    total_err = np.zeros(vpos.shape[0])
    budget = max_panels
    stack = list(panels)
    per_panel_tol = 0.5 * tol / max(len(panels), 8)
    while stack:
        lo, hi, singular = stack.pop()
        val, err = _panel_gk(f_singular if singular else f_plain, lo, hi)
        if float(err.max()) > per_panel_tol and budget > 0 and hi - lo > 1e-14:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, singular))
            stack.append((mid, hi, singular))
            budget -= 2
            continue
        total += val
        total_err += err
    achieved = float(total_err.max())
    if achieved > 100.0 * tol:
        raise AccuracyError(
            f"quadrature stalled at absolute error {achieved:.3e}",
            achieved=achieved,
        )
    return total
