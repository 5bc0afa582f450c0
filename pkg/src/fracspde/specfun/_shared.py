"""Shared constants and dispatch heuristics for Mittag-Leffler evaluation.

Both the compiled core and the NumPy fallback implement the same two
algorithms; the helpers here keep the dispatch policy in one place.
"""

import math

# Power series is attempted only for |z| <= SERIES_ZMAX, and only when the
# forecast largest term stays below exp(SERIES_MAXTERM_LOG).  The reciprocal
# gamma factors carry ~1e-16 relative error, so the summed magnitude bounds
# the result's absolute error; a 1e4 peak keeps it near 2e-11.
SERIES_ZMAX = 5.0
SERIES_MAXTERM_LOG = math.log(1e4)
SERIES_TERM_CAP = 600

# Quadrature targets for the integral representation.
INTEGRAL_ABS_TOL = 1e-13
INTEGRAL_ABS_GUARANTEE = 1e-11


def contour_constants(a):
    """Constants (eta1, eta2, eta3) of the real-line representation.

    Any eta with a*pi/2 < eta < min(pi, a*pi) is admissible; the midpoint
    keeps |cos eta| away from 1 and -cos(eta/a) away from 0 simultaneously.
    """
    if not 0.0 < a < 2.0:
        raise ValueError(f"order a must lie in (0, 2), got {a}")
    eta = 0.5 * (a * math.pi / 2.0 + min(math.pi, a * math.pi))
    eta1 = -math.cos(eta / a)
    eta2 = eta / a
    eta3 = math.cos(eta)
    return eta1, eta2, eta3


def series_log_max_term(a, b, log_abs_z):
    """Natural log of the largest series term |z|^k / Gamma(a k + b).

    The term sequence is unimodal in k; the peak index solves
    a * psi(a k + b) = log|z|, approximated through psi(x) ~ log(x).
    """
    if log_abs_z == -math.inf:
        return -math.lgamma(b) if b > 0 else 0.0
    k0 = (math.exp(log_abs_z / a) - b) / a
    if k0 <= 0.0:
        x = max(b, 1e-300)
        return -math.lgamma(x) if x > 0 else 0.0
    return k0 * log_abs_z - math.lgamma(a * k0 + b)


def series_applicable(a, b, abs_z):
    """Whether the double-precision series is reliable at this argument."""
    if abs_z > SERIES_ZMAX:
        return False
    if abs_z == 0.0:
        return True
    return series_log_max_term(a, b, math.log(abs_z)) <= SERIES_MAXTERM_LOG


def series_radius(a, b):
    """Largest |z| at which the series path is used for these parameters.

    Monotone bisection on the roundoff forecast; capped at SERIES_ZMAX.
    """
    if series_applicable(a, b, SERIES_ZMAX):
        return SERIES_ZMAX
    lo, hi = 0.0, SERIES_ZMAX
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if series_applicable(a, b, mid):
            lo = mid
        else:
            hi = mid
    return lo
