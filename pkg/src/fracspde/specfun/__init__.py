"""Gamma and Mittag-Leffler evaluation on the negative real axis.

E_{a,b}(-v) is the single special function behind every kernel in this
package: the Fourier symbol of each fundamental solution is an E-value at
-t^alpha |xi|^2.  Two independent representations are provided, a guarded
power series and a real-line integral, with an automatic dispatcher.

The numeric kernels come from a compiled extension when available, or from
the NumPy fallback otherwise; set ``FSPDE_PURE=1`` to force the fallback.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import AccuracyError, DomainError
from . import _fallback
from ._shared import (
    SERIES_ZMAX,
    contour_constants,
    series_applicable,
    series_radius,
)

if os.environ.get("FSPDE_PURE", "").strip() in {"1", "true", "yes"}:
    _impl = _fallback
    BACKEND = "pure"
else:
    try:
        from .. import _mlcore as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "pure"


def backend_name():
    """Which numeric backend was selected at import ('compiled' or 'pure')."""
    return BACKEND


@dataclass(frozen=True)
class MLParams:
    """Order pair (a, b) of the two-parameter Mittag-Leffler function."""

    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.a < 2.0:
            raise DomainError(f"order a must lie in (0, 2), got {self.a}")

    @property
    def integral_valid(self):
        return self.b < self.a + 1.0


@dataclass(frozen=True)
class MLContour:
    """Constants of the real-line representation, functions of ``a`` alone.

    eta1 = -cos(eta/a) > 0, eta2 = eta/a, eta3 = cos(eta) for an eta with
    a*pi/2 < eta < min(pi, a*pi); the midpoint of that interval is used.
    """

    a: float
    eta1: float = field(init=False)
    eta2: float = field(init=False)
    eta3: float = field(init=False)

    def __post_init__(self):
        e1, e2, e3 = contour_constants(self.a)
        object.__setattr__(self, "eta1", e1)
        object.__setattr__(self, "eta2", e2)
        object.__setattr__(self, "eta3", e3)
        assert self.eta1 > 0.0 and -1.0 < self.eta3 < 1.0


def gamma_fn(x):
    """Gamma function for real x off the poles {0, -1, -2, ...}."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma pole at x={x:g}")
    try:
        return math.gamma(x)
    except (OverflowError, ValueError) as exc:
        raise DomainError(f"gamma overflow or invalid input x={x!r}") from exc


def ml_series(params, z, tol=1e-14):
    """Series evaluation of E_{a,b}(z); scalars or arrays of z.

    Raises AccuracyError when 600 terms do not converge; the caller should
    then move to :func:`ml_integral`.
    """
    return _impl.series_eval(params.a, params.b, z, tol)


def ml_integral(params, v, tol=1e-13):
    """Integral-representation evaluation of E_{a,b}(-v) for v >= 0.

    Requires b < a + 1 (the representation's domain).  Absolute accuracy
    target 1e-13, guaranteed 1e-11 or an AccuracyError.
    """
    if not params.integral_valid:
        raise DomainError(
            "integral representation needs b < a + 1, got "
            f"a={params.a}, b={params.b}"
        )
    return _impl.integral_eval(params.a, params.b, v, tol)


def _reduce_b(a, b, v, depth=0):
    """E_{a,b}(-v) via downward second-parameter recursion when b >= a+1.

    E_{a,b}(-v) = (1/Gamma(b-a) - E_{a,b-a}(-v)) / v, applied until the
    integral representation becomes valid.  Stable for the large |z| this
    path is reserved for.
    """
    if b < a + 1.0:
        return _impl.integral_eval(a, b, v, 1e-13)
    if depth > 64:
        raise AccuracyError("second-parameter reduction did not terminate")
    inner = _reduce_b(a, b - a, v, depth + 1)
    from scipy.special import rgamma

    return (float(rgamma(b - a)) - inner) / v


def ml_neg(a, b, v):
    """E_{a,b}(-v) on arrays of v >= 0 with automatic dispatch.

    Series inside its reliability region, integral representation outside,
    second-parameter reduction when b >= a + 1 forces it.  This is the fast
    path used by all kernel symbol evaluations.
    """
    if not 0.0 < a < 2.0:
        raise DomainError(f"order a must lie in (0, 2), got {a}")
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    vv = np.atleast_1d(v).astype(float)
    if np.any(vv < 0.0):
        raise DomainError("ml_neg expects v >= 0 (argument is -v)")
    out = np.empty_like(vv)

    rad = series_radius(a, b)
    ser = vv <= rad
    if np.any(ser):
        out[ser] = _impl.series_eval(a, b, -vv[ser])
    rest = ~ser
    if np.any(rest):
        if b < a + 1.0:
            out[rest] = _impl.integral_eval(a, b, vv[rest])
        else:
            out[rest] = _reduce_b(a, b, vv[rest])
    return float(out[0]) if scalar else out


def ml(params, z, method="auto"):
    """E_{a,b}(z) for real z <= 0.

    method 'series' and 'integral' force one representation; 'auto'
    dispatches on the series reliability window.  Positive z is outside the
    supported domain (every kernel symbol evaluates at -t^alpha |xi|^2).
    """
    z = float(z)
    if z > 0.0:
        raise DomainError(
            "positive arguments are unsupported; symbols evaluate at "
            "z = -t^alpha |xi|^2 <= 0"
        )
    if method == "series":
        return float(ml_series(params, z))
    if method == "integral":
        return float(ml_integral(params, -z))
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    return float(ml_neg(params.a, params.b, -z))


__all__ = [
    "BACKEND",
    "MLContour",
    "MLParams",
    "backend_name",
    "contour_constants",
    "gamma_fn",
    "ml",
    "ml_integral",
    "ml_neg",
    "ml_series",
    "series_applicable",
    "series_radius",
    "SERIES_ZMAX",
]
