"""Discrete fractional calculus on uniform time grids.

Riemann-Liouville integral I^alpha by trapezoidal product integration
(exact on piecewise-linear data), Riemann-Liouville derivative D^alpha as
n-fold differencing of I^(n-alpha), and the Caputo derivative as D^alpha of
the data minus its Taylor head at t=0.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizeError

_INT_SNAP = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < t_1 < ... < t_n = tmax."""

    tmax: float
    steps: int

    def __post_init__(self):
        if self.tmax <= 0.0:
            raise DomainError(f"horizon must be positive, got {self.tmax}")
        if self.steps < 2:
            raise SizeError(f"need at least 2 steps, got {self.steps}")

    @property
    def dt(self):
        return self.tmax / self.steps

    @property
    def nodes(self):
        return np.linspace(0.0, self.tmax, self.steps + 1)


@dataclass
class GridFunction:
    """Node values on a TimeGrid; piecewise-linear between nodes.

    ``values`` may be scalar per node (shape (n+1,)) or field valued
    (shape (n+1, ...)).
    """

    grid: TimeGrid
    values: np.ndarray
    interpolation: str = "linear"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.grid.steps + 1:
            raise SizeError(
                f"value count {self.values.shape[0]} does not match grid "
                f"({self.grid.steps + 1} nodes)"
            )
        if self.interpolation != "linear":
            raise DomainError(f"unsupported interpolation {self.interpolation!r}")


def _causal_conv(weights, values):
    """(w * v)_n = sum_{k} w_{n-k} v_k along axis 0, FFT accelerated."""
    n = values.shape[0]
    size = 1
    while size < 2 * n:
        size *= 2
    wf = np.fft.rfft(weights, size, axis=0)
    flat = values.reshape(n, -1)
    vf = np.fft.rfft(flat, size, axis=0)
    out = np.fft.irfft(wf[:, None] * vf, size, axis=0)[:n]
    return out.reshape(values.shape)


def trapezoid_pi_weights(alpha, n):
    """Trapezoidal product-integration pieces for I^alpha on n+1 nodes.

    Returns (head, interior) where the value at node m (m >= 1) is
    dt^alpha / Gamma(alpha+2) * (head_m f_0 + sum_{k=1}^{m-1}
    interior_{m-k} f_k + f_m).
    """
    k = np.arange(n + 1, dtype=float)
    head = np.zeros(n + 1)
    head[1:] = (k[1:] - 1.0) ** (1.0 + alpha) - (
        k[1:] - 1.0 - alpha
    ) * k[1:] ** alpha
    interior = np.zeros(n + 1)
    m = k[1:]
    interior[1:] = (
        (m + 1.0) ** (1.0 + alpha)
        - 2.0 * m ** (1.0 + alpha)
        + (m - 1.0) ** (1.0 + alpha)
    )
    return head, interior


def frac_integral(phi, alpha):
    """Riemann-Liouville fractional integral I^alpha of a grid function.

    Trapezoidal product integration of the weakly singular convolution;
    value at t=0 is exactly 0; second order for smooth data.
    """
    if alpha <= 0.0:
        raise DomainError(f"integration order must be positive, got {alpha}")
    n = phi.grid.steps
    h = phi.grid.dt
    vals = phi.values
    head, interior = trapezoid_pi_weights(alpha, n)

    # interior[0] = 0 and a zeroed first entry confine the convolution to
    # 1 <= k <= m-1 as required
    inner_src = vals.copy()
    inner_src[0] = 0.0
    inner = _causal_conv(interior, inner_src)

    out = np.zeros_like(vals)
    shape_tail = (1,) * (vals.ndim - 1)
    out[1:] = (
        head[1:].reshape(-1, *shape_tail) * vals[0]
        + inner[1:]
        + vals[1:]
    )
    out *= h**alpha / math.gamma(alpha + 2.0)
    out[0] = 0.0
    return GridFunction(phi.grid, out)


def _diff1(vals, h):
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * h)
    out[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
    out[-1] = (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * h)
    return out


def _diff2(vals, h):
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / h**2
    out[0] = (2.0 * vals[0] - 5.0 * vals[1] + 4.0 * vals[2] - vals[3]) / h**2
    out[-1] = (
        2.0 * vals[-1] - 5.0 * vals[-2] + 4.0 * vals[-3] - vals[-4]
    ) / h**2
    return out


def rl_derivative(phi, alpha):
    """Riemann-Liouville derivative D^alpha = (d/dt)^n I^(n-alpha).

    Orders within 1e-12 of an integer route to classical differencing
    (the fractional weights degenerate there).
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"derivative order must lie in (0, 2), got {alpha}")
    n_req = 4 if alpha > 1.0 - _INT_SNAP else 3
    if phi.grid.steps + 1 < n_req:
        raise SizeError(
            f"grid too short for the difference stencil: need >= {n_req} nodes"
        )
    h = phi.grid.dt
    if abs(alpha - 1.0) <= _INT_SNAP:
        return GridFunction(phi.grid, _diff1(phi.values, h))
    n = math.ceil(alpha)
    iorder = n - alpha
    smoothed = frac_integral(phi, iorder).values
    out = _diff1(smoothed, h) if n == 1 else _diff2(smoothed, h)
    return GridFunction(phi.grid, out)


def caputo_derivative(phi, alpha):
    """Caputo derivative: D^alpha applied to phi minus its Taylor head at 0.

    For alpha > 1 the initial slope is extracted with a second-order
    one-sided stencil.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"derivative order must lie in (0, 2), got {alpha}")
    vals = phi.values
    t = phi.grid.nodes.reshape((-1,) + (1,) * (vals.ndim - 1))
    head = np.broadcast_to(vals[0], vals.shape).copy()
    if alpha > 1.0 + _INT_SNAP:
        if vals.shape[0] < 3:
            raise SizeError("need >= 3 nodes to extract the initial slope")
        h = phi.grid.dt
        slope0 = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
        head = head + t * slope0
    reduced = GridFunction(phi.grid, vals - head)
    return rl_derivative(reduced, alpha)
