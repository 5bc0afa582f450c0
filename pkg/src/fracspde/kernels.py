"""Fundamental-solution kernels on periodic grids via Fourier symbols.

The three kernels (initial-data propagator p, noise filter q_{alpha,beta},
initial-velocity propagator P) share one symbol family

    |xi|^gamma * t^(alpha-beta-sigma) * E_{alpha,1+alpha-beta-sigma}(-t^alpha |xi|^2)

evaluated through the Mittag-Leffler dispatcher with radial caching.
Space is a torus of period L; the period is chosen by callers so the
exponential tail bound keeps the wrapped mass negligible.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ResolutionError
from .specfun import ml_neg


@dataclass(frozen=True)
class TorusGrid:
    """Periodic grid: ``modes`` points per axis on a cube of side ``length``."""

    dim: int
    modes: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.modes < 8 or self.modes % 2:
            raise DomainError(
                f"modes per axis must be even and >= 8, got {self.modes}"
            )
        if self.length <= 0.0:
            raise DomainError(f"period must be positive, got {self.length}")

    @property
    def shape(self):
        return (self.modes,) * self.dim

    @property
    def cell_volume(self):
        return (self.length / self.modes) ** self.dim

    @property
    def volume(self):
        return self.length**self.dim

    @property
    def nyquist(self):
        return math.pi * self.modes / self.length

    def axis_nodes(self):
        return np.arange(self.modes) * (self.length / self.modes)

    def axis_freqs(self):
        return (
            2.0 * math.pi / self.length
        ) * np.fft.fftfreq(self.modes, d=1.0 / self.modes)

    def xi_sq(self):
        """|xi|^2 over the full mode lattice, shape ``self.shape``."""
        f = self.axis_freqs()
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = self.modes
            out = out + (f.reshape(sh)) ** 2
        return out

    def fourier(self, field):
        """Fourier coefficients normalized as integrals over the torus."""
        return np.fft.fftn(np.asarray(field)) * self.cell_volume

    def inverse(self, hat):
        """Real field from integral-normalized coefficients."""
        return np.fft.ifftn(hat).real / self.cell_volume

    def meshes(self):
        x = self.axis_nodes()
        return np.meshgrid(*([x] * self.dim), indexing="ij")


@dataclass(frozen=True)
class KernelSymbol:
    """One kernel at one time, plus optional derivative/Laplacian weights.

    kind 'p' propagates initial data (beta = alpha), kind 'P' the initial
    velocity (beta = alpha - 1, needs alpha > 1), kind 'q' takes an explicit
    beta < alpha + 1/2.  ``time_derivative`` is the order sigma of D_t^sigma
    (0 or 1, via the exact parameter shift), ``frac_order`` the order gamma
    of an extra (-Delta)^(gamma/2).
    """

    kind: str
    alpha: float
    t: float
    beta: float = None
    time_derivative: int = 0
    frac_order: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.t <= 0.0:
            raise ParameterError(f"time must be positive, got {self.t}")
        if self.time_derivative not in (0, 1):
            raise ParameterError("time derivative order must be 0 or 1")
        if self.frac_order < 0.0:
            raise ParameterError("fractional Laplacian order must be >= 0")
        if self.kind == "p":
            if self.beta is not None and self.beta != self.alpha:
                raise ParameterError("kind 'p' fixes beta = alpha")
        elif self.kind == "P":
            if self.alpha <= 1.0:
                raise ParameterError(
                    "kind 'P' needs alpha > 1 (it propagates the initial slope)"
                )
            if self.beta is not None and self.beta != self.alpha - 1.0:
                raise ParameterError("kind 'P' fixes beta = alpha - 1")
        elif self.kind == "q":
            if self.beta is None:
                raise ParameterError("kind 'q' needs an explicit beta")
            if not self.beta < self.alpha + 0.5:
                raise ParameterError(
                    f"kind 'q' needs beta < alpha + 1/2, got beta={self.beta}"
                )
        else:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")

    @property
    def beta_effective(self):
        if self.kind == "p":
            return self.alpha
        if self.kind == "P":
            return self.alpha - 1.0
        return self.beta

    @property
    def ml_b(self):
        return 1.0 + self.alpha - self.beta_effective - self.time_derivative

    @property
    def time_power(self):
        return self.alpha - self.beta_effective - self.time_derivative


def symbol_value(sym, xi_sq):
    """Symbol at squared frequency values (scalar or array).

    Returns |xi|^gamma t^(alpha-beta-sigma) E_{alpha,b}(-t^alpha |xi|^2)
    with b = 1 + alpha - beta - sigma resolved from the kind.
    """
    xi_sq = np.asarray(xi_sq, dtype=float)
    if np.any(xi_sq < 0.0):
        raise DomainError("squared frequencies must be nonnegative")
    vals = ml_neg(sym.alpha, sym.ml_b, sym.t**sym.alpha * xi_sq)
    out = sym.t**sym.time_power * vals
    if sym.frac_order > 0.0:
        out = out * xi_sq ** (sym.frac_order / 2.0)
    return out


def symbol_on_grid(sym, grid):
    """Symbol over the full mode lattice, radially cached."""
    xi_sq = grid.xi_sq()
    uniq, inv = np.unique(xi_sq.ravel(), return_inverse=True)
    vals = symbol_value(sym, uniq)
    return vals[inv].reshape(grid.shape)


def _required_modes(sym, grid, alias_tol, corner, snyq):
    # power-law extrapolation of the symbol decay over the last octave
    inner = symbol_value(sym, corner / 4.0)
    if snyq <= 0.0 or abs(inner) <= abs(snyq):
        return 4 * grid.modes
    q = math.log(abs(inner) / abs(snyq)) / math.log(4.0)
    factor = (abs(snyq) / alias_tol) ** (1.0 / max(q, 0.25))
    n = grid.modes * math.sqrt(factor)
    return int(2 * math.ceil(n / 2.0 + 1.0))


def kernel_field(sym, grid, alias_tol=1e-12):
    """Real-space kernel on the grid from its sampled symbol.

    The symbol magnitude at the corner frequency must fall below
    ``alias_tol``; fractional symbols decay only like |xi|^-2, so callers
    working with them pass an explicit looser tolerance or project onto
    dyadic bands first.
    """
    corner = grid.dim * grid.nyquist**2
    snyq = float(abs(symbol_value(sym, corner)))
    if snyq >= alias_tol:
        need = _required_modes(sym, grid, alias_tol, corner, snyq)
        raise ResolutionError(
            f"symbol magnitude {snyq:.3e} at the corner frequency exceeds "
            f"{alias_tol:.1e}; roughly {need} modes per axis would resolve it",
            required_n=need,
        )
    return grid.inverse(symbol_on_grid(sym, grid))


def kernel_point_values(sym, grid, points):
    """Kernel values at arbitrary locations by direct Fourier summation.

    Exact for the band-limited torus kernel; used for off-grid checks.
    ``points`` has shape (npts, dim).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != grid.dim:
        raise DomainError("points must have one column per space dimension")
    hat = symbol_on_grid(sym, grid).ravel()
    f = grid.axis_freqs()
    mesh = np.meshgrid(*([f] * grid.dim), indexing="ij")
    xi = np.stack([m.ravel() for m in mesh], axis=1)  # (modes^d, dim)
    phase = pts @ xi.T
    vals = (np.exp(1j * phase) @ hat).real / grid.volume
    return vals


def spectral_multiplier(field, grid, kind, gamma):
    """Apply (-Delta)^(gamma/2) or (1-Delta)^(gamma/2) mode by mode."""
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise DomainError(
            f"field shape {field.shape} does not match grid {grid.shape}"
        )
    xi_sq = grid.xi_sq()
    if kind == "frac_laplacian":
        mult = xi_sq ** (gamma / 2.0) if gamma != 0.0 else np.ones_like(xi_sq)
    elif kind == "bessel":
        mult = (1.0 + xi_sq) ** (gamma / 2.0)
    else:
        raise DomainError(f"unknown multiplier kind {kind!r}")
    return grid.inverse(mult * grid.fourier(field))
