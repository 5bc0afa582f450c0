"""Driving noises: compound-Poisson jump paths, Wiener increments, moment
functionals, stochastic integrals and the spatial white-noise expansion.

All jump laws on the menu have mean zero and bounded support, so each
Z^k is itself a square-integrable martingale (no compensator drift) and
every stochastic integral against it is an exact finite sum over jumps.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm as _gauss

from .errors import DomainError, ParameterError

TRUNC_GAUSS_CUT = 3.0
_LAWS = ("two_point", "uniform", "trunc_gauss")


@dataclass(frozen=True)
class LevySpec:
    """Finite-activity pure-jump noise: intensity, jump law, copy count.

    Coordinates of a jump are sampled independently; every menu law is
    symmetric about zero, so the driving process needs no drift correction.
    """

    rate: float
    law: str
    scale: float = 1.0
    dim: int = 1
    copies: int = 1

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ParameterError(f"jump intensity must be positive: {self.rate}")
        if self.law not in _LAWS:
            raise ParameterError(f"unknown jump law {self.law!r}; menu: {_LAWS}")
        if self.scale <= 0.0:
            raise ParameterError(f"jump scale must be positive: {self.scale}")
        if self.dim < 1 or self.copies < 1:
            raise ParameterError("dim and copies must be >= 1")


@dataclass
class JumpPath:
    """Ordered jump times in (0, T] and the jump vectors, one noise copy."""

    times: np.ndarray
    jumps: np.ndarray
    horizon: float
    seed: object = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.jumps = np.asarray(self.jumps, dtype=float)
        if self.jumps.ndim == 1:
            self.jumps = self.jumps[:, None]
        if self.times.ndim != 1 or self.jumps.shape[0] != self.times.shape[0]:
            raise DomainError("one jump vector per jump time required")
        if self.times.size and (
            np.any(np.diff(self.times) <= 0.0)
            or self.times[0] <= 0.0
            or self.times[-1] > self.horizon
        ):
            raise DomainError("jump times must be strictly increasing in (0, T]")

    @property
    def dim(self):
        return self.jumps.shape[1]

    def value(self, t):
        """Z_t, the running jump sum (cadlag), vectorized over t."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        csum = np.vstack([np.zeros((1, self.dim)), np.cumsum(self.jumps, axis=0)])
        return csum[idx]


@dataclass
class WienerPath:
    """Independent N(0, dt) increments, shape (steps, copies)."""

    tmax: float
    increments: np.ndarray
    seed: object = None

    def __post_init__(self):
        self.increments = np.asarray(self.increments, dtype=float)
        if self.increments.ndim == 1:
            self.increments = self.increments[:, None]

    @property
    def steps(self):
        return self.increments.shape[0]

    @property
    def copies(self):
        return self.increments.shape[1]

    @property
    def dt(self):
        return self.tmax / self.steps

    def value(self, i):
        """W at grid node i (cumulative increments), all copies."""
        out = np.zeros((self.steps + 1, self.copies))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out[i]


def _rng_for(seed, copy):
    if isinstance(seed, (tuple, list)):
        entropy = [int(s) for s in seed]
    else:
        entropy = int(seed)
    return np.random.default_rng(
        np.random.SeedSequence(entropy=entropy, spawn_key=(int(copy),))
    )


def _draw_jumps(spec, count, rng):
    shape = (count, spec.dim)
    if spec.law == "two_point":
        return spec.scale * rng.choice([-1.0, 1.0], size=shape)
    if spec.law == "uniform":
        return rng.uniform(-spec.scale, spec.scale, size=shape)
    # centered Gaussian conditioned on |z_i| <= cut * scale
    cut = TRUNC_GAUSS_CUT
    u = rng.uniform(_gauss.cdf(-cut), _gauss.cdf(cut), size=shape)
    return spec.scale * _gauss.ppf(u)


def sample_jump_path(spec, horizon, seed, copy=0):
    """One compound-Poisson path: Poisson(rate*T) count, sorted uniform
    times, i.i.d. jump vectors.  Deterministic in (seed, copy)."""
    if horizon <= 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    rng = _rng_for(seed, copy)
    count = int(rng.poisson(spec.rate * horizon))
    times = np.sort(rng.uniform(0.0, horizon, size=count))
    # zero-probability ties and endpoint hits are nudged for strictness
    times = np.maximum.accumulate(times + np.arange(count) * 0.0)
    jumps = _draw_jumps(spec, count, rng)
    return JumpPath(times=times, jumps=jumps, horizon=horizon, seed=(seed, copy))


def sample_jump_paths(spec, horizon, seed):
    return [sample_jump_path(spec, horizon, seed, k) for k in range(spec.copies)]


def sample_wiener_path(tmax, steps, copies, seed):
    rng = _rng_for(seed, 0)
    dt = tmax / steps
    inc = rng.normal(0.0, math.sqrt(dt), size=(steps, copies))
    return WienerPath(tmax=tmax, increments=inc, seed=seed)


def sample_wiener_on_nodes(nodes, copies, seed):
    """Wiener increments on an arbitrary strictly increasing node set."""
    nodes = np.asarray(nodes, dtype=float)
    rng = _rng_for(seed, 0)
    sd = np.sqrt(np.diff(nodes))
    inc = rng.normal(size=(nodes.size - 1, copies)) * sd[:, None]
    return WienerPath(tmax=float(nodes[-1]), increments=inc, seed=seed)


def paths_to_csv(path, jump_paths):
    """Serialize jump paths to CSV with columns k, time, z_1..z_d1."""
    import os
    import tempfile

    d1 = jump_paths[0].dim if jump_paths else 1
    header = "k,time," + ",".join(f"z_{r + 1}" for r in range(d1))
    dirname = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(header + "\n")
        for k, jp in enumerate(jump_paths):
            for i, t in enumerate(jp.times):
                cells = [str(k + 1), "%.17g" % t]
                cells += ["%.17g" % z for z in jp.jumps[i]]
                fh.write(",".join(cells) + "\n")
    os.replace(tmp, path)


def paths_from_csv(path):
    """Inverse of :func:`paths_to_csv`; returns a list of JumpPath."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = []
    if raw.size == 0:
        return out
    for k in sorted(set(raw[:, 0].astype(int))):
        rows = raw[raw[:, 0].astype(int) == k]
        horizon = float(rows[:, 1].max())
        out.append(JumpPath(times=rows[:, 1], jumps=rows[:, 2:],
                            horizon=horizon))
    return out


def _abs_moment_1d(spec, p):
    s = spec.scale
    if spec.law == "two_point":
        return s**p
    if spec.law == "uniform":
        return s**p / (p + 1.0)
    cut = TRUNC_GAUSS_CUT
    z = 2.0 * _gauss.cdf(cut) - 1.0
    val, _ = quad(lambda x: abs(x) ** p * _gauss.pdf(x), -cut, cut)
    return s**p * val / z


def moment_mp(spec, p):
    """m_p = (integral |z|^p over the jump measure)^(1/p); the measure has
    total mass ``rate``."""
    if p < 2.0:
        raise DomainError(f"moment order must be >= 2, got {p}")
    if spec.dim == 1:
        mom = _abs_moment_1d(spec, p)
    elif spec.law == "two_point":
        mom = (spec.dim * spec.scale**2) ** (p / 2.0)
    elif p == 2.0:
        mom = spec.dim * _abs_moment_1d(spec, 2.0)
    else:
        mom = _radial_moment_quad(spec, p)
    return float((spec.rate * mom) ** (1.0 / p))


def _radial_moment_quad(spec, p, nodes=80):
    """E|z|^p for independent symmetric coordinates, tensor Gauss-Legendre.

    Each axis integrates 2*density over [0, support]; evenness of |z|^p
    makes this exact for the full cube.
    """
    x01, w01 = np.polynomial.legendre.leggauss(nodes)
    x01 = 0.5 * (x01 + 1.0)
    w01 = 0.5 * w01
    if spec.law == "uniform":
        x = spec.scale * x01
        w = w01  # 2 * (1/(2s)) * s
    else:
        cut = TRUNC_GAUSS_CUT
        z = 2.0 * _gauss.cdf(cut) - 1.0
        u = cut * x01
        x = spec.scale * u
        w = w01 * cut * 2.0 * _gauss.pdf(u) / z
    grids = np.meshgrid(*([x] * spec.dim), indexing="ij")
    weights = np.ones_like(grids[0])
    for ax in range(spec.dim):
        sh = [1] * spec.dim
        sh[ax] = nodes
        weights = weights * w.reshape(sh)
    r2 = sum(g**2 for g in grids)
    return float((r2 ** (p / 2.0) * weights).sum())


def step_value_before(times, values, s):
    """Value of the left-continuous step function at s-, where values[j]
    rules the interval (times[j], times[j+1]]."""
    j = int(np.searchsorted(times, s, side="left")) - 1
    return values[max(j, 0)]


def stochastic_integral(h_values, time_nodes, path, eval_times=None):
    """Integral of a predictable step function against one noise path.

    ``h_values[j]`` is the integrand on (time_nodes[j], time_nodes[j+1]].
    Jump case: exact sum of h(s-) * dZ over jumps; Wiener case: sum of
    h_j * dW_j per step.  Returns (times, values) sampled cadlag at the
    grid nodes plus (for jumps) the jump times.
    """
    time_nodes = np.asarray(time_nodes, dtype=float)
    h_values = np.asarray(h_values, dtype=float)
    if h_values.shape[0] != time_nodes.shape[0] - 1:
        raise DomainError("need one integrand value per grid interval")

    if isinstance(path, WienerPath):
        if path.steps != time_nodes.shape[0] - 1:
            raise DomainError("integrand grid must match the Wiener grid")
        inc = path.increments[:, 0]
        vals = np.concatenate([[0.0], np.cumsum(h_values * inc)])
        return time_nodes, vals

    jt = path.times
    idx = np.searchsorted(time_nodes, jt, side="left") - 1
    idx = np.clip(idx, 0, len(h_values) - 1)
    if jt.size:
        hv = np.atleast_2d(h_values.T).T[idx].reshape(jt.size, -1)
        contrib = np.einsum("nr,nr->n", hv, path.jumps)
    else:
        contrib = np.zeros(0)
    out_times = eval_times
    if out_times is None:
        out_times = np.union1d(time_nodes, jt)
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    pos = np.searchsorted(jt, out_times, side="right")
    return out_times, cum[pos]


def quad_variation(h_values, time_nodes, path, t):
    """Quadratic variation sum over jumps up to t of (h(s-) . dZ)^2."""
    total = 0.0
    h_values = np.asarray(h_values, dtype=float)
    for n, s in enumerate(path.times):
        if s > t:
            break
        hv = step_value_before(time_nodes, h_values, s)
        total += float(np.dot(np.atleast_1d(hv), path.jumps[n])) ** 2
    return total


def trig_basis(grid, count):
    """First ``count`` functions of the real trigonometric orthonormal
    basis on the torus, ordered by frequency magnitude.

    Shape (count, *grid.shape); discrete cell-weighted inner products are
    exactly orthonormal below the Nyquist shell.
    """
    f = grid.axis_freqs()
    mesh = np.meshgrid(*([f] * grid.dim), indexing="ij")
    xi = np.stack([m.ravel() for m in mesh], axis=1)
    mag = (xi**2).sum(axis=1)
    order = np.lexsort((*[xi[:, c] for c in range(grid.dim)], mag))
    xs = np.stack([m.ravel() for m in np.meshgrid(
        *([grid.axis_nodes()] * grid.dim), indexing="ij")], axis=1)
    vol = grid.volume
    funcs = []
    seen = set()
    for i in order:
        if len(funcs) >= count:
            break
        key = tuple(np.round(xi[i], 12))
        negkey = tuple(np.round(-xi[i], 12))
        if key in seen or negkey in seen:
            continue
        seen.add(key)
        if mag[i] == 0.0:
            funcs.append(np.full(grid.shape, 1.0 / math.sqrt(vol)))
            continue
        phase = xs @ xi[i]
        funcs.append(
            math.sqrt(2.0 / vol) * np.cos(phase).reshape(grid.shape)
        )
        if len(funcs) < count:
            funcs.append(
                math.sqrt(2.0 / vol) * np.sin(phase).reshape(grid.shape)
            )
    if len(funcs) < count:
        raise DomainError(
            f"grid resolves only {len(funcs)} basis functions, need {count}"
        )
    return np.stack(funcs)


@dataclass
class WhiteNoiseExpansion:
    """Pairs of orthonormal spatial basis functions and independent jump
    paths; integration of a space-time step function reduces to scalar
    stochastic integrals per pair."""

    grid: object
    basis: np.ndarray
    paths: list = field(default_factory=list)

    @property
    def copies(self):
        return self.basis.shape[0]

    def integrate(self, x_values, time_nodes, t):
        """Integral over (0, t] x torus of X against the expanded noise.

        ``x_values[j]`` is the field ruling (time_nodes[j], time_nodes[j+1]].
        """
        total = 0.0
        cell = self.grid.cell_volume
        for k in range(self.copies):
            coeff = np.tensordot(
                np.asarray(x_values), self.basis[k], axes=self.grid.dim
            ) * cell
            for n, s in enumerate(self.paths[k].times):
                if s > t:
                    break
                hv = step_value_before(time_nodes, coeff, s)
                total += float(hv) * float(self.paths[k].jumps[n].sum())
        return total


def white_noise_field(spec, count, grid, horizon, seed):
    """White-noise expansion handle: trig basis plus one jump path per
    basis function."""
    if spec.dim != 1:
        raise ParameterError("white-noise expansion uses scalar jumps (dim=1)")
    basis = trig_basis(grid, count)
    paths = [sample_jump_path(spec, horizon, seed, k) for k in range(count)]
    return WhiteNoiseExpansion(grid=grid, basis=basis, paths=paths)
