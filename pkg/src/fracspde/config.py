"""Run-configuration parsing, digests, manifests and atomic JSON output.

The experiment document is plain JSON; every numeric CLI flag has a config
equivalent and flags override the file.  Digests are taken over the
canonical encoding (sorted keys), so key order never changes identity.
"""

import hashlib
import json
import math
import os
import tempfile
import time

import numpy as np

from . import __version__
from .errors import ConfigError
from .kernels import TorusGrid
from .levy import LevySpec
from .solver import ProblemParams, TimeMesh
from .verify import derived_exponents, random_smooth_field, seed_key


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_digest(doc):
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def write_json_atomic(path, doc):
    dirname = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _need(doc, key, pointer, types, default=None, required=False):
    if key not in doc:
        if required:
            raise ConfigError(f"missing key at {pointer}/{key}", f"{pointer}/{key}")
        return default
    val = doc[key]
    if types and not isinstance(val, types):
        raise ConfigError(
            f"wrong type at {pointer}/{key}: expected {types}", f"{pointer}/{key}"
        )
    return val


_CONSTRAINT_KEY = {
    "0 < alpha < 2": "alpha",
    "beta1 < alpha + 1/2": "beta1",
    "beta2 < alpha + 1/p": "beta2",
    "p >= 2": "p",
    "kappa > 0": "kappa",
}


def parse_params(doc, pointer="/params"):
    from .errors import ParameterError

    alpha = _need(doc, "alpha", pointer, (int, float), required=True)
    beta1 = _need(doc, "beta1", pointer, (int, float), required=True)
    beta2 = _need(doc, "beta2", pointer, (int, float), required=True)
    p = _need(doc, "p", pointer, (int, float), required=True)
    gamma = _need(doc, "gamma", pointer, (int, float), default=0.0)
    kappa = _need(doc, "kappa", pointer, (int, float), default=0.01)
    try:
        return ProblemParams(float(alpha), float(beta1), float(beta2),
                             float(p), float(gamma), float(kappa))
    except ParameterError as exc:
        name = str(exc).split(": ", 1)[-1]
        key = _CONSTRAINT_KEY.get(name, "alpha")
        raise ConfigError(
            f"constraint violated at {pointer}/{key}: {name}",
            f"{pointer}/{key}",
        ) from exc


def parse_grid(doc, pointer="/grid"):
    d = _need(doc, "d", pointer, int, required=True)
    n = _need(doc, "N", pointer, int, required=True)
    length = _need(doc, "L", pointer, (int, float), default=2.0 * math.pi)
    try:
        return TorusGrid(d, n, float(length))
    except Exception as exc:
        raise ConfigError(f"invalid grid at {pointer}: {exc}", pointer) from exc


def parse_time(doc, pointer="/time"):
    tmax = _need(doc, "T", pointer, (int, float), required=True)
    steps = _need(doc, "steps", pointer, int, required=True)
    try:
        return TimeMesh.uniform(float(tmax), steps)
    except Exception as exc:
        raise ConfigError(f"invalid time grid at {pointer}: {exc}", pointer) from exc


def parse_levy(doc, pointer="/noise/levy"):
    if doc is None:
        return None
    rate = _need(doc, "lambda", pointer, (int, float), required=True)
    law = _need(doc, "law", pointer, str, default="two_point")
    sigma = _need(doc, "sigma", pointer, (int, float), default=1.0)
    d1 = _need(doc, "d1", pointer, int, default=1)
    copies = _need(doc, "K", pointer, int, default=1)
    try:
        return LevySpec(float(rate), law, float(sigma), d1, copies)
    except Exception as exc:
        raise ConfigError(f"invalid jump noise at {pointer}: {exc}", pointer) from exc


def build_field(doc, grid, pointer):
    """Field presets: zero, constant, mode (cosine), random_smooth."""
    if doc is None:
        return None
    preset = _need(doc, "preset", pointer, str, required=True)
    if preset == "zero":
        return np.zeros(grid.shape)
    if preset == "constant":
        value = _need(doc, "value", pointer, (int, float), default=1.0)
        return np.full(grid.shape, float(value))
    if preset == "mode":
        kvec = _need(doc, "k", pointer, list, required=True)
        amp = _need(doc, "amplitude", pointer, (int, float), default=1.0)
        if len(kvec) != grid.dim:
            raise ConfigError(
                f"mode vector length must equal grid dimension at {pointer}/k",
                f"{pointer}/k",
            )
        xs = grid.meshes()
        phase = sum(
            (2.0 * math.pi / grid.length) * int(kvec[ax]) * xs[ax]
            for ax in range(grid.dim)
        )
        return float(amp) * np.cos(phase)
    if preset == "random_smooth":
        seed = _need(doc, "seed", pointer, int, default=0)
        decay = _need(doc, "decay", pointer, (int, float), default=3.0)
        amp = _need(doc, "amplitude", pointer, (int, float), default=1.0)
        return random_smooth_field(grid, seed_key(seed), float(decay), float(amp))
    raise ConfigError(f"unknown preset {preset!r} at {pointer}/preset",
                      f"{pointer}/preset")


def time_envelope(name, nodes, pointer):
    if name in (None, "constant"):
        return np.ones_like(nodes)
    if name == "cos":
        return np.cos(2.0 * math.pi * nodes / max(nodes[-1], 1e-300))
    if name == "linear":
        return 1.0 + nodes / max(nodes[-1], 1e-300)
    raise ConfigError(f"unknown envelope {name!r} at {pointer}/envelope",
                      f"{pointer}/envelope")


def build_map(doc, pointer):
    """Pointwise semilinear maps expressible in configuration."""
    if doc is None:
        return None
    kind = _need(doc, "map", pointer, str, required=True)
    coeff = float(_need(doc, "coeff", pointer, (int, float), default=1.0))
    if kind == "linear":
        return lambda u, t, xs: coeff * u, abs(coeff)
    if kind == "sin":
        return lambda u, t, xs: coeff * np.sin(u), abs(coeff)
    raise ConfigError(f"unknown map {kind!r} at {pointer}/map", f"{pointer}/map")


def make_manifest(doc, seeds, params, outputs, wall_time, extra=None):
    from .specfun import backend_name

    return {
        "config_digest": config_digest(doc),
        "seeds": list(seeds),
        "derived_exponents": derived_exponents(params) if params else None,
        "tool_version": __version__,
        "backend": backend_name(),
        "wall_time_s": wall_time,
        "outputs": list(outputs),
        **(extra or {}),
    }


def timer():
    return time.perf_counter()
