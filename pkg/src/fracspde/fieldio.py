"""Binary field-file format.

Layout: a 32-byte header (magic ``FSPDEF1\\0``, int64 dimension, int64
modes per axis, float64 period, all little-endian) followed by the field
as row-major little-endian float64.
"""

import os
import struct
import tempfile

import numpy as np

from .errors import ConfigError
from .kernels import TorusGrid

MAGIC = b"FSPDEF1\x00"
_HEADER = struct.Struct("<8sqqd")

assert _HEADER.size == 32


def write_field(path, field, grid):
    """Write a field atomically (temp file then rename)."""
    field = np.ascontiguousarray(field, dtype="<f8")
    if field.shape != grid.shape:
        raise ConfigError(
            f"field shape {field.shape} does not match grid {grid.shape}"
        )
    header = _HEADER.pack(MAGIC, grid.dim, grid.modes, grid.length)
    dirname = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(field.tobytes(order="C"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_field(path):
    """Read a field file; returns (field, grid)."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ConfigError(f"{path}: truncated header")
        magic, dim, modes, length = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ConfigError(f"{path}: bad magic {magic!r}")
        grid = TorusGrid(int(dim), int(modes), float(length))
        count = modes**dim
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
        if data.size != count:
            raise ConfigError(f"{path}: truncated payload")
    return data.reshape(grid.shape).astype(float), grid
