"""Binary checkpoints for :class:`~prodnls.fields.Field`.

Layout (little-endian)::

    magic      4 bytes  b"PNLS"
    version    u16      1
    n, k       u32 u32
    N_x, N_y   u32 u32
    L          f64
    radii      f64 * k
    time_tag   f64
    payload    (re, im) f64 pairs, x-fastest order

The payload is always the physical representation.  "x-fastest" means the
first Euclidean axis varies fastest and the last torus axis slowest
(Fortran order over the ``(x..., y...)`` array).
"""
from __future__ import annotations

import struct

import numpy as np

from .fields import Field
from .grid import BoxGrid, ProductGrid, TorusSpectrum

MAGIC = b"PNLS"
VERSION = 1
_HEAD = struct.Struct("<4sHIIIId")


class CheckpointError(ValueError):
    pass


class CorruptCheckpoint(CheckpointError):
    pass


class UnsupportedVersion(CheckpointError):
    pass


def save_checkpoint(f: Field, path) -> None:
    g = f.grid
    head = _HEAD.pack(MAGIC, VERSION, g.n, g.k, g.box.N, g.torus.N, float(g.box.L))
    tail = struct.pack(f"<{g.k}dd", *g.torus.radii, float(f.t))
    vals = np.asarray(f.physical(), dtype=np.complex128).ravel(order="F")
    payload = vals.astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head + tail + payload)


def load_checkpoint(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEAD.size:
        raise CorruptCheckpoint(f"{path}: file shorter than header")
    magic, version, n, k, nx, ny, L = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: checkpoint version {version}, reader supports {VERSION}")
    off = _HEAD.size
    tail = struct.Struct(f"<{k}dd")
    if len(raw) < off + tail.size:
        raise CorruptCheckpoint(f"{path}: truncated header")
    *radii, t = tail.unpack_from(raw, off)
    off += tail.size
    count = nx ** n * ny ** k
    if len(raw) - off != 16 * count:
        raise CorruptCheckpoint(
            f"{path}: payload has {len(raw) - off} bytes, header declares {16 * count}"
        )
    try:
        grid = ProductGrid(BoxGrid(n, L, nx), TorusSpectrum(k, tuple(radii), ny))
    except ValueError as exc:
        raise CorruptCheckpoint(f"{path}: invalid grid in header ({exc})") from exc
    vals = np.frombuffer(raw, dtype="<c16", offset=off, count=count)
    data = vals.reshape(grid.shape, order="F").astype(np.complex128)
    return Field(grid, data, "physical", float(t))
