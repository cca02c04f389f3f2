"""Binary snapshot persistence for ensembles.

Layout (all little-endian):

    magic     8 bytes   b"ENTROSC1"
    version   u32       1
    x_min     f64
    x_max     f64
    n         u32       grid points
    eta       f64
    count     u32       members
    seed      i64
    burn_in   f64
    payload   count * 2 * n * f64, per member u then v

Round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import Ensemble, ModelParams
from .field import Field, FieldPair, Grid

MAGIC = b"ENTROSC1"
VERSION = 1
_HEADER = struct.Struct("<8sIddIdIqd")


class SnapshotError(IOError):
    pass


class MagicError(SnapshotError):
    pass


class VersionError(SnapshotError):
    pass


class TruncatedError(SnapshotError):
    pass


@dataclass(frozen=True)
class SnapshotHeader:
    magic: bytes
    version: int
    x_min: float
    x_max: float
    n: int
    eta: float
    count: int
    seed: int
    burn_in: float

    def pack(self) -> bytes:
        return _HEADER.pack(self.magic, self.version, self.x_min, self.x_max,
                            self.n, self.eta, self.count, self.seed, self.burn_in)

    @classmethod
    def unpack(cls, raw: bytes) -> "SnapshotHeader":
        if len(raw) < _HEADER.size:
            raise TruncatedError(f"header needs {_HEADER.size} bytes, got {len(raw)}")
        return cls(*_HEADER.unpack(raw[: _HEADER.size]))

    @property
    def payload_bytes(self) -> int:
        return self.count * 2 * self.n * 8


def save_snapshot(ens: Ensemble, path) -> None:
    grid = ens.grid
    header = SnapshotHeader(MAGIC, VERSION, grid.x_min, grid.x_max, grid.n,
                            ens.params.eta, len(ens.members), ens.seed,
                            ens.burn_in_time)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        for m in ens.members:
            fh.write(m.u.samples.astype("<f8").tobytes())
            fh.write(m.v.samples.astype("<f8").tobytes())


def load_snapshot(path, params: ModelParams | None = None) -> Ensemble:
    raw = Path(path).read_bytes()
    header = SnapshotHeader.unpack(raw)
    if header.magic != MAGIC:
        raise MagicError(f"bad magic {header.magic!r}, expected {MAGIC!r}")
    if header.version != VERSION:
        raise VersionError(f"unsupported snapshot version {header.version}")
    payload = raw[_HEADER.size:]
    if len(payload) != header.payload_bytes:
        raise TruncatedError(
            f"payload is {len(payload)} bytes, header promises {header.payload_bytes}"
        )
    grid = Grid(header.x_min, header.x_max, header.n)
    if params is None:
        params = ModelParams(eta=header.eta)
    members = []
    stride = header.n * 8
    for i in range(header.count):
        off = i * 2 * stride
        u = np.frombuffer(payload, dtype="<f8", count=header.n, offset=off)
        v = np.frombuffer(payload, dtype="<f8", count=header.n, offset=off + stride)
        members.append(FieldPair(Field(grid, u.copy()), Field(grid, v.copy())))
    return Ensemble(members, header.burn_in, header.seed, params)
