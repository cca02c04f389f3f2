import numpy as np
import pytest

from entroscope.dynamics import Ensemble, ModelParams
from entroscope.field import Field, FieldPair, Grid
from entroscope.snapshots import (
    MAGIC,
    MagicError,
    SnapshotHeader,
    TruncatedError,
    VersionError,
    load_snapshot,
    save_snapshot,
)


@pytest.fixture
def ensemble():
    grid = Grid(-10.0, 10.0, 64)
    rng = np.random.default_rng(1)
    members = [
        FieldPair(Field(grid, rng.standard_normal(grid.n)),
                  Field(grid, rng.standard_normal(grid.n)))
        for _ in range(3)
    ]
    return Ensemble(members, 12.5, 77, ModelParams(eta=0.12))


def test_roundtrip_bit_exact(ensemble, tmp_path):
    path = tmp_path / "ens.bin"
    save_snapshot(ensemble, path)
    loaded = load_snapshot(path)
    assert len(loaded.members) == len(ensemble.members)
    assert loaded.seed == 77
    assert loaded.burn_in_time == 12.5
    assert loaded.params.eta == 0.12
    for a, b in zip(ensemble.members, loaded.members):
        assert np.array_equal(a.u.samples, b.u.samples)
        assert np.array_equal(a.v.samples, b.v.samples)
        assert a.u.grid == b.u.grid


def test_header_count_matches_members(ensemble, tmp_path):
    path = tmp_path / "ens.bin"
    save_snapshot(ensemble, path)
    header = SnapshotHeader.unpack(path.read_bytes())
    assert header.count == len(ensemble.members)
    assert header.magic == MAGIC


def test_truncated_payload_rejected(ensemble, tmp_path):
    path = tmp_path / "ens.bin"
    save_snapshot(ensemble, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(TruncatedError):
        load_snapshot(path)


def test_bad_magic_rejected(ensemble, tmp_path):
    path = tmp_path / "ens.bin"
    save_snapshot(ensemble, path)
    raw = bytearray(path.read_bytes())
    raw[:8] = b"NOTMAGIC"
    path.write_bytes(bytes(raw))
    with pytest.raises(MagicError):
        load_snapshot(path)


def test_unsupported_version_rejected(ensemble, tmp_path):
    path = tmp_path / "ens.bin"
    save_snapshot(ensemble, path)
    raw = bytearray(path.read_bytes())
    raw[8:12] = (99).to_bytes(4, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(VersionError):
        load_snapshot(path)


def test_short_header_rejected(tmp_path):
    path = tmp_path / "ens.bin"
    path.write_bytes(b"ENTROSC1")
    with pytest.raises(TruncatedError):
        load_snapshot(path)
