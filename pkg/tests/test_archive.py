import numpy as np
import pytest

from ghostdiff.archive import HEADER, MAGIC, ArchiveWriter, iter_frames, read_archive, read_header, write_archive
from ghostdiff.errors import ArchiveError
from ghostdiff.grid import SampleGrid

GRID = SampleGrid(16, 1e-6)


def _rows(seed=0, frames=5):
    rng = np.random.default_rng(seed)
    return rng.exponential(size=(frames, 16)), rng.exponential(size=(frames, 16))


def test_round_trip_bit_exact(tmp_path):
    a, b = _rows()
    path = tmp_path / "f.gsim"
    write_archive(path, GRID, 42, a, b)
    header, data = read_archive(path)
    assert (header.n, header.dx, header.arms, header.frames, header.seed) == (16, 1e-6, 2, 5, 42)
    assert data[:, 0].tobytes() == a.tobytes() and data[:, 1].tobytes() == b.tobytes()


def test_layout(tmp_path):
    a, b = _rows(frames=2)
    path = tmp_path / "f.gsim"
    write_archive(path, GRID, 7, a, b)
    raw = path.read_bytes()
    assert raw[:5] == MAGIC == b"GSIM1"
    payload = np.frombuffer(raw[HEADER.size:], dtype="<f8")
    np.testing.assert_array_equal(payload, np.concatenate([a[0], b[0], a[1], b[1]]))
    assert len(raw) == HEADER.size + 2 * 2 * 16 * 8


def test_single_arm(tmp_path):
    a, _ = _rows()
    path = tmp_path / "h.gsim"
    write_archive(path, GRID, 1, a)
    header = read_header(path)
    assert header.arms == 1
    chunks = list(iter_frames(path, chunk=2))
    assert [c[0] for c in chunks] == [0, 2, 4] and chunks[0][2] is None


def test_truncated_file_names_counts(tmp_path):
    a, b = _rows()
    path = tmp_path / "f.gsim"
    write_archive(path, GRID, 1, a, b)
    raw = path.read_bytes()
    path.write_bytes(raw[:-2 * 16 * 8])
    with pytest.raises(ArchiveError, match="declares 5 frames, payload holds 4"):
        read_header(path)
    path.write_bytes(raw[:-3])
    with pytest.raises(ArchiveError, match="stray bytes"):
        read_header(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "x.gsim"
    path.write_bytes(b"NOPE!" + bytes(60))
    with pytest.raises(ArchiveError, match="magic"):
        read_header(path)
    path.write_bytes(b"GS")
    with pytest.raises(ArchiveError):
        read_header(path)
    with pytest.raises(ArchiveError):
        read_header(tmp_path / "missing.gsim")


def test_nan_payload_rejected(tmp_path):
    a, b = _rows()
    path = tmp_path / "f.gsim"
    write_archive(path, GRID, 1, a, b)
    raw = bytearray(path.read_bytes())
    raw[HEADER.size + 8 * 20:HEADER.size + 8 * 21] = np.array([np.nan], "<f8").tobytes()
    path.write_bytes(bytes(raw))
    with pytest.raises(ArchiveError, match="non-finite"):
        read_archive(path)


def test_writer_rejects_bad_rows(tmp_path):
    a, b = _rows()
    with pytest.raises(ArchiveError):
        write_archive(tmp_path / "neg.gsim", GRID, 1, -a, b)
    assert not (tmp_path / "neg.gsim").exists()
    w = ArchiveWriter(tmp_path / "o.gsim", GRID, 2, 1)
    with pytest.raises(ArchiveError, match="out-of-order"):
        w.write(3, a, b)
    w.abort()
