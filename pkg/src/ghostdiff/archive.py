"""Binary frame archives.

Layout (all little-endian)::

    5s  magic  b"GSIM1"
    u64 n      samples per row
    f64 dx     sample spacing in meters
    u32 arms   1 or 2
    u64 frames
    u64 seed
    f64[frames * arms * n]  rows: frame 0 arm 1, frame 0 arm 2, frame 1 arm 1, ...
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ArchiveError
from .grid import SampleGrid

MAGIC = b"GSIM1"
HEADER = struct.Struct("<5sQdIQQ")
DTYPE = np.dtype("<f8")


@dataclass(frozen=True)
class ArchiveHeader:
    n: int
    dx: float
    arms: int
    frames: int
    seed: int

    @property
    def grid(self) -> SampleGrid:
        return SampleGrid(self.n, self.dx)

    @property
    def frame_bytes(self) -> int:
        return self.arms * self.n * DTYPE.itemsize

    def pack(self) -> bytes:
        return HEADER.pack(MAGIC, self.n, self.dx, self.arms, self.frames, self.seed)


def _check_rows(rows: np.ndarray, what: str):
    if not np.all(np.isfinite(rows)):
        raise ArchiveError(f"{what} contains non-finite values")
    if np.any(rows < 0):
        raise ArchiveError(f"{what} contains negative intensities")


class ArchiveWriter:
    """Append frames strictly in frame order; the header count is fixed on close.

    Use as a context manager. If the block exits with an exception the
    partially written file is removed.
    """

    def __init__(self, path, grid: SampleGrid, arms: int, seed: int):
        if arms not in (1, 2):
            raise ArchiveError(f"arm count must be 1 or 2, got {arms}")
        self.path = Path(path)
        self.header = ArchiveHeader(grid.n, grid.dx, arms, 0, int(seed))
        self.frames = 0
        try:
            self._fh = open(self.path, "wb")
            self._fh.write(self.header.pack())
        except OSError as exc:
            raise ArchiveError(f"cannot write archive {self.path}: {exc}") from None

    def write(self, first_frame: int, arm1: np.ndarray, arm2: np.ndarray | None = None):
        if first_frame != self.frames:
            raise ArchiveError(f"out-of-order write: expected frame {self.frames}, got {first_frame}")
        arm1 = np.asarray(arm1, dtype=DTYPE)
        rows = [arm1]
        if self.header.arms == 2:
            if arm2 is None:
                raise ArchiveError("two-arm archive needs arm-2 rows")
            rows.append(np.asarray(arm2, dtype=DTYPE))
        block = np.stack(rows, axis=1)  # (frames, arms, n)
        if block.shape[2] != self.header.n:
            raise ArchiveError(f"row length {block.shape[2]} does not match n = {self.header.n}")
        _check_rows(block, f"frames {first_frame}..{first_frame + len(block) - 1}")
        try:
            self._fh.write(np.ascontiguousarray(block).tobytes())
        except OSError as exc:
            raise ArchiveError(f"cannot write archive {self.path}: {exc}") from None
        self.frames += block.shape[0]

    def close(self):
        if self._fh.closed:
            return
        try:
            self._fh.seek(0)
            self._fh.write(ArchiveHeader(self.header.n, self.header.dx, self.header.arms,
                                         self.frames, self.header.seed).pack())
        finally:
            self._fh.close()

    def abort(self):
        self._fh.close()
        self.path.unlink(missing_ok=True)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()
        return False


def read_header(path) -> ArchiveHeader:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read(HEADER.size)
        size = os.path.getsize(path)
    except OSError as exc:
        raise ArchiveError(f"cannot read archive {path}: {exc}") from None
    if len(raw) < HEADER.size:
        raise ArchiveError(f"{path} is too short for a header ({len(raw)} bytes)")
    magic, n, dx, arms, frames, seed = HEADER.unpack(raw)
    if magic != MAGIC:
        raise ArchiveError(f"{path} has magic {magic!r}, expected {MAGIC!r}")
    if arms not in (1, 2) or n < 8 or n & (n - 1) or not (np.isfinite(dx) and dx > 0):
        raise ArchiveError(f"{path} has an invalid header (n={n}, dx={dx}, arms={arms})")
    header = ArchiveHeader(n, dx, arms, frames, seed)
    payload = size - HEADER.size
    found, extra = divmod(payload, header.frame_bytes)
    if found != frames or extra:
        tail = f" plus {extra} stray bytes" if extra else ""
        raise ArchiveError(f"{path}: header declares {frames} frames, payload holds {found}{tail}")
    return header


def iter_frames(path, chunk: int = 250, header: ArchiveHeader | None = None
                ) -> Iterator[tuple[int, np.ndarray, np.ndarray | None]]:
    """Yield ``(first_frame, arm1_rows, arm2_rows)``; ``arm2_rows`` is None for one-arm archives."""
    header = header or read_header(path)
    with open(path, "rb") as fh:
        fh.seek(HEADER.size)
        for first in range(0, header.frames, chunk):
            count = min(chunk, header.frames - first)
            data = np.fromfile(fh, dtype=DTYPE, count=count * header.arms * header.n)
            if data.size != count * header.arms * header.n:
                raise ArchiveError(f"{path}: payload ended inside frame {first}")
            block = data.reshape(count, header.arms, header.n)
            _check_rows(block, f"{path} frames {first}..{first + count - 1}")
            yield first, block[:, 0], (block[:, 1] if header.arms == 2 else None)


def read_archive(path) -> tuple[ArchiveHeader, np.ndarray]:
    """Whole archive as an array of shape ``(frames, arms, n)``."""
    header = read_header(path)
    parts = [np.stack([a] if b is None else [a, b], axis=1) for _, a, b in iter_frames(path, header=header)]
    data = np.concatenate(parts) if parts else np.empty((0, header.arms, header.n))
    return header, data


def write_archive(path, grid: SampleGrid, seed: int, arm1: np.ndarray, arm2: np.ndarray | None = None):
    with ArchiveWriter(path, grid, 1 if arm2 is None else 2, seed) as w:
        w.write(0, arm1, arm2)
