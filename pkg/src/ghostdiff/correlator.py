"""Streaming estimation of the intensity covariance <I1 I2> - <I1><I2>.

Frames are summed into ``n_blocks`` interleaved blocks (frame ``k`` goes to
block ``k % n_blocks``). Totals are always formed by adding the blocks in
block order, so the result depends only on which frames were added, not on
how the work was split, and the blocks double as jackknife groups.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import kernels
from .errors import ValidationError
from .grid import IntensityFrame, SampleGrid


class PairingMode(str, Enum):
    GHOST = "ghost_symmetric"
    HBT = "hbt_symmetric"
    FULL = "full_matrix"

    @property
    def two_arm(self) -> bool:
        return self is not PairingMode.HBT


class CorrelationAccumulator:
    """Per-block running sums of I1, I2 and I1*I2.

    Symmetric modes have one bin per grid sample ``j = 1 .. n-1`` at
    coordinate ``x[j]``. In ghost mode bin ``j`` pairs arm-1 at ``-x[j]``
    with arm-2 at ``x[j]``; in HBT mode it pairs arm-1 at ``-x[j]`` with
    arm-1 at ``x[j]``. Full-matrix mode keeps every ``decimation``-th sample
    of both arms.
    """

    def __init__(self, grid: SampleGrid, mode, n_blocks: int = 20, decimation: int = 1,
                 backend: str | None = None):
        self.grid = grid
        try:
            self.mode = PairingMode(mode)
        except ValueError:
            raise ValidationError(f"unknown pairing mode {mode!r}") from None
        if n_blocks < 1:
            raise ValidationError("need at least one block")
        self.n_blocks = int(n_blocks)
        self.decimation = int(decimation)
        self._backend = kernels.get_backend(backend)
        if self.mode is PairingMode.FULL:
            if self.decimation < 1 or grid.n % self.decimation:
                raise ValidationError("decimation must divide the grid size")
            self.cols = np.arange(0, grid.n, self.decimation)
            m = self.cols.size
            shape12 = (self.n_blocks, m, m)
            self.coordinate = grid.x[self.cols]
        else:
            self.cols2 = np.arange(1, grid.n, dtype=np.int64)
            self.cols1 = np.ascontiguousarray(grid.mirror_index[1:], dtype=np.int64)
            m = self.cols2.size
            shape12 = (self.n_blocks, m)
            self.coordinate = grid.x[1:]
        self.s1 = np.zeros((self.n_blocks, m))
        self.s2 = np.zeros((self.n_blocks, m))
        self.s12 = np.zeros(shape12)
        self.counts = np.zeros(self.n_blocks, dtype=np.int64)
        self._next = 0

    @property
    def count(self) -> int:
        return int(self.counts.sum())

    def _empty_like(self) -> "CorrelationAccumulator":
        return CorrelationAccumulator(self.grid, self.mode, self.n_blocks, self.decimation,
                                      self._backend.name)

    def add(self, frame1: IntensityFrame, frame2: IntensityFrame | None = None,
            frame_index: int | None = None) -> "CorrelationAccumulator":
        if not frame1.grid.same_as(self.grid):
            raise ValidationError("arm-1 frame grid does not match the accumulator")
        if self.mode.two_arm:
            if frame2 is None:
                raise ValidationError(f"{self.mode.value} needs an arm-2 frame")
            if not frame2.grid.same_as(self.grid):
                raise ValidationError("arm-2 frame grid does not match the accumulator")
            arm2 = frame2.intensity[None, :]
        else:
            if frame2 is not None:
                raise ValidationError("hbt_symmetric takes a single arm-1 frame")
            arm2 = None
        index = self._next if frame_index is None else int(frame_index)
        return self.add_block(frame1.intensity[None, :], arm2, index)

    def add_block(self, arm1: np.ndarray, arm2: np.ndarray | None, first_frame: int) -> "CorrelationAccumulator":
        """Add consecutive frames ``first_frame, first_frame+1, ...`` given as rows."""
        arm1 = np.ascontiguousarray(arm1, dtype=np.float64)
        if self.mode is PairingMode.HBT:
            arm2 = arm1
        elif arm2 is None:
            raise ValidationError(f"{self.mode.value} needs arm-2 rows")
        arm2 = np.ascontiguousarray(arm2, dtype=np.float64)
        if arm1.shape != arm2.shape or arm1.ndim != 2 or arm1.shape[1] != self.grid.n:
            raise ValidationError("frame rows do not match the accumulator grid")
        if self.mode is PairingMode.FULL:
            blocks = (first_frame + np.arange(arm1.shape[0])) % self.n_blocks
            a = arm1[:, self.cols]
            c = arm2[:, self.cols]
            for b in np.unique(blocks):
                rows = blocks == b
                self.counts[b] += int(rows.sum())
                self.s1[b] += a[rows].sum(axis=0)
                self.s2[b] += c[rows].sum(axis=0)
                self.s12[b] += a[rows].T @ c[rows]
        else:
            self._backend.accumulate_pairs(arm1, arm2, self.cols1, self.cols2, int(first_frame),
                                           self.s1, self.s2, self.s12, self.counts)
        self._next = max(self._next, first_frame + arm1.shape[0])
        return self

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if (other.mode is not self.mode or not other.grid.same_as(self.grid)
                or other.n_blocks != self.n_blocks or other.decimation != self.decimation):
            raise ValidationError("cannot merge accumulators with different layouts")
        out = self._empty_like()
        for name in ("s1", "s2", "s12", "counts"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        out._next = max(self._next, other._next)
        return out

    __add__ = merge

    def totals(self, drop_block: int | None = None):
        keep = [b for b in range(self.n_blocks) if b != drop_block]
        n = int(self.counts[keep].sum())
        s1, s2, s12 = (np.zeros_like(a[0]) for a in (self.s1, self.s2, self.s12))
        for b in keep:
            s1 += self.s1[b]
            s2 += self.s2[b]
            s12 += self.s12[b]
        return n, s1, s2, s12


def accumulate(acc: CorrelationAccumulator, frame1: IntensityFrame,
               frame2: IntensityFrame | None = None) -> CorrelationAccumulator:
    return acc.add(frame1, frame2)


def _delta(n, s1, s2, s12):
    m1 = s1 / n
    m2 = s2 / n
    if s12.ndim == 2 and m1.ndim == 1:
        return s12 / n - np.outer(m1, m2), m1, m2
    return s12 / n - m1 * m2, m1, m2


def _g2(delta, m1, m2):
    denom = np.outer(m1, m2) if delta.ndim == 2 else m1 * m2
    return np.divide(delta, denom, out=np.zeros_like(delta), where=denom > 0)


@dataclass
class CorrelationProfile:
    coordinate: np.ndarray
    delta_I: np.ndarray
    mode: PairingMode
    count: int
    g2_minus_1: np.ndarray
    noise_floor: float
    std_error: np.ndarray | None = None
    mean1: np.ndarray | None = None
    mean2: np.ndarray | None = None


def finalize(acc: CorrelationAccumulator) -> CorrelationProfile:
    n, s1, s2, s12 = acc.totals()
    if n < 2:
        raise ValidationError(f"need at least 2 frames to finalize, have {n}")
    delta, m1, m2 = _delta(n, s1, s2, s12)
    g2 = _g2(delta, m1, m2)
    stderr = None
    floor = 3.0 * np.sqrt(3.0 / n)
    if acc.mode is not PairingMode.FULL and _jackknife_ready(acc):
        stderr = estimate_statistical_error(acc)
        g2_err = jackknife(acc, lambda d, a, b: _g2(d, a, b))[1]
        lit = (m1 * m2) > 0  # bins that receive light
        if np.any(lit):
            floor = 3.0 * float(np.median(g2_err[lit]))
    return CorrelationProfile(acc.coordinate.copy(), delta, acc.mode, n, g2, floor, stderr, m1, m2)


def _jackknife_ready(acc) -> bool:
    return acc.count >= 10 and int(np.count_nonzero(acc.counts)) >= 2


def jackknife(acc: CorrelationAccumulator,
              statistic: Callable | None = None):
    """Delete-one-block jackknife.

    ``statistic(delta_I, mean1, mean2)`` maps a profile to any array or
    scalar (default: ``delta_I``). Returns ``(full_estimate, std_error,
    replicates)``.
    """
    if acc.count < 10:
        raise ValidationError(f"need at least 10 frames for an error estimate, have {acc.count}")
    used = [b for b in range(acc.n_blocks) if acc.counts[b] > 0]
    if len(used) < 2:
        raise ValidationError("need frames in at least two blocks for a jackknife")
    if statistic is None:
        statistic = lambda d, a, b: d  # noqa: E731
    full = np.asarray(statistic(*_delta(*acc.totals())))
    reps = np.array([statistic(*_delta(*acc.totals(drop_block=b))) for b in used])
    g = len(used)
    mean = reps.mean(axis=0)
    dev = reps - mean
    if np.iscomplexobj(dev):
        var = (g - 1) / g * np.sum(np.abs(dev) ** 2, axis=0)
    else:
        var = (g - 1) / g * np.sum(dev**2, axis=0)
    return full, np.sqrt(var), reps


def estimate_statistical_error(acc: CorrelationAccumulator) -> np.ndarray:
    """Per-bin standard error of delta_I."""
    return jackknife(acc)[1]
