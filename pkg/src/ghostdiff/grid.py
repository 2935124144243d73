"""Sampling grids and the field/intensity containers built on them."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SampleGrid:
    """Uniform centered 1D axis, ``x[i] = (i - n/2) * dx``.

    The center sample ``i = n/2`` sits exactly at the origin, so the mirror
    of sample ``i`` is ``n - i`` (sample 0 has no partner on the grid).
    """

    n: int
    dx: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValidationError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValidationError(f"grid size must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.dx) or self.dx <= 0:
            raise ValidationError(f"grid spacing must be positive, got {self.dx}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dx", float(self.dx))

    @cached_property
    def x(self) -> np.ndarray:
        x = (np.arange(self.n) - self.n // 2) * self.dx
        x.flags.writeable = False
        return x

    @property
    def center(self) -> int:
        return self.n // 2

    @property
    def extent(self) -> float:
        """Physical width ``n * dx`` of the window."""
        return self.n * self.dx

    @cached_property
    def mirror_index(self) -> np.ndarray:
        """Index of ``-x[i]`` for every ``i`` (index 0 maps to itself)."""
        idx = (self.n - np.arange(self.n)) % self.n
        idx.flags.writeable = False
        return idx

    def same_as(self, other: "SampleGrid") -> bool:
        return self.n == other.n and self.dx == other.dx


def make_grid(n: int, dx: float) -> SampleGrid:
    return SampleGrid(n, dx)


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: SampleGrid
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=np.complex128)
        if amp.shape != (self.grid.n,):
            raise ValidationError(
                f"field has shape {amp.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(amp)):
            raise ValidationError("field contains NaN or Inf")
        object.__setattr__(self, "amplitude", _frozen(amp))

    def norm2(self) -> float:
        """Squared 2-norm weighted by the sample spacing."""
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.dx)


@dataclass(frozen=True, eq=False)
class IntensityFrame:
    grid: SampleGrid
    intensity: np.ndarray

    def __post_init__(self):
        inten = np.asarray(self.intensity, dtype=np.float64)
        if inten.shape != (self.grid.n,):
            raise ValidationError(
                f"frame has shape {inten.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(inten)):
            raise ValidationError("intensity contains NaN or Inf")
        if np.any(inten < 0):
            raise ValidationError("intensity must be nonnegative")
        object.__setattr__(self, "intensity", _frozen(inten))


def intensity_of(field: ComplexField) -> IntensityFrame:
    amp = field.amplitude
    return IntensityFrame(field.grid, amp.real**2 + amp.imag**2)
