"""Pseudothermal source: delta-correlated circular-Gaussian speckle fields.

Every realization is a pure function of ``(seed, frame_index)``: the draws
come from a Philox counter-based generator keyed by both numbers, so any
worker can produce any frame without shared RNG state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .grid import ComplexField, SampleGrid

ENVELOPES = ("hard", "gaussian")
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SourceSpec:
    """Spot of diameter ``spot_diameter`` on the ground glass.

    ``hard`` is a top-hat of that diameter; ``gaussian`` uses it as the
    1/e^2 intensity diameter.
    """

    spot_diameter: float
    mean_intensity: float = 1.0
    envelope: str = "hard"

    def __post_init__(self):
        if not np.isfinite(self.spot_diameter) or self.spot_diameter <= 0:
            raise ValidationError(f"spot diameter must be positive, got {self.spot_diameter}")
        if not np.isfinite(self.mean_intensity) or self.mean_intensity <= 0:
            raise ValidationError(f"mean intensity must be positive, got {self.mean_intensity}")
        if self.envelope not in ENVELOPES:
            raise ValidationError(f"envelope must be one of {ENVELOPES}, got {self.envelope!r}")


@dataclass(frozen=True)
class RandomStream:
    seed: int
    frame_index: int

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _U64:
            raise ValidationError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")
        if int(self.frame_index) < 0:
            raise ValidationError(f"frame index must be nonnegative, got {self.frame_index}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[int(self.seed), int(self.frame_index)]))


@lru_cache(maxsize=32)
def _envelope(n: int, dx: float, spec: SourceSpec) -> np.ndarray:
    grid = SampleGrid(n, dx)
    if spec.spot_diameter < 2 * dx:
        raise ValidationError(
            f"spot diameter {spec.spot_diameter:g} m is below two samples ({2 * dx:g} m)"
        )
    x = grid.x
    if spec.envelope == "hard":
        # half-sample slack so a spot edge landing on a sample is kept on both sides
        profile = (np.abs(x) <= spec.spot_diameter / 2 + 1e-9 * dx).astype(float)
    else:
        w = spec.spot_diameter / 2
        profile = np.exp(-2.0 * x**2 / w**2)
    amp = np.sqrt(spec.mean_intensity * profile / 2.0)
    amp.flags.writeable = False
    return amp


def envelope_intensity(grid: SampleGrid, spec: SourceSpec) -> np.ndarray:
    """Expected ``|E|^2`` per sample."""
    return 2.0 * _envelope(grid.n, grid.dx, spec) ** 2


def realization_array(grid: SampleGrid, spec: SourceSpec, seed: int, frame_index: int) -> np.ndarray:
    """Raw complex samples of one realization (no container overhead)."""
    amp = _envelope(grid.n, grid.dx, spec)
    draws = RandomStream(seed, frame_index).generator().standard_normal((grid.n, 2))
    return amp * (draws[:, 0] + 1j * draws[:, 1])


def generate_realization(grid: SampleGrid, spec: SourceSpec, stream: RandomStream) -> ComplexField:
    return ComplexField(grid, realization_array(grid, spec, stream.seed, stream.frame_index))


def realization_block(grid: SampleGrid, spec: SourceSpec, seed: int, frames: Sequence[int]) -> np.ndarray:
    out = np.empty((len(frames), grid.n), dtype=np.complex128)
    for row, k in enumerate(frames):
        out[row] = realization_array(grid, spec, seed, k)
    return out


@dataclass
class MomentReport:
    count: int
    mean: np.ndarray
    mean_intensity: np.ndarray
    pairs: list = field(default_factory=list)
    pair_correlation: np.ndarray = None
    pair_stderr: np.ndarray = None


def _as_rows(fields) -> np.ndarray:
    rows = [f.amplitude if isinstance(f, ComplexField) else np.asarray(f) for f in fields]
    return np.asarray(rows, dtype=np.complex128)


def ensemble_statistics(fields: Iterable, pairs: Sequence[tuple[int, int]] = ()) -> MomentReport:
    """First and second moments of an ensemble of fields.

    ``pair_correlation[p]`` estimates ``<E*(x_i) E(x_j)>`` for ``pairs[p] = (i, j)``
    and ``pair_stderr[p]`` is its standard error from the per-frame spread.
    """
    rows = _as_rows(fields)
    if rows.ndim != 2 or rows.shape[0] < 100:
        raise ValidationError("ensemble statistics need at least 100 realizations")
    count = rows.shape[0]
    mean = rows.mean(axis=0)
    mean_int = (rows.real**2 + rows.imag**2).mean(axis=0)
    pairs = [(int(i), int(j)) for i, j in pairs]
    corr = np.empty(len(pairs), dtype=np.complex128)
    err = np.empty(len(pairs))
    for p, (i, j) in enumerate(pairs):
        prod = np.conj(rows[:, i]) * rows[:, j]
        corr[p] = prod.mean()
        err[p] = np.sqrt(np.var(prod.real) + np.var(prod.imag)) / np.sqrt(count)
    return MomentReport(count, mean, mean_int, pairs, corr, err)


@dataclass
class CoherenceEstimate:
    """Transverse coherence of a field ensemble.

    ``equivalent_width`` is the integral of ``|mu(lag)|^2`` over lag, which
    for a uniform incoherent source of width D at distance z equals
    ``lambda * z / D``. ``efold_half_width`` is the lag where ``|mu|`` first
    drops below 1/e.
    """

    lags: np.ndarray
    mu_sq: np.ndarray
    equivalent_width: float
    efold_half_width: float


def _efold(lags, mag):
    below = np.nonzero(mag < np.exp(-1.0))[0]
    if below.size == 0:
        return float("nan")
    k = below[0]
    if k == 0:
        return 0.0
    y0, y1 = mag[k - 1], mag[k]
    frac = (y0 - np.exp(-1.0)) / (y0 - y1)
    return float(lags[k - 1] + frac * (lags[k] - lags[k - 1]))


def field_coherence(rows: np.ndarray, dx: float, region: slice, max_lag: int) -> CoherenceEstimate:
    """Degree of coherence from field samples, averaged over ``region``.

    ``|mu|^2`` is formed at each position before averaging: after free
    propagation ``mu`` carries a position-dependent quadratic phase that
    would cancel in a complex average. The ``1/frames`` bias of ``|mean|^2``
    is subtracted.
    """
    rows = np.asarray(rows)
    frames = rows.shape[0]
    idx = np.arange(rows.shape[1])[region]
    power = (rows.real**2 + rows.imag**2).mean(axis=0)
    lags = np.arange(max_lag + 1)
    mu_sq = np.empty(lags.size)
    for m in lags:
        j = idx + m
        keep = j < rows.shape[1]
        a, b = idx[keep], j[keep]
        prod = np.conj(rows[:, a]) * rows[:, b]
        c2 = np.abs(prod.mean(axis=0)) ** 2
        spread = (prod.real**2 + prod.imag**2).mean(axis=0) - c2
        mu_sq[m] = np.mean((c2 - spread / max(frames - 1, 1)) / (power[a] * power[b]))
    mu_sq[0] = 1.0
    width = dx * (mu_sq[0] + 2 * mu_sq[1:].sum())
    return CoherenceEstimate(lags * dx, mu_sq, float(width), _efold(lags * dx, np.sqrt(np.clip(mu_sq, 0, None))))


def intensity_coherence(rows: np.ndarray, dx: float, region: slice, max_lag: int) -> CoherenceEstimate:
    """Same measure from intensities only: normalized covariance equals ``|mu|^2``."""
    rows = np.asarray(rows, dtype=float)
    idx = np.arange(rows.shape[1])[region]
    mean = rows.mean(axis=0)
    lags = np.arange(max_lag + 1)
    cov = np.empty(lags.size)
    for m in lags:
        j = idx + m
        keep = j < rows.shape[1]
        a, b = idx[keep], j[keep]
        c = (rows[:, a] * rows[:, b]).mean(axis=0) - mean[a] * mean[b]
        cov[m] = np.mean(c / (mean[a] * mean[b]))
    mu_sq = cov / cov[0]
    width = dx * (mu_sq[0] + 2 * mu_sq[1:].sum())
    return CoherenceEstimate(lags * dx, mu_sq, float(width), _efold(lags * dx, np.sqrt(np.clip(mu_sq, 0, None))))
