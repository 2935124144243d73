"""Independent references for the Monte-Carlo estimators.

Two routes, neither of which touches the FFT propagator:

* closed-form Fourier transforms of piecewise-constant transmittances,
  evaluated on the symmetric-slice frequency mapping ``nu = 2x / (lambda d2)``;
* direct O(n^2) quadrature of the Gaussian-moment expression
  ``|sum_x I(x) h1*(x, x1) h2(x, x2)|^2`` with both impulse responses built
  by explicit summation of the Fresnel kernel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalGuardError, ValidationError
from .grid import ComplexField, SampleGrid
from .optics import (PRINTED_SIGN, ArmGeometry, ObjectSpec, check_sampling,
                     kernel_prefactor, transmittance)
from .source import SourceSpec, envelope_intensity

FORMULAS = ("ghost_phase_grating", "hbt_aperture", "fraunhofer_custom", "closed_form")
QUADRATURE_MAX_N = 256


@dataclass
class AnalyticCurve:
    coordinate: np.ndarray
    values: np.ndarray
    formula: str
    peak: float = 1.0  # unnormalized maximum, kept for diagnostics


def _axis(axis) -> np.ndarray:
    if isinstance(axis, SampleGrid):
        return np.asarray(axis.x)
    return np.asarray(axis, dtype=float)


def fourier_pieces(pieces, nu: np.ndarray) -> np.ndarray:
    """``T(nu) = integral t(x) exp(-2 pi i nu x) dx`` for ``(lo, hi, t)`` intervals."""
    nu = np.asarray(nu, dtype=float)
    out = np.zeros(nu.shape, dtype=np.complex128)
    for lo, hi, t in pieces:
        w = hi - lo
        c = 0.5 * (lo + hi)
        out += t * w * np.sinc(nu * w) * np.exp(-2j * np.pi * nu * c)
    return out


def fourier_sampled(t: ComplexField, nu: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Dense Riemann-sum transform of a sampled transmittance."""
    nu = np.asarray(nu, dtype=float)
    x = t.grid.x
    keep = np.nonzero(t.amplitude)[0]
    out = np.empty(nu.size, dtype=np.complex128)
    for s in range(0, nu.size, chunk):
        ph = np.exp(-2j * np.pi * np.outer(nu.ravel()[s:s + chunk], x[keep]))
        out[s:s + chunk] = ph @ t.amplitude[keep] * t.grid.dx
    return out.reshape(nu.shape)


def _transform(obj, wavelength, nu, squared_modulus=False):
    if isinstance(obj, ObjectSpec):
        pieces = obj.pieces_at(wavelength)
        if squared_modulus:
            pieces = [(lo, hi, abs(t) ** 2) for lo, hi, t in pieces]
        return fourier_pieces(pieces, nu)
    if isinstance(obj, ComplexField):
        if squared_modulus:
            obj = ComplexField(obj.grid, np.abs(obj.amplitude) ** 2)
        return fourier_sampled(obj, nu)
    raise ValidationError(f"cannot transform object of type {type(obj).__name__}")


def _normalized(x, power, formula):
    peak = float(power.max())
    values = power / peak if peak > 0 else power
    return AnalyticCurve(x, values, formula, peak)


def slice_frequency(x, geom: ArmGeometry) -> np.ndarray:
    """Spatial frequency probed at symmetric-slice coordinate ``x``."""
    return 2.0 * np.asarray(x) / (geom.wavelength * geom.d2)


def analytic_ghost_profile(obj, geom: ArmGeometry, axis) -> AnalyticCurve:
    """``|T(2 x / (lambda d2))|^2`` normalized to unit peak on ``axis``.

    Equivalently the Fraunhofer pattern of ``t`` at half the wavelength.
    ``obj`` may be an :class:`ObjectSpec` (exact piecewise integral) or a
    sampled :class:`ComplexField` (dense transform).
    """
    x = _axis(axis)
    power = np.abs(_transform(obj, geom.wavelength, slice_frequency(x, geom))) ** 2
    return _normalized(x, power, "ghost_phase_grating")


def analytic_hbt_profile(obj, geom: ArmGeometry, axis) -> AnalyticCurve:
    """``|F{|t|^2}|^2`` on the same mapping; blind to the phase of ``t``."""
    x = _axis(axis)
    power = np.abs(_transform(obj, geom.wavelength, slice_frequency(x, geom), True)) ** 2
    return _normalized(x, power, "hbt_aperture")


def analytic_fraunhofer_profile(obj, focal_length: float, wavelength: float, axis) -> AnalyticCurve:
    """Coherent 2f pattern ``|T(x / (lambda f))|^2``."""
    x = _axis(axis)
    power = np.abs(_transform(obj, wavelength, x / (wavelength * focal_length))) ** 2
    return _normalized(x, power, "fraunhofer_custom")


def five_zone_closed_form(x, zone_width: float, d2: float, wavelength: float,
                          outer_coefficient: float = 2.0) -> AnalyticCurve:
    """Closed form for five alternating zones with a pi step.

    ``sinc^2(u) [1 - 2 cos(2 pi u) + c cos(4 pi u)]^2`` with
    ``u = zone_width * x / ((wavelength/2) d2)``. ``c = 2`` is the exact
    transform of ``[+1, -1, +1, -1, +1]``; pass ``c = 4`` to reproduce the
    variant with the larger outer coefficient for comparison.
    """
    x = np.asarray(x, dtype=float)
    u = zone_width * x / (0.5 * wavelength * d2)
    bracket = 1 - 2 * np.cos(2 * np.pi * u) + outer_coefficient * np.cos(4 * np.pi * u)
    return _normalized(x, np.sinc(u) ** 2 * bracket**2, "closed_form")


def _check_quadrature(grid: SampleGrid, geom: ArmGeometry, aperture: float, reach: float):
    """Refuse sums whose kernel chirp aliases.

    A Riemann sum of exp(i pi s**2 / (lambda z)) needs ``|s| dx <= lambda z / 2``
    over every separation ``s`` it touches. ``aperture`` is the lit object
    width and ``reach`` the largest detector coordinate evaluated.
    """
    if grid.n > QUADRATURE_MAX_N:
        raise ValidationError(f"quadrature grid has {grid.n} samples; limit is {QUADRATURE_MAX_N}")
    half_window = grid.extent / 2
    spans = {
        "d1": half_window + aperture / 2,   # source -> lit object
        "d2": reach + aperture / 2,         # lit object -> arm-1 detector
        "d": half_window + reach,           # source -> arm-2 detector
    }
    for name, span in spans.items():
        z = getattr(geom, name)
        check_sampling(grid, z, geom.wavelength, name)
        if span * grid.dx > geom.wavelength * z / 2 * (1 + 1e-12):
            raise NumericalGuardError(
                f"direct quadrature aliases the kernel chirp for {name} = {z:g} m "
                f"(separation {span:g} m, dx {grid.dx:g} m)", parameter=name)


class _Quadrature:
    """Precomputed pieces shared by every evaluation point."""

    def __init__(self, obj, geom, source, grid, sign, backend, reach):
        t = obj if isinstance(obj, ComplexField) else transmittance(obj, grid, geom.wavelength)
        self.t = np.ascontiguousarray(t.amplitude)
        lit = np.flatnonzero(self.t)
        aperture = (np.ptp(grid.x[lit]) + grid.dx) if lit.size else 0.0
        _check_quadrature(grid, geom, aperture, reach)
        self.grid, self.geom, self.sign = grid, geom, sign
        self.x = np.ascontiguousarray(grid.x, dtype=float)
        self.fresnel = kernels.get_backend(backend).fresnel_direct
        self.weight = envelope_intensity(grid, source)

    def _chirp(self, x_obs, z):
        x_obs = np.atleast_1d(np.asarray(x_obs, dtype=float))
        sep = x_obs[:, None] - self.x[None, :]
        lam = self.geom.wavelength
        return kernel_prefactor(z, lam, self.sign) * np.exp(self.sign * 1j * np.pi * sep**2 / (lam * z))

    def h1(self, x1: float) -> np.ndarray:
        """Arm-1 response at detector point ``x1`` for every source sample."""
        g = self._chirp(x1, self.geom.d2)[0] * self.t * self.grid.dx
        lam, d1 = self.geom.wavelength, self.geom.d1
        direct = self.fresnel(np.ascontiguousarray(g), self.x, self.x, lam, d1, self.sign)
        return kernel_prefactor(d1, lam, self.sign) * direct * self.grid.dx

    def h2(self, x2: float) -> np.ndarray:
        return self._chirp(x2, self.geom.d)[0] * self.grid.dx

    def delta(self, left: np.ndarray, right: np.ndarray) -> float:
        return float(np.abs(np.sum(self.weight * np.conj(left) * right)) ** 2)


def quadrature_delta_I(obj, geom: ArmGeometry, source: SourceSpec, small_grid: SampleGrid,
                       x1: float, x2: float, sign: int = PRINTED_SIGN, backend=None) -> float:
    """Gaussian-moment prediction of delta_I at one point pair ``(x1, x2)``.

    Uses the same discretization as the Monte-Carlo path (per-sample source
    variance, ``dx``-weighted sums), so the value is directly comparable to
    an unnormalized ensemble estimate on ``small_grid``.
    """
    q = _Quadrature(obj, geom, source, small_grid, sign, backend, max(abs(x1), abs(x2)))
    return q.delta(q.h1(x1), q.h2(x2))


def quadrature_ghost_slice(obj, geom, source, small_grid, x2_values, sign=PRINTED_SIGN, backend=None):
    """``delta_I(-x2, x2)`` for each ``x2``."""
    x2_values = np.atleast_1d(np.asarray(x2_values, dtype=float))
    q = _Quadrature(obj, geom, source, small_grid, sign, backend, float(np.max(np.abs(x2_values), initial=0)))
    return np.array([q.delta(q.h1(-x2), q.h2(x2)) for x2 in x2_values])


def quadrature_hbt_slice(obj, geom, source, small_grid, x1_values, sign=PRINTED_SIGN, backend=None):
    """``delta_I(x1, -x1)`` with both points in the object arm."""
    x1_values = np.atleast_1d(np.asarray(x1_values, dtype=float))
    q = _Quadrature(obj, geom, source, small_grid, sign, backend, float(np.max(np.abs(x1_values), initial=0)))
    return np.array([q.delta(q.h1(x1), q.h1(-x1)) for x1 in x1_values])
