"""Comparisons between measured profiles and reference curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optics import ArmGeometry, ObjectSpec


def ghost_fringe_period(obj: ObjectSpec, geom: ArmGeometry) -> float:
    """Principal fringe period of the symmetric-slice profiles (half-wavelength scale)."""
    return 0.5 * geom.wavelength * geom.d2 / obj.feature_length


def fraunhofer_fringe_period(obj: ObjectSpec, focal_length: float, wavelength: float) -> float:
    return wavelength * focal_length / obj.feature_length


def central_mask(x: np.ndarray, period: float, fringes: float = 3.0) -> np.ndarray:
    return np.abs(x) <= fringes * period * (1 + 1e-12)


def fit_scale(profile, model, mask=None) -> float:
    """Least-squares amplitude ``s`` minimizing ``|profile - s * model|``."""
    p, m = np.asarray(profile), np.asarray(model)
    if mask is not None:
        p, m = p[mask], m[mask]
    return float(p @ m / (m @ m))


def normalized_rmse(profile, model, mask=None) -> float:
    """RMSE of ``profile / s - model`` with ``s`` the least-squares amplitude.

    ``model`` is expected at unit peak, so the result is a fraction of peak.
    """
    p, m = np.asarray(profile), np.asarray(model)
    if mask is not None:
        p, m = p[mask], m[mask]
    s = fit_scale(p, m)
    return float(np.sqrt(np.mean((p / s - m) ** 2)))


def rmse_of_peak(a, b, mask=None) -> float:
    """RMSE between two curves after each is divided by its own maximum."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if mask is not None:
        a, b = a[mask], b[mask]
    return float(np.sqrt(np.mean((a / a.max() - b / b.max()) ** 2)))


def correlation(a, b, mask=None) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if mask is not None:
        a, b = a[mask], b[mask]
    return float(np.corrcoef(a, b)[0, 1])


@dataclass
class Lobe:
    position: float
    height: float
    lo: float
    hi: float


def lobe_centroid(x, y, guess: float, level: float = 0.5) -> Lobe:
    """Centroid of the lobe containing the largest sample near ``guess``.

    The lobe is the contiguous run of samples above ``level`` times its
    peak; the centroid is taken over ``y - level * peak`` on that run, so it
    moves rigidly with any rescaling of the coordinate axis.
    """
    x, y = np.asarray(x), np.asarray(y)
    k = int(np.argmin(np.abs(x - guess)))
    # climb to the local maximum
    while 0 < k < len(y) - 1 and max(y[k - 1], y[k + 1]) > y[k]:
        k = k - 1 if y[k - 1] > y[k + 1] else k + 1
    peak = y[k]
    cut = level * peak
    lo = k
    while lo > 0 and y[lo - 1] > cut:
        lo -= 1
    hi = k
    while hi < len(y) - 1 and y[hi + 1] > cut:
        hi += 1
    w = y[lo:hi + 1] - cut
    return Lobe(float(np.sum(w * x[lo:hi + 1]) / np.sum(w)), float(peak), float(x[lo]), float(x[hi]))


def principal_spacing(x, y, period: float) -> tuple[float, list[Lobe]]:
    """Distance between the two first-order principal maxima at about ``+-period/2``."""
    left = lobe_centroid(x, y, -0.5 * period)
    right = lobe_centroid(x, y, 0.5 * period)
    return right.position - left.position, [left, right]


def peak_table(x, y, period: float, orders=(-2, -1, 1, 2)) -> list[dict]:
    """Lobe centroids near the principal maxima ``(m - sign(m)/2) * period``."""
    rows = []
    for m in orders:
        guess = (m - np.sign(m) * 0.5) * period
        lobe = lobe_centroid(x, y, guess)
        rows.append({"order": int(m), "expected_m": float(guess), "position_m": lobe.position,
                     "height": lobe.height})
    return rows


def scale_fit(x, y, ref_x, ref_y, mask, lo=0.25, hi=1.0, steps=3001) -> float:
    """Factor ``r`` that best maps ``y(x) ~ A * ref_y(x / r)`` on ``mask``."""
    xs, ys = np.asarray(x)[mask], np.asarray(y)[mask]
    grid = np.linspace(lo, hi, steps)

    def resid(r):
        m = np.interp(xs / r, ref_x, ref_y)
        a = (ys @ m) / (m @ m)
        return float(np.sum((ys - a * m) ** 2))

    vals = np.array([resid(r) for r in grid])
    i = int(np.argmin(vals))
    best_r = grid[i]
    if 0 < i < steps - 1:
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom > 0:
            best_r += 0.5 * (y0 - y2) / denom * (grid[1] - grid[0])
    return float(best_r)


def fringe_coefficients(x, residual, freqs, mask=None) -> np.ndarray:
    """Complex Fourier coefficients ``sum r(x) exp(-2 pi i f x) dx`` at ``freqs``."""
    x, r = np.asarray(x), np.asarray(residual)
    if mask is not None:
        x, r = x[mask], r[mask]
    dx = x[1] - x[0]
    return np.array([np.sum(r * np.exp(-2j * np.pi * f * x)) * dx for f in np.atleast_1d(freqs)])
