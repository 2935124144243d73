import numpy as np
import pytest

from ghostdiff import analysis

X = np.linspace(-1e-3, 1e-3, 8001)


def test_fit_and_rmse_are_scale_free():
    model = np.exp(-X**2 / (1e-4) ** 2)
    assert analysis.fit_scale(7.0 * model, model) == pytest.approx(7.0)
    assert analysis.normalized_rmse(7.0 * model, model) == pytest.approx(0.0, abs=1e-15)
    noisy = 3 * model + 0.03 * np.cos(X * 1e5)
    assert 0 < analysis.normalized_rmse(noisy, model) < 0.01


def test_lobe_centroid_is_scale_covariant():
    y = np.sinc(X / 1e-4) ** 2 * np.cos(np.pi * X / 2e-4) ** 2
    a = analysis.lobe_centroid(X, y, 2.5e-4)
    b = analysis.lobe_centroid(2 * X, y, 5e-4)
    assert b.position == pytest.approx(2 * a.position, rel=1e-12)


def test_principal_spacing_of_cosine_fringes():
    period = 1.2e-4
    y = np.sin(np.pi * X / period) ** 2  # maxima at +-period/2
    spacing, lobes = analysis.principal_spacing(X, y, period)
    assert spacing == pytest.approx(period, rel=1e-3)
    assert lobes[0].position == pytest.approx(-period / 2, rel=1e-3)


def test_scale_fit_recovers_compression():
    ref = np.sinc(X / 2e-4) ** 2
    y = 5 * np.sinc(X / 1e-4) ** 2
    mask = np.abs(X) < 4e-4
    assert analysis.scale_fit(X, y, X, ref, mask) == pytest.approx(0.5, abs=1e-4)


def test_fringe_coefficients():
    f = 1 / 1.33e-4
    mask = np.abs(X) <= 3 * 1.33e-4
    r = 0.2 * np.cos(2 * np.pi * f * X)
    c = analysis.fringe_coefficients(X, r, [f, 2 * f], mask)
    width = np.count_nonzero(mask) * (X[1] - X[0])
    assert abs(c[0]) == pytest.approx(0.1 * width, rel=0.01)
    assert abs(c[1]) < 0.01 * abs(c[0])


def test_correlation_and_peak_rmse():
    a = np.sinc(X / 1e-4) ** 2
    assert analysis.correlation(a, 3 * a + 1) == pytest.approx(1.0)
    assert analysis.rmse_of_peak(a, 2 * a) == pytest.approx(0.0, abs=1e-15)
