import numpy as np
import pytest
from scipy import stats

from ghostdiff.errors import ValidationError
from ghostdiff.grid import SampleGrid
from ghostdiff.source import (RandomStream, SourceSpec, ensemble_statistics, envelope_intensity, field_coherence,
                              generate_realization, realization_block)

GRID = SampleGrid(256, 1e-6)
SPEC = SourceSpec(100e-6, mean_intensity=2.0)


@pytest.fixture(scope="module")
def ensemble():
    return realization_block(GRID, SPEC, seed=7, frames=range(10_000))


def test_zero_mean_intensity_rejected():
    with pytest.raises(ValidationError):
        SourceSpec(1e-3, mean_intensity=0.0)
    with pytest.raises(ValidationError):
        SourceSpec(-1e-3)
    with pytest.raises(ValidationError):
        SourceSpec(1e-3, envelope="cosine")


def test_spot_below_two_samples_rejected():
    with pytest.raises(ValidationError):
        generate_realization(GRID, SourceSpec(1.5e-6), RandomStream(1, 0))


def test_bad_stream():
    with pytest.raises(ValidationError):
        RandomStream(-1, 0)
    with pytest.raises(ValidationError):
        RandomStream(1, -3)


def test_deterministic_and_order_free():
    a = generate_realization(GRID, SPEC, RandomStream(5, 17)).amplitude
    realization_block(GRID, SPEC, 5, [3, 99, 0])  # unrelated draws in between
    b = generate_realization(GRID, SPEC, RandomStream(5, 17)).amplitude
    np.testing.assert_array_equal(a, b)
    c = generate_realization(GRID, SPEC, RandomStream(5, 18)).amplitude
    assert not np.array_equal(a, c)


def test_hard_spot_is_exactly_zero_outside():
    f = generate_realization(GRID, SPEC, RandomStream(1, 0)).amplitude
    outside = np.abs(GRID.x) > SPEC.spot_diameter / 2
    assert np.all(f[outside] == 0)
    assert np.all(f[~outside] != 0)


def test_gaussian_envelope_profile():
    spec = SourceSpec(100e-6, envelope="gaussian")
    inten = envelope_intensity(GRID, spec)
    assert inten[GRID.center] == pytest.approx(1.0)
    k = GRID.center + 50  # x = w
    assert inten[k] == pytest.approx(np.exp(-2), rel=1e-12)


def test_real_part_variance(ensemble):
    inside = np.nonzero(np.abs(GRID.x) <= 50e-6)[0]
    var_re = ensemble[:, inside].real.var(axis=0)
    np.testing.assert_allclose(var_re, SPEC.mean_intensity / 2, rtol=0.05)


def test_moment_report(ensemble):
    inside = np.nonzero(np.abs(GRID.x) <= 50e-6)[0]
    pairs = [(inside[0], inside[1]), (inside[10], inside[40]), (GRID.center, GRID.center + 3)]
    rep = ensemble_statistics(ensemble, pairs)
    bound = 3 * np.sqrt(SPEC.mean_intensity / 2 / rep.count)
    ok = np.abs(rep.mean[inside].real) < bound
    assert ok.mean() >= 0.99
    np.testing.assert_allclose(rep.mean_intensity[inside], SPEC.mean_intensity, rtol=0.06)
    assert np.all(np.abs(rep.pair_correlation) < 5 * rep.pair_stderr)
    # pseudo-covariance E[E^2] also vanishes
    e2 = (ensemble[:, inside] ** 2).mean(axis=0)
    assert np.median(np.abs(e2)) < 3 * SPEC.mean_intensity / np.sqrt(rep.count)


def test_zero_fields_report_zero():
    rep = ensemble_statistics(np.zeros((100, 16), dtype=complex), [(1, 2)])
    assert np.all(rep.mean == 0) and np.all(rep.mean_intensity == 0)
    assert rep.pair_correlation[0] == 0


def test_too_few_realizations():
    with pytest.raises(ValidationError):
        ensemble_statistics(np.zeros((99, 16), dtype=complex))


def test_intensity_is_exponential(ensemble):
    inten = np.abs(ensemble[:, GRID.center]) ** 2
    p = stats.kstest(inten, "expon", args=(0, SPEC.mean_intensity)).pvalue
    assert p > 0.01


def test_frames_independent(ensemble):
    a, b = ensemble[:-1, GRID.center], ensemble[1:, GRID.center]
    c = np.mean(np.conj(a) * b)
    se = np.std(np.conj(a) * b) / np.sqrt(a.size)
    assert abs(c) < 4 * se


def test_field_coherence_of_white_noise_is_one_sample():
    rows = realization_block(GRID, SourceSpec(200e-6), 4, range(400))
    est = field_coherence(rows, GRID.dx, slice(40, 216), max_lag=10)
    assert est.equivalent_width == pytest.approx(GRID.dx, rel=0.05)


def test_field_coherence_ignores_position_dependent_phase():
    # fully coherent field with a quadratic phase: mu has unit modulus everywhere
    rng = np.random.default_rng(8)
    x = GRID.x
    rows = rng.normal(size=(200, 1)) * np.exp(1j * np.pi * x**2 / (1e-6 * 0.002))
    est = field_coherence(rows, GRID.dx, slice(64, 192), max_lag=8)
    np.testing.assert_allclose(est.mu_sq, 1.0, atol=0.02)
