import numpy as np
import pytest

from ghostdiff import kernels


def test_default_backend_is_compiled_when_built():
    assert kernels.BACKEND in kernels.available_backends()
    if "cython" in kernels.available_backends():
        assert kernels.BACKEND == "cython"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_fresnel_direct_matches_matrix(backend):
    rng = np.random.default_rng(0)
    u = rng.normal(size=40) + 1j * rng.normal(size=40)
    xs = np.linspace(-5e-5, 5e-5, 40)
    xo = np.linspace(-3e-5, 4e-5, 23)
    lam, z = 0.532e-6, 0.01
    for sign in (-1, 1):
        expect = np.exp(sign * 1j * np.pi * (xo[:, None] - xs[None, :]) ** 2 / (lam * z)) @ u
        got = kernels.get_backend(backend).fresnel_direct(u, xs, xo, lam, z, sign)
        np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-12 * np.abs(expect).max())


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_accumulate_pairs_block_assignment(backend):
    arm = np.arange(12, dtype=float).reshape(3, 4) + 1
    cols = np.array([0, 3], dtype=np.int64)
    s1, s2, s12 = np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))
    counts = np.zeros(2, dtype=np.int64)
    kernels.get_backend(backend).accumulate_pairs(arm, arm, cols, cols, 1, s1, s2, s12, counts)
    # frames 1, 2, 3 -> blocks 1, 0, 1
    np.testing.assert_array_equal(counts, [1, 2])
    np.testing.assert_array_equal(s1[0], arm[1, cols])
    np.testing.assert_array_equal(s1[1], arm[0, cols] + arm[2, cols])
    np.testing.assert_array_equal(s12[1], arm[0, cols] ** 2 + arm[2, cols] ** 2)
