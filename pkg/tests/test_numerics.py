import numpy as np
import pytest

from conslab.errors import InvalidInputError, NumericalFailureError
from conslab.numerics import (gaussian_matrix, make_rng, power_iteration,
                              sym_eig)


def test_make_rng_deterministic():
    a = make_rng(7).standard_normal(16)
    b = make_rng(7).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_make_rng_streams_differ():
    a = make_rng(7, 0).standard_normal(16)
    b = make_rng(7, 1).standard_normal(16)
    assert np.max(np.abs(a - b)) > 1e-3


def test_sym_eig_matches_numpy(rng):
    m = rng.standard_normal((12, 12))
    a = m + m.T
    dec = sym_eig(a)
    ref = np.sort(np.linalg.eigvalsh(a))[::-1]
    np.testing.assert_allclose(dec.eigenvalues, ref, atol=1e-10)
    # descending order and A v = lambda v for every column
    assert np.all(np.diff(dec.eigenvalues) <= 1e-12)
    for k in range(12):
        v = dec.eigenvectors[:, k]
        np.testing.assert_allclose(a @ v, dec.eigenvalues[k] * v, atol=1e-8)


def test_sym_eig_rejects_bad_input(rng):
    with pytest.raises(InvalidInputError):
        sym_eig(rng.standard_normal((3, 4)))
    asym = rng.standard_normal((5, 5))
    asym[0, 1] += 1.0
    with pytest.raises(InvalidInputError):
        sym_eig(asym)


def test_power_iteration_matches_dense(rng):
    m = rng.standard_normal((30, 10))
    a = m.T @ m          # PSD with a generic spectrum
    lam = power_iteration(lambda v: a @ v, 10, tol=1e-10, rng=rng)
    assert abs(lam - np.linalg.eigvalsh(a)[-1]) < 1e-6 * abs(lam)


def test_power_iteration_zero_operator(rng):
    assert power_iteration(lambda v: np.zeros_like(v), 5, rng=rng) == 0.0


def test_power_iteration_cap_carries_estimate(rng):
    a = np.diag([1.0, 0.999999])   # tiny gap forces slow convergence
    with pytest.raises(NumericalFailureError) as exc:
        power_iteration(lambda v: a @ v, 2, tol=1e-14, max_iter=3, rng=rng)
    assert 0.9 < exc.value.estimate <= 1.0 + 1e-9


def test_gaussian_matrix_validation(rng):
    with pytest.raises(InvalidInputError):
        gaussian_matrix(rng, 3, 3, 0.0)
    m = gaussian_matrix(make_rng(0), 2000, 10, 0.5)
    assert abs(m.std() - 0.5) < 0.02
