import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mesocorr.errors import ValidationError
from mesocorr.stats import estimate_covariance, mean_with_stderr, n_batches


def test_constant_samples_zero_covariance():
    est = estimate_covariance(np.ones((50, 3)) * (2 + 1j))
    assert np.all(est.cov == 0)


def test_two_point_hand_oracle():
    est = estimate_covariance(np.array([[1, 1j], [-1, -1j]]))
    # mean 0; unbiased cov[0,1] = (conj(1)*i + conj(-1)*(-i)) / (2 - 1) = 2i
    assert est.cov[0, 1] == pytest.approx(2j)
    assert est.cov[1, 0] == pytest.approx(-2j)
    assert est.cov[0, 0] == pytest.approx(2)


def test_standard_complex_normal_identity():
    rng = np.random.default_rng(3)
    z = (rng.standard_normal((100000, 3)) + 1j * rng.standard_normal((100000, 3))) / np.sqrt(2)
    est = estimate_covariance(z)
    assert np.all(np.abs(est.cov - np.eye(3)) <= 4 * est.stderr)
    assert est.replicas == 100000 and est.dim == 3


def test_errors():
    with pytest.raises(ValidationError):
        estimate_covariance(np.ones((1, 2)))
    with pytest.raises(ValidationError):
        estimate_covariance([[1, 2], [3]])


def test_batches():
    assert n_batches(10 ** 5) == 32
    assert n_batches(63) == 31
    assert n_batches(2) == 2


@given(arrays(np.complex128, st.tuples(st.integers(2, 80), st.integers(1, 5)),
              elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)))
def test_hermitian_nonnegative_diagonal(y):
    est = estimate_covariance(y)
    assert np.array_equal(est.cov, np.conj(est.cov.T))
    assert np.all(np.real(np.diag(est.cov)) >= -1e-9)
    assert np.all(np.imag(np.diag(est.cov)) == 0)
    assert np.all(est.stderr >= 0)


def test_stderr_positive_for_random_data():
    y = np.random.default_rng(0).standard_normal((10, 2))
    assert np.all(estimate_covariance(y).stderr > 0)


def test_mean_with_stderr():
    m, se = mean_with_stderr(np.arange(100.0))
    assert m == 49.5 and se > 0
