import numpy as np
import pytest
from hypothesis import given, strategies as st

from mesocorr.errors import DomainError, ValidationError
from mesocorr.gptree import (
    ROOT, bd_covariance, build_tree, interleaved_levels, is_psd, min_covariance_matrix,
    partial_sum_covariance, partial_sum_vector, sample_bd_process, sample_dtilde,
    sample_tree_gaussian, sample_tree_gaussian_complex, strange_correlation, theorem_cov_matrix,
)
from mesocorr.rng import RngStream
from mesocorr.stats import estimate_covariance


def naive_father(c):
    """O(l^2) scan of the ancestor definition: j is an ancestor of i iff c_j = min c[j..i];
    the father is the ancestor with the largest level below c_i."""
    c = list(c)
    out = []
    for i in range(len(c)):
        best = ROOT
        for j in range(len(c)):
            if j == i:
                continue
            lo, hi = min(i, j), max(i, j)
            if c[j] == min(c[lo:hi + 1]) and c[j] < c[i]:
                if best == ROOT or c[j] > c[best]:
                    best = j
        out.append(best)
    return out


distinct_levels = st.lists(st.floats(0.01, 10, allow_nan=False), min_size=1, max_size=40, unique=True)


def test_min_covariance_examples():
    assert np.array_equal(min_covariance_matrix([2, 1, 3]), [[2, 1, 1], [1, 1, 1], [1, 1, 3]])
    assert np.array_equal(min_covariance_matrix([5]), [[5]])
    with pytest.raises(DomainError):
        min_covariance_matrix([1, 0])


def test_theorem_cov_examples():
    assert np.array_equal(theorem_cov_matrix([0.5]), [[1, 0.5], [0.5, 1]])
    assert np.array_equal(theorem_cov_matrix([]), [[1]])
    assert theorem_cov_matrix([2, 0.3])[0, 2] == pytest.approx(0.3)
    assert theorem_cov_matrix([2, 3])[0, 1] == 1.0


def test_build_tree_examples():
    t = build_tree([2, 1, 3])
    assert list(t.father) == [1, ROOT, 1] and t.root == 1
    assert build_tree([1]).root == 0
    chain = build_tree([3, 2, 1])
    assert list(chain.father) == [1, 2, ROOT] and chain.root == 2
    with pytest.raises(ValidationError):
        build_tree([1, 2, 1])
    tie = build_tree([1, 2, 1], perturb_ties=True)
    assert len(set(tie.levels)) == 3


@given(distinct_levels)
def test_build_tree_matches_naive(c):
    t = build_tree(c)
    assert list(t.father) == naive_father(c)
    assert t.father[t.order[0]] == ROOT
    for i, f in enumerate(t.father):
        if f != ROOT:
            assert t.levels[f] < t.levels[i]


def test_build_tree_random_1000():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        ell = int(rng.integers(1, 16))
        c = rng.permutation(ell) + rng.uniform(0, 0.5, ell) + 0.1
        assert list(build_tree(c).father) == naive_father(c)


@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=64))
def test_min_matrix_psd(c):
    assert is_psd(min_covariance_matrix(c))


@given(st.lists(st.floats(0, 5), min_size=0, max_size=63))
def test_theorem_matrix_psd(g):
    assert is_psd(theorem_cov_matrix(g))


@given(st.lists(st.floats(1e-6, 5), min_size=0, max_size=63))
def test_theorem_matrix_is_restricted_min_matrix(g):
    m = theorem_cov_matrix(g)
    lev = interleaved_levels(g)
    sub = min_covariance_matrix(lev)[::2, ::2]
    assert np.allclose(sub, m)


def test_is_psd_rejects_indefinite():
    assert not is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert np.all(np.linalg.eigvalsh(min_covariance_matrix(np.random.default_rng(1).uniform(0.1, 2, 8))) > -1e-12)


def test_tree_sampler_covariance_213():
    t = build_tree([2, 1, 3])
    x = sample_tree_gaussian(t, RngStream(1), size=100000)
    est = estimate_covariance(x)
    assert abs(est.cov[0, 2] - 1.0) <= 4 * est.stderr[0, 2]
    assert sample_tree_gaussian(build_tree([1.5]), RngStream(2)).shape == (1,)


def test_tree_sampler_complex():
    t = build_tree([1.0, 0.4, 0.8])
    z = sample_tree_gaussian_complex(t, RngStream(3), size=50000)
    est = estimate_covariance(z)
    target = min_covariance_matrix(t.levels)
    assert np.all(np.abs(est.cov - target) <= 4 * est.stderr + 1e-12)
    assert abs(np.mean(z[:, 0] ** 2)) < 0.03  # circular: E Z^2 = 0


def test_partial_sums():
    n = 10
    cov = partial_sum_covariance(n, [0.5])
    phi = np.array([0.0, n ** -0.5])
    r = np.arange(1, n + 1)
    brute = np.sum(np.exp(1j * r * (phi[1] - phi[0])) / r) / np.log(n)
    assert cov[0, 1] == pytest.approx(brute)
    assert cov[0, 0] == pytest.approx(np.sum(1 / r) / np.log(n))
    big = partial_sum_covariance(10 ** 6, [0.5])
    assert abs(big[0, 1].real - 0.5) < 0.15
    draws = np.stack([partial_sum_vector(50, [0.5], RngStream(4, k)) for k in range(20000)])
    est = estimate_covariance(draws)
    exact = partial_sum_covariance(50, [0.5])
    assert np.all(np.abs(est.cov - exact) <= 4 * est.stderr + 1e-12)


def test_bd_process():
    assert bd_covariance([0.3, 0.7])[0, 1] == pytest.approx(0.3)
    assert bd_covariance([0.5, 0.5])[0, 1] == 0.5
    x = np.stack([sample_bd_process([0.0, 0.3, 0.7, 0.5, 0.5], RngStream(6, k)) for k in range(50000)])
    est = estimate_covariance(x)
    target = bd_covariance([0.0, 0.3, 0.7, 0.5, 0.5])
    assert np.all(np.abs(est.cov - target) <= 4 * est.stderr + 1e-12)
    with pytest.raises(DomainError):
        sample_bd_process([1.2], RngStream(0))


def test_dtilde_and_strange_correlation():
    pairs = [(0, 1), (0, 2), (1, 2), (2, 3), (0, 1), (4, 4)]
    pred = strange_correlation(pairs)
    assert pred[0, 1] == 0.5 and pred[0, 2] == -0.5 and pred[0, 3] == 0.0
    assert pred[0, 4] == 1.0 and pred[5, 5] == 0.0
    x = np.stack([sample_dtilde(pairs, RngStream(8, k)) for k in range(40000)])
    assert np.all(x[:, 5] == 0)
    est = estimate_covariance(x[:, :5])
    assert np.all(np.abs(est.cov - pred[:5, :5]) <= 4 * est.stderr + 1e-12)
