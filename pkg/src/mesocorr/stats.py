"""Empirical mean / covariance of complex sample vectors with batch-means errors.

Covariances follow ``cov(Y, Y') = E(conj(Y) Y') - E(conj(Y)) E(Y')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mesocorr.errors import ValidationError

MAX_BATCHES = 32


def n_batches(replicas: int) -> int:
    """32 batches, or batches of two samples when fewer than 64 replicas."""
    return MAX_BATCHES if replicas >= 2 * MAX_BATCHES else max(2, replicas // 2)


def _batch_slices(n: int, b: int):
    edges = np.linspace(0, n, b + 1).round().astype(int)
    return [slice(edges[k], edges[k + 1]) for k in range(b)]


def _cov(y: np.ndarray, ddof: int = 1) -> np.ndarray:
    c = y - y.mean(axis=0)
    return (np.conj(c).T @ c) / (y.shape[0] - ddof)


def _corr(cov: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.real(np.diag(cov)))
    with np.errstate(invalid="ignore", divide="ignore"):
        return cov / np.outer(d, d)


def _complex_sd(values: np.ndarray, axis=0) -> np.ndarray:
    return np.sqrt(np.var(values.real, axis=axis, ddof=1) + np.var(values.imag, axis=axis, ddof=1))


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    dim: int
    mean: np.ndarray
    cov: np.ndarray
    stderr: np.ndarray
    replicas: int
    corr_stderr: np.ndarray | None = None
    mean_stderr: np.ndarray | None = None

    def correlation(self) -> np.ndarray:
        c = _corr(self.cov)
        return np.real(c) if np.allclose(np.imag(c), 0) else c

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.cov, np.conj(self.cov.T)))


def estimate_covariance(samples) -> CovarianceEstimate:
    """Unbiased mean and covariance of ``samples`` (replicas x dim).

    ``stderr[i, j]`` is the batch-means standard error of ``cov[i, j]``
    (products centred at the global mean, 32 contiguous batches);
    ``corr_stderr`` is the spread of per-batch correlation matrices.
    """
    try:
        y = np.asarray(samples)
    except ValueError as exc:
        raise ValidationError("sample vectors must share one dimension") from exc
    if y.dtype == object:
        raise ValidationError("sample vectors must share one dimension")
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise ValidationError("samples must be a 2-d array (replicas x dim)")
    n, dim = y.shape
    if n < 2:
        raise ValidationError("need at least two samples")
    y = y.astype(complex) if np.iscomplexobj(y) else y.astype(float)

    mean = y.mean(axis=0)
    cov = _cov(y)
    cov = 0.5 * (cov + np.conj(cov.T))  # exact Hermitian symmetry
    centred = y - mean
    prods = np.conj(centred)[:, :, None] * centred[:, None, :]
    b = n_batches(n)
    slices = _batch_slices(n, b)
    bmeans = np.stack([prods[s].mean(axis=0) for s in slices])
    if np.iscomplexobj(bmeans):
        stderr = _complex_sd(bmeans) / np.sqrt(b)
    else:
        stderr = np.std(bmeans, axis=0, ddof=1) / np.sqrt(b)
    corr_se = None
    if all((s.stop - s.start) >= 2 for s in slices):
        bc = np.stack([_corr(_cov(y[s])) for s in slices])
        corr_se = (_complex_sd(bc) if np.iscomplexobj(bc) else np.std(bc, axis=0, ddof=1)) / np.sqrt(b)
    bm = np.stack([y[s].mean(axis=0) for s in slices])
    mean_se = (_complex_sd(bm) if np.iscomplexobj(bm) else np.std(bm, axis=0, ddof=1)) / np.sqrt(b)
    return CovarianceEstimate(dim, mean, cov, np.asarray(stderr, dtype=float), n, corr_se, mean_se)


def mean_with_stderr(values) -> tuple:
    """Mean and batch-means standard error of a 1-d (possibly complex) series."""
    v = np.asarray(values)
    b = n_batches(v.size)
    bm = np.array([v[s].mean() for s in _batch_slices(v.size, b)])
    se = _complex_sd(bm) if np.iscomplexobj(bm) else np.std(bm, ddof=1)
    return v.mean(), float(se / np.sqrt(b))
