"""Circular unitary ensemble: eigenangle sampling and power sums.

Two samplers share one contract (sorted eigenangles in ``[0, 2*pi)``):

``haar``
    Ginibre matrix -> QR -> column phase fix (Mezzadri's recipe) -> dense
    eigenvalues.  O(n^3), the reference path.
``cmv``
    Independent Verblunsky coefficients (Killip-Nenciu) assembled into the
    five-diagonal CMV matrix, then dense eigenvalues.  Same law as ``haar``.

The Verblunsky coefficients alone already determine the characteristic
polynomial through the Szego recursion; :func:`mesocorr.charpoly.log_z_verblunsky`
uses that to evaluate log Z in O(n) per point without any eigensolver, which is
what makes n in the thousands affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from mesocorr.errors import DomainError
from mesocorr.rng import RngStream

TWO_PI = 2.0 * np.pi

RngLike = Union[RngStream, np.random.Generator]


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def canonical_angles(angles) -> np.ndarray:
    """Reduce to ``[0, 2*pi)`` and sort along the last axis."""
    a = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    a = np.where(a >= TWO_PI, 0.0, a)
    return np.sort(a, axis=-1)


@dataclass(frozen=True, eq=False)
class EigenAngles:
    """Sorted eigenangles of one unitary matrix."""

    angles: np.ndarray

    def __post_init__(self):
        a = canonical_angles(self.angles)
        if a.ndim != 1 or a.size == 0:
            raise DomainError("EigenAngles needs a non-empty 1-d array")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def n(self) -> int:
        return int(self.angles.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, EigenAngles) and np.array_equal(self.angles, other.angles)

    def rotated(self, alpha: float) -> "EigenAngles":
        return EigenAngles(self.angles + alpha)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.angles)


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"matrix dimension must be a positive integer, got {n!r}")
    return int(n)


def ginibre(n: int, gen: np.random.Generator) -> np.ndarray:
    """n x n matrix of independent standard complex normals."""
    return (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(n: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed element of U(n)."""
    n = _check_n(n)
    return _phase_fixed_q(ginibre(n, _as_generator(rng)))


def _phase_fixed_q(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_verblunsky(n: int, rng: RngLike) -> np.ndarray:
    """Verblunsky coefficients alpha_0..alpha_{n-1} of a CUE matrix.

    alpha_k is rotation invariant with ``|alpha_k|^2 ~ Beta(1, n-k-1)`` for
    k < n-1, and alpha_{n-1} is uniform on the unit circle.
    """
    n = _check_n(n)
    gen = _as_generator(rng)
    k = np.arange(n - 1)
    r2 = gen.beta(1.0, (n - k - 1).astype(float)) if n > 1 else np.empty(0)
    phases = gen.random(n)
    alphas = np.empty(n, dtype=complex)
    alphas[:-1] = np.sqrt(r2) * np.exp(1j * TWO_PI * phases[:-1])
    alphas[-1] = np.exp(1j * TWO_PI * phases[-1])
    return alphas


def cmv_matrix(alphas) -> np.ndarray:
    """Dense CMV matrix ``L @ M`` built from Verblunsky coefficients.

    ``L = diag(T_0, T_2, ...)``, ``M = diag(1, T_1, T_3, ...)`` with
    ``T_k = [[conj(a_k), rho_k], [rho_k, -a_k]]``; a trailing unpaired index
    contributes the 1x1 block ``conj(a_{n-1})``.
    """
    a = np.asarray(alphas, dtype=complex)
    n = a.size
    rho = np.sqrt(np.clip(1.0 - np.abs(a) ** 2, 0.0, None))

    def blocks(first):
        m = np.zeros((n, n), dtype=complex)
        if first == 1:
            m[0, 0] = 1.0
        for k in range(first, n, 2):
            if k + 1 < n:
                m[k, k] = np.conj(a[k])
                m[k, k + 1] = rho[k]
                m[k + 1, k] = rho[k]
                m[k + 1, k + 1] = -a[k]
            else:
                m[k, k] = np.conj(a[k])
        return m

    return blocks(0) @ blocks(1)


def sample_cue(n: int, rng: RngLike, method: str = "haar") -> EigenAngles:
    """Eigenangles of a Haar unitary of dimension ``n``."""
    n = _check_n(n)
    if method == "haar":
        u = haar_unitary(n, rng)
    elif method == "cmv":
        u = cmv_matrix(sample_verblunsky(n, rng))
    else:
        raise DomainError(f"unknown CUE sampler {method!r}")
    return EigenAngles(np.angle(np.linalg.eigvals(u)))


def sample_cue_angles(n: int, seed: int, start: int, stop: int, method: str = "haar") -> np.ndarray:
    """Sorted eigenangles for replicas ``start..stop-1``, shape (stop-start, n).

    Replica ``r`` uses ``RngStream(seed, r)``; the dense linear algebra is
    batched, which does not change any replica's draws.
    """
    n = _check_n(n)
    if method == "haar":
        z = np.stack([ginibre(n, RngStream(seed, r).generator()) for r in range(start, stop)])
        u = _phase_fixed_q(z)
    elif method == "cmv":
        u = np.stack([cmv_matrix(sample_verblunsky(n, RngStream(seed, r))) for r in range(start, stop)])
    else:
        raise DomainError(f"unknown CUE sampler {method!r}")
    return canonical_angles(np.angle(np.linalg.eigvals(u)))


def sample_verblunsky_batch(n: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Verblunsky coefficients for replicas ``start..stop-1``, shape (stop-start, n)."""
    return np.stack([sample_verblunsky(n, RngStream(seed, r)) for r in range(start, stop)])


def trace_power(e: EigenAngles, j: int) -> complex:
    """``Tr(u^j) = sum_k exp(i j theta_k)`` (pairwise summation)."""
    if int(j) != j or j < 1:
        raise DomainError(f"power must be a positive integer, got {j!r}")
    return complex(np.sum(np.exp(1j * int(j) * e.angles)))


def power_sums(angles, jmax: int) -> np.ndarray:
    """``Tr(u^j)`` for ``j = 1..jmax`` on a batch of angle rows.

    ``angles`` has shape (..., n); the result has shape (..., jmax).
    """
    a = np.asarray(angles, dtype=float)
    j = np.arange(1, int(jmax) + 1, dtype=float)
    return np.exp(1j * a[..., None, :] * j[:, None]).sum(axis=-1)
