"""log Z(u, X) = log det(I - u/X) near and on the unit circle.

Evaluation routes:

* :func:`log_z` sums principal logs factor by factor over eigenangles.  Each
  factor ``1 - e^{i(theta - phi) - eps}`` has nonnegative real part, so the
  sum is the continuous branch that vanishes as ``|X| -> inf``; on the circle
  it coincides almost surely with the L^2 limit of the trace series.
* :func:`log_z_series` truncates ``-sum_j Tr(u^j) X^-j / j``.
* :func:`log_z_verblunsky` runs the Szego recursion on Verblunsky
  coefficients.  Writing ``Z = Phi_n(X) / X^n`` and ``b_k = Phi_k^*/Phi_k``,

      log Z = sum_k Log(1 - conj(a_k) b_k(X) / X),
      b_{k+1} = (b_k - a_k X) / (X - conj(a_k) b_k),

  and every factor again has nonnegative real part for ``|X| >= 1``, so this
  is the same branch as :func:`log_z`.  O(n) per point, no eigensolver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from mesocorr.cue import EigenAngles
from mesocorr.errors import DomainError, SingularPointError, ValidationError
from mesocorr.gptree import theorem_cov_matrix

REGIMES = ("macro", "micro", "auto")
SINGULAR_TOL = 1e-12


class RegimeWarning(UserWarning):
    """Evaluation point sits between the proved regimes (eps ~ 1/scale)."""


@dataclass(frozen=True)
class ShiftSpec:
    """Evaluation points parameterized by exponents of a growing scale.

    With ``scale`` = n (matrices) or log t (zeta): ``eps = scale^-eps_exponent``
    and ``phi_1 = base_offset``, ``phi_k = phi_{k-1} + gap_unit * scale^-gap_exponents[k-2]``.
    ``eps_exponent = inf`` puts the points on the circle / critical line.
    A gap exponent 0 gives a constant (macroscopic) separation ``gap_unit``.
    """

    ell: int
    eps_exponent: float
    gap_exponents: tuple = ()
    base_offset: float = 0.0
    regime: str = "auto"
    gap_unit: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gap_exponents", tuple(float(g) for g in self.gap_exponents))
        if int(self.ell) != self.ell or self.ell < 1:
            raise ValidationError("ell must be a positive integer")
        if len(self.gap_exponents) != self.ell - 1:
            raise ValidationError(f"need {self.ell - 1} gap exponents, got {len(self.gap_exponents)}")
        if any(not (0 <= g < math.inf) for g in self.gap_exponents):
            raise ValidationError("gap exponents must be nonnegative and finite")
        if not (0 < self.gap_unit < math.inf):
            raise ValidationError("gap unit must be positive and finite")
        if self.regime not in REGIMES:
            raise ValidationError(f"regime must be one of {REGIMES}")
        e = float(self.eps_exponent)
        if math.isnan(e) or e < 0:
            raise ValidationError("eps exponent must be nonnegative")
        if self.regime == "macro" and not (0 < e < 1):
            raise ValidationError("macro regime needs 0 < eps_exponent < 1 (1/scale << eps << 1)")
        if self.regime == "micro" and not e > 1:
            raise ValidationError("micro regime needs eps_exponent > 1 (eps << 1/scale)")
        if self.regime == "auto" and e == 0:
            raise ValidationError("eps_exponent 0 gives eps = 1, outside every regime")

    @classmethod
    def from_gaps(cls, gaps, scale: float, eps_exponent: float, regime: str = "auto",
                  base_offset: float = 0.0) -> "ShiftSpec":
        """Spec whose consecutive gaps at ``scale`` equal ``gaps`` exactly."""
        exps = tuple(-math.log(g) / math.log(scale) for g in gaps)
        return cls(len(exps) + 1, eps_exponent, exps, base_offset, regime)

    def epsilon(self, scale: float) -> float:
        return 0.0 if math.isinf(self.eps_exponent) else float(scale) ** -float(self.eps_exponent)

    def offsets(self, scale: float) -> np.ndarray:
        steps = self.gap_unit * float(scale) ** -np.asarray(self.gap_exponents, dtype=float)
        return self.base_offset + np.concatenate([[0.0], np.cumsum(steps)])

    def effective_exponent(self) -> float:
        """Exponent of the normalizing scale: ``e`` (macro), 1 (micro), ``min(e, 1)`` (auto)."""
        if self.regime == "macro":
            return float(self.eps_exponent)
        if self.regime == "micro":
            return 1.0
        return min(float(self.eps_exponent), 1.0)

    def normalization(self, scale: float) -> float:
        if scale <= 1:
            raise DomainError("scale must exceed 1")
        if self.regime == "micro":
            return math.sqrt(math.log(scale))
        eps = self.epsilon(scale)
        if self.regime == "macro":
            return math.sqrt(-math.log(eps))
        if 0.1 <= eps * scale <= 10:
            warnings.warn(f"eps*scale = {eps * scale:.3g} lies between the proved regimes",
                          RegimeWarning, stacklevel=2)
        return math.sqrt(-math.log(max(eps, 1.0 / scale)))

    def predicted_covariance(self) -> np.ndarray:
        """Limit covariance ``1 ^ c_{i,j}``, exponents measured against the normalizing scale."""
        return theorem_cov_matrix(np.asarray(self.gap_exponents) / self.effective_exponent())


@dataclass(frozen=True)
class LogZVector:
    values: np.ndarray
    normalization: float


def _check_eps(eps):
    if math.isnan(eps) or eps < 0:
        raise DomainError("radius log eps must be nonnegative")


def log_z(e: EigenAngles, radius_log: float, phase):
    """``sum_k Log(1 - e^{i(theta_k - phi) - eps})`` at one phase or an array of phases."""
    eps = float(radius_log)
    _check_eps(eps)
    phi = np.asarray(phase, dtype=float)
    diff = e.angles[None, :] - np.atleast_1d(phi)[:, None]
    if eps == 0.0:
        gap = np.abs(np.angle(np.exp(1j * diff)))
        if np.any(gap < SINGULAR_TOL):
            raise SingularPointError("log Z evaluated at an eigenvalue on the unit circle")
    # -expm1 keeps 1 - w accurate when w is close to 1
    vals = np.sum(np.log(-np.expm1(1j * diff - eps)), axis=1)
    return complex(vals[0]) if phi.ndim == 0 else vals


def default_truncation(n: int, eps: float) -> int:
    return int(math.ceil(max(50.0 / eps if eps > 0 else 0.0, 10.0 * n)))


def log_z_series(e: EigenAngles, radius_log: float, phase: float, J: int | None = None) -> complex:
    """``-sum_{j=1}^{J} Tr(u^j) e^{-j(eps + i phi)} / j``."""
    eps = float(radius_log)
    _check_eps(eps)
    if J is None:
        if eps == 0:
            raise DomainError("on the circle the series needs an explicit truncation J")
        J = default_truncation(e.n, eps)
    if int(J) != J or J < 1:
        raise DomainError("truncation J must be a positive integer")
    total = 0j
    step = max(1, (1 << 20) // e.n)
    for start in range(1, int(J) + 1, step):
        stop = min(int(J), start + step - 1)
        j = np.arange(start, stop + 1, dtype=float)
        traces = np.exp(1j * np.outer(j, e.angles)).sum(axis=1)
        total += complex(np.sum(traces * np.exp(-j * (eps + 1j * phase)) / j))
    return -total


def series_tail_bound(n: int, eps: float, J: int) -> float:
    """Bound on ``|log_z - log_z_series|``: ``n e^{-J eps} / (J (1 - e^{-eps}))``."""
    return n * math.exp(-J * eps) / (J * (1.0 - math.exp(-eps)))


def normalized_vector(e: EigenAngles, spec: ShiftSpec) -> LogZVector:
    """log Z at the ``ell`` points of ``spec`` (scale = n), divided by the regime normalization."""
    scale = e.n
    if scale < 2:
        raise DomainError("normalization needs n >= 2")
    norm = spec.normalization(scale)
    vals = np.atleast_1d(log_z(e, spec.epsilon(scale), spec.offsets(scale)))
    return LogZVector(vals / norm, norm)


def log_z_verblunsky(alphas, radius_log: float, phases) -> np.ndarray:
    """log Z from Verblunsky coefficients, shape (batch, len(phases)).

    ``alphas`` has shape (n,) or (batch, n).
    """
    eps = float(radius_log)
    _check_eps(eps)
    a = np.atleast_2d(np.asarray(alphas, dtype=complex))
    x = np.exp(eps + 1j * np.atleast_1d(np.asarray(phases, dtype=float)))[None, :]
    b = np.ones((a.shape[0], x.shape[1]), dtype=complex)
    total = np.zeros_like(b)
    for k in range(a.shape[1]):
        ak = a[:, k:k + 1]
        cb = np.conj(ak) * b
        total += np.log(1.0 - cb / x)
        b = (b - ak * x) / (x - cb)
    return total


def normalized_batch(alphas, n: int, spec: ShiftSpec) -> np.ndarray:
    """Normalized vectors for a batch of Verblunsky rows, shape (batch, ell)."""
    return log_z_verblunsky(alphas, spec.epsilon(n), spec.offsets(n)) / spec.normalization(n)


def exact_covariance(n: int, radius_log: float, phases, J: int | None = None) -> np.ndarray:
    """``E(conj(log Z_s) log Z_t)`` for CUE(n) from ``E Tr u^j conj(Tr u^k) = delta_jk (j ^ n)``.

    Equals ``sum_j (j ^ n)/j^2 e^{-2 j eps} e^{i j (phi_s - phi_t)}``, summed to ``J``
    terms plus the tail bound ``n / J`` (reported through the terms being tiny).
    """
    eps = float(radius_log)
    phi = np.atleast_1d(np.asarray(phases, dtype=float))
    J = J or max(200 * n, 400_000)
    out = np.zeros((phi.size, phi.size), dtype=complex)
    for start in range(1, J + 1, 1 << 20):
        j = np.arange(start, min(J, start + (1 << 20) - 1) + 1, dtype=float)
        w = np.minimum(j, n) / j ** 2 * np.exp(-2 * j * eps)
        for s in range(phi.size):
            for t in range(s, phi.size):
                out[s, t] += np.sum(w * np.exp(1j * j * (phi[s] - phi[t])))
    iu = np.triu_indices(phi.size, 1)
    out[(iu[1], iu[0])] = np.conj(out[iu])
    return out


__all__ = [
    "ShiftSpec", "LogZVector", "RegimeWarning", "log_z", "log_z_series", "normalized_vector",
    "log_z_verblunsky", "normalized_batch", "exact_covariance", "series_tail_bound",
    "default_truncation",
]
