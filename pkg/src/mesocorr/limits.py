"""Deterministic lemma sums whose limits ``c ^ 1`` drive every covariance.

=====  ==========================================================  ==============
kind   normalized sum                                               scale ties
=====  ==========================================================  ==============
RMT1   (-1/log eps) sum_{j<=n} e^{i j d} / (j e^{2 j eps})          eps = n^-a, d = eps^c
RMT2   (1/log n) sum_{j<=n} e^{i j d} / j                           d = n^-c
NT1    (-1/log eps) sum_{p<=x} p^{i d} / p^{1+2 eps}                eps = k/log x, d = eps^c
NT2    (1/log log x) sum_{p<=x} p^{i d} / p                         d = (log x)^-c
=====  ==========================================================  ==============

The finite-size error is O(1/log) and is not small at desk scale, so sweeps
report the deviation of the real part from ``c ^ 1`` (the quantity that
enters covariances of real parts) with the imaginary part alongside.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mesocorr.errors import DomainError, ValidationError

_CHUNK = 1 << 21
KINDS = ("RMT1", "RMT2", "NT1", "NT2")


def _check_delta(delta):
    if not (0 < delta < 2 * math.pi):
        raise DomainError(f"delta must lie in (0, 2*pi), got {delta!r}")


def _geometric_log_sum(n: int, delta: float, damp: float) -> complex:
    """``sum_{j=1}^{n} exp(i j delta - j damp) / j``, chunked, pairwise within chunks."""
    total = 0j
    for start in range(1, n + 1, _CHUNK):
        j = np.arange(start, min(n, start + _CHUNK - 1) + 1, dtype=float)
        total += complex(np.sum(np.exp(j * (1j * delta - damp)) / j))
    return total


def rmt_macro_sum(n: int, eps: float, delta: float) -> complex:
    """RMT1 sum, normalized by ``-log eps``."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if not (0 < eps < 1):
        raise DomainError(f"normalization -log(eps) undefined for eps={eps!r}")
    _check_delta(delta)
    return _geometric_log_sum(int(n), delta, 2.0 * eps) / (-math.log(eps))


def rmt_micro_sum(n: int, delta: float) -> complex:
    """RMT2 sum, normalized by ``log n``."""
    if int(n) != n or n <= 1:
        raise DomainError("normalization log(n) undefined for n <= 1")
    _check_delta(delta)
    return _geometric_log_sum(int(n), delta, 0.0) / math.log(n)


def prime_power_sum(primes, x: float, sigma: float, delta: float) -> complex:
    """``sum_{p<=x} p^{i delta} / p^sigma`` over a :class:`PrimeTable`."""
    logs = primes.logs_upto(x)
    total = 0j
    for start in range(0, logs.size, _CHUNK):
        lp = logs[start:start + _CHUNK]
        total += complex(np.sum(np.exp((1j * delta - sigma) * lp)))
    return total


def nt_macro_sum(x: float, eps: float, delta: float, primes) -> complex:
    """NT1 sum, normalized by ``-log eps``."""
    if x < 2:
        raise DomainError("x must be at least 2")
    if not (0 < eps < 1):
        raise DomainError(f"normalization -log(eps) undefined for eps={eps!r}")
    if not delta > 0:
        raise DomainError("delta must be positive")
    return prime_power_sum(primes, x, 1.0 + 2.0 * eps, delta) / (-math.log(eps))


def nt_micro_sum(x: float, delta: float, primes) -> complex:
    """NT2 sum, normalized by ``log log x``."""
    if x < 16:
        raise DomainError("NT2 sums need x >= 16")
    if not delta > 0:
        raise DomainError("delta must be positive")
    return prime_power_sum(primes, x, 1.0, delta) / math.log(math.log(x))


def limit_prediction(c: float) -> float:
    """``min(c, 1)``; ``c`` may be ``inf``."""
    if math.isnan(c) or c < 0:
        raise DomainError("c must be nonnegative")
    return min(float(c), 1.0)


@dataclass
class LimitReport:
    kind: str
    c: float
    predicted: float
    values: list = field(default_factory=list)  # (size, complex normalized sum)

    @property
    def sizes(self):
        return [s for s, _ in self.values]

    @property
    def deviations(self) -> list[float]:
        return [abs(v.real - self.predicted) for _, v in self.values]

    @property
    def max_abs_deviation_last(self) -> float:
        return self.deviations[-1] if self.values else float("nan")

    @property
    def nonincreasing(self) -> bool:
        d = self.deviations
        return all(b <= a for a, b in zip(d, d[1:]))

    def rows(self):
        for (size, v), dev in zip(self.values, self.deviations):
            yield {
                "kind": self.kind,
                "c": self.c,
                "size": size,
                "re": v.real,
                "im": v.imag,
                "predicted": self.predicted,
                "deviation": dev,
            }


def lemma_parameters(kind: str, c: float, size: float, eps_exponent: float = 0.5, eps_constant: float = 3.0):
    """``(eps, delta)`` tied to ``size`` for lemma ``kind``; eps is None for micro lemmas."""
    if kind == "RMT1":
        eps = float(size) ** -eps_exponent
        return eps, eps ** c
    if kind == "RMT2":
        return None, float(size) ** -c
    if kind == "NT1":
        eps = eps_constant / math.log(size)
        return eps, eps ** c
    if kind == "NT2":
        return None, math.log(size) ** -c
    raise ValidationError(f"unknown lemma kind {kind!r}; expected one of {KINDS}")


def evaluate_lemma(kind: str, c: float, size, primes=None, eps_exponent: float = 0.5, eps_constant: float = 3.0) -> complex:
    eps, delta = lemma_parameters(kind, c, size, eps_exponent, eps_constant)
    if kind == "RMT1":
        return rmt_macro_sum(int(size), eps, delta)
    if kind == "RMT2":
        return rmt_micro_sum(int(size), delta)
    if kind == "NT1":
        return nt_macro_sum(size, eps, delta, primes)
    return nt_micro_sum(size, delta, primes)


def convergence_sweep(kind: str, c: float, sizes, primes=None, eps_exponent: float = 0.5,
                      eps_constant: float = 3.0, threads: int = 1) -> LimitReport:
    """Evaluate lemma ``kind`` along increasing ``sizes`` and compare with ``c ^ 1``.

    Prime lemmas sieve once up to ``max(sizes)`` unless ``primes`` is given.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown lemma kind {kind!r}; expected one of {KINDS}")
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError("sizes must be strictly increasing")
    report = LimitReport(kind, float(c), limit_prediction(c))
    if not sizes:
        return report
    if kind.startswith("NT") and primes is None:
        from mesocorr.dirichlet import sieve

        primes = sieve(int(max(sizes)))

    def one(size):
        return evaluate_lemma(kind, c, size, primes, eps_exponent, eps_constant)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(one, sizes))
    else:
        vals = [one(s) for s in sizes]
    report.values = list(zip(sizes, vals))
    return report
