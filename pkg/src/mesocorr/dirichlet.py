"""Prime tables and the Dirichlet-polynomial model of log zeta.

For ``omega`` uniform on (0, 1) the model vector has components

    Y_j = norm^-1 * sum_{p <= x} p^(-i omega t) / p^(1/2 + eps + i f_j)

with shifts ``f_j`` and ``eps`` generated by a :class:`ShiftSpec` at scale
``log t``, and ``norm = sqrt(-log eps)`` (macro) or ``sqrt(log log t)`` (micro).
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mesocorr.charpoly import ShiftSpec
from mesocorr.errors import CapacityError, CoverageError, DomainError, ParseError

SIEVE_CEILING = 2 ** 32
CACHE_MAGIC = b"MESOPRIM"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sIQQ")


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray
    log_primes: np.ndarray

    @classmethod
    def from_primes(cls, limit: int, primes) -> "PrimeTable":
        p = np.ascontiguousarray(primes, dtype=np.uint32 if limit < SIEVE_CEILING else np.uint64)
        logs = np.log(p.astype(float))
        p.setflags(write=False)
        logs.setflags(write=False)
        return cls(int(limit), p, logs)

    @property
    def count(self) -> int:
        return int(self.primes.size)

    def __len__(self):
        return self.count

    def __eq__(self, other):
        return (isinstance(other, PrimeTable) and self.limit == other.limit
                and np.array_equal(self.primes, other.primes))

    def require(self, x: float):
        if x > self.limit:
            raise CoverageError(f"prime table covers p <= {self.limit}, need p <= {x:g}")

    def upto(self, x: float) -> np.ndarray:
        self.require(x)
        return self.primes[: np.searchsorted(self.primes, math.floor(x), side="right")]

    def logs_upto(self, x: float) -> np.ndarray:
        self.require(x)
        return self.log_primes[: np.searchsorted(self.primes, math.floor(x), side="right")]

    def between(self, lo: float, hi: float) -> slice:
        """Index slice of primes with ``lo < p <= hi``."""
        self.require(hi)
        a = np.searchsorted(self.primes, math.floor(lo), side="right")
        b = np.searchsorted(self.primes, math.floor(hi), side="right")
        return slice(int(a), int(b))


def _small_odd_sieve(limit: int) -> np.ndarray:
    """All primes <= limit (limit small), plain Eratosthenes on odds."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit // 2 + 1, dtype=bool)  # flags[i] <-> 2i+1
    flags[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if flags[i]:
            p = 2 * i + 1
            flags[p * p // 2::p] = False
    odd = 2 * np.flatnonzero(flags) + 1
    return np.concatenate([[2], odd[odd <= limit]]).astype(np.int64)


def sieve(x: int, segment: int = 1 << 24) -> PrimeTable:
    """Exact primes ``<= x`` by a segmented odd-only sieve of Eratosthenes."""
    if int(x) != x:
        raise DomainError("sieve limit must be an integer")
    x = int(x)
    if x < 2:
        raise DomainError("sieve limit must be at least 2")
    if x > SIEVE_CEILING:
        raise CapacityError(f"sieve limit {x} exceeds ceiling 2^32")

    base = _small_odd_sieve(math.isqrt(x))[1:]  # odd base primes
    chunks = [np.array([2], dtype=np.int64)]
    lo = 3
    while lo <= x:
        hi = min(lo + 2 * segment, x + 1)  # odd numbers in [lo, hi)
        count = (hi - lo + 1) // 2
        flags = np.ones(count, dtype=bool)
        for p in base:
            p = int(p)
            sq = p * p
            if sq >= hi:
                break
            start = max(sq, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            flags[(start - lo) // 2::p] = False
        chunks.append(lo + 2 * np.flatnonzero(flags).astype(np.int64))
        lo += 2 * segment
    primes = np.concatenate(chunks)
    return PrimeTable.from_primes(x, primes[primes <= x])


def _varint_encode(values: np.ndarray) -> bytes:
    v = np.asarray(values, dtype=np.uint64)
    nbytes = np.ones(v.size, dtype=np.int64)
    for k in range(1, 10):
        nbytes += v >= (np.uint64(1) << np.uint64(7 * k))
    out = np.empty(int(nbytes.sum()), dtype=np.uint8)
    starts = np.concatenate([[0], np.cumsum(nbytes)[:-1]])
    for k in range(int(nbytes.max()) if v.size else 0):
        sel = nbytes > k
        byte = (v[sel] >> np.uint64(7 * k)) & np.uint64(0x7F)
        more = (nbytes[sel] > k + 1).astype(np.uint64) << np.uint64(7)
        out[starts[sel] + k] = (byte | more).astype(np.uint8)
    return out.tobytes()


def _varint_decode(data: bytes, count: int) -> np.ndarray:
    b = np.frombuffer(data, dtype=np.uint8)
    ends = np.flatnonzero(b < 0x80)
    if ends.size != count:
        raise ParseError(f"prime cache holds {ends.size} gaps, header says {count}")
    if count and ends[-1] != b.size - 1:
        raise ParseError("trailing bytes after last varint")
    starts = np.concatenate([[0], ends[:-1] + 1])
    group = np.repeat(np.arange(count), ends - starts + 1)
    shift = (np.arange(b.size) - starts[group]) * 7
    vals = np.zeros(count, dtype=np.uint64)
    np.add.at(vals, group, (b & 0x7F).astype(np.uint64) << shift.astype(np.uint64))
    return vals


def write_prime_cache(table: PrimeTable, path) -> None:
    """Header ``MESOPRIM | u32 version | u64 limit | u64 count`` then varint gaps (little endian)."""
    gaps = np.diff(np.concatenate([[0], table.primes.astype(np.uint64)]))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.limit, table.count))
        fh.write(_varint_encode(gaps))


def read_prime_cache(path) -> PrimeTable:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParseError("prime cache truncated")
    magic, version, limit, count = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise ParseError("not a prime cache (bad magic)")
    if version != CACHE_VERSION:
        raise ParseError(f"unsupported prime cache version {version}")
    primes = np.cumsum(_varint_decode(raw[_HEADER.size:], count))
    return PrimeTable.from_primes(limit, primes)


def load_or_sieve(x: int, cache_dir=None) -> PrimeTable:
    """Sieve to ``x``, reusing ``cache_dir/primes_<x>.bin`` when present."""
    if cache_dir is None:
        return sieve(x)
    path = Path(cache_dir) / f"primes_{int(x)}.bin"
    if path.exists():
        table = read_prime_cache(path)
        if table.limit == int(x):
            return table
    table = sieve(x)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_prime_cache(table, path)
    return table


@dataclass(frozen=True)
class ZetaModelSample:
    omega: float
    values: np.ndarray


def default_cutoff(t: float) -> int:
    return int(min(math.floor(t), SIEVE_CEILING))


def model_setup(primes: PrimeTable, t: float, spec: ShiftSpec, x=None):
    """``(logs, coefficients (ell, P), normalization)`` of the model at height ``t``."""
    if not t > math.e:
        raise DomainError("height t must exceed e so that log log t > 0")
    x = default_cutoff(t) if x is None else x
    logs = primes.logs_upto(x)
    scale = math.log(t)
    eps = spec.epsilon(scale)
    shifts = spec.offsets(scale)
    norm = spec.normalization(scale)
    coef = np.exp(-(0.5 + eps + 1j * shifts[:, None]) * logs[None, :])
    return logs, coef, norm


def zeta_model_vector(primes: PrimeTable, t: float, omega: float, spec: ShiftSpec, x=None) -> ZetaModelSample:
    """One draw of the normalized model vector at a given ``omega``."""
    if not (0.0 < omega < 1.0):
        raise DomainError("omega must lie in (0, 1)")
    logs, coef, norm = model_setup(primes, t, spec, x)
    phase = np.exp(-1j * (omega * t) * logs)
    return ZetaModelSample(float(omega), coef @ phase / norm)


def zeta_model_batch(primes: PrimeTable, t: float, omegas, spec: ShiftSpec, x=None,
                     method: str = "auto", block_width: float = 1.0, tol: float = 1e-11) -> np.ndarray:
    """Model vectors for many ``omegas`` at once, shape (len(omegas), ell).

    ``method="direct"`` forms every ``p^(-i omega t)`` (cost P * R); ``"nufft"``
    evaluates the same sums as type-3 nonuniform FFTs over blocks of ``log p``
    of width ``block_width`` (requires ``finufft``); ``"auto"`` picks NUFFT for
    large problems when available.
    """
    omegas = np.asarray(omegas, dtype=float)
    logs, coef, norm = model_setup(primes, t, spec, x)
    if method == "auto":
        method = "nufft" if logs.size * omegas.size > 5e8 and _have_finufft() else "direct"
    if method == "direct":
        out = np.zeros((omegas.size, coef.shape[0]), dtype=complex)
        step = max(1, int(2 ** 22 // max(1, omegas.size)))
        for a in range(0, logs.size, step):
            ph = np.exp(-1j * t * np.multiply.outer(omegas, logs[a:a + step]))
            out += ph @ coef[:, a:a + step].T
        return out / norm
    if method == "nufft":
        return _nufft_sums(logs, coef, omegas * t, block_width, tol) / norm
    raise DomainError(f"unknown evaluation method {method!r}")


def _have_finufft() -> bool:
    try:
        import finufft  # noqa: F401
    except ImportError:
        return False
    return True


def _nufft_sums(logs, coef, freqs, block_width, tol):
    import finufft

    out = np.zeros((freqs.size, coef.shape[0]), dtype=complex)
    edges = np.arange(logs[0], logs[-1] + block_width, block_width)
    cuts = np.searchsorted(logs, edges[1:], side="right")
    a = 0
    for b in np.unique(np.append(cuts, logs.size)):
        if b <= a:
            continue
        lp = logs[a:b]
        center = 0.5 * (lp[0] + lp[-1])
        strengths = np.ascontiguousarray(coef[:, a:b])
        sums = finufft.nufft1d3(lp - center, strengths, freqs, isign=-1, eps=tol, nthreads=1)
        out += (np.atleast_2d(sums) * np.exp(-1j * freqs * center)[None, :]).T
        a = b
    return out


def mv_coefficients(primes: PrimeTable, t: float, spec: ShiftSpec, x=None) -> np.ndarray:
    """``a_pt`` for weights ``mu = (1, ..., 1)``: ``norm^-1 sum_j p^-(1/2+eps+i f_j)``."""
    logs, coef, norm = model_setup(primes, t, spec, x)
    return coef.sum(axis=0) / norm


def mv_tail_diagnostic(primes: PrimeTable, t: float, m: float, spec: ShiftSpec, x=None) -> float:
    """``sum_{m < p <= x} |a_pt|^2 (1 + p/t)``."""
    x = default_cutoff(t) if x is None else x
    if not (2 <= m <= primes.limit):
        raise DomainError("tail start m must satisfy 2 <= m <= primes.limit")
    a = mv_coefficients(primes, t, spec, x)
    p = primes.upto(x).astype(float)
    sel = p > m
    return float(np.sum(np.abs(a[sel]) ** 2 * (1.0 + p[sel] / t)))


def diagonal_covariance(primes: PrimeTable, spec: ShiftSpec, t: float, x=None) -> np.ndarray:
    """Diagonal (p = q) part of the model covariance at height ``t``.

    ``M[j, k] = norm^-2 sum_{p<=x} p^{i (f_j - f_k)} / p^(1 + 2 eps)`` (Hermitian),
    the large-t limit of the omega-averaged covariance.
    """
    logs, coef, norm = model_setup(primes, t, spec, x)
    m = (np.conj(coef) @ coef.T) / norm ** 2
    np.fill_diagonal(m, np.real(np.diag(m)))
    return m


def exact_model_covariance(primes: PrimeTable, t: float, spec: ShiftSpec, x: float) -> np.ndarray:
    """Covariance ``E(conj(Y_j) Y_k) - conj(E Y_j) E Y_k`` over omega ~ U(0, 1).

    Exact integration per prime pair:
    ``E p^{i omega t} q^{-i omega t} = (e^{i t u} - 1) / (i t u)`` with
    ``u = log(p/q)``.  O(P^2); intended for x up to ~10^4.
    """
    logs, coef, norm = model_setup(primes, t, spec, x)
    u = logs[:, None] - logs[None, :]  # u[p, q] = log p - log q
    tu = t * u
    with np.errstate(invalid="ignore", divide="ignore"):
        kernel = np.where(tu == 0, 1.0 + 0j, np.expm1(1j * tu) / (1j * tu))
    # E[conj(Y_j) Y_k] = sum_{p,q} conj(c_jp) c_kq E[p^{i w t} q^{-i w t}]
    second = (np.conj(coef) @ kernel @ coef.T) / norm ** 2
    mean = exact_model_mean(primes, t, spec, x)
    return second - np.outer(np.conj(mean), mean)


def exact_model_mean(primes: PrimeTable, t: float, spec: ShiftSpec, x: float) -> np.ndarray:
    """``E Y_j`` over omega: ``E p^{-i omega t} = (e^{-i t log p} - 1) / (-i t log p)``."""
    logs, coef, norm = model_setup(primes, t, spec, x)
    tl = t * logs
    return coef @ (np.expm1(-1j * tl) / (-1j * tl)) / norm
