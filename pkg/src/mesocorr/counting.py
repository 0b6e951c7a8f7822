"""Counting fluctuations of eigenangles and zeta zeros at mesoscopic scales.

Windows are half-open, ``(a, b]``, for both eigenangles and zeros so that
fluctuations add up exactly over adjacent windows.
"""

from __future__ import annotations

import gzip
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from mesocorr.charpoly import log_z, log_z_verblunsky
from mesocorr.cue import TWO_PI, EigenAngles, sample_cue_angles, sample_verblunsky_batch
from mesocorr.errors import CoverageError, DomainError, ParseError, ValidationError
from mesocorr.parallel import map_replicas
from mesocorr.rng import RngStream
from mesocorr.stats import CovarianceEstimate, estimate_covariance

FIRST_ZERO = 14.134725141734693
MIN_REPLICAS = 100
EIG_MAX_N = 64


class StatisticalPowerWarning(UserWarning):
    """Too few replicas for the correlation estimates to mean much."""


@dataclass(frozen=True)
class WindowPair:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 <= self.alpha < self.beta) or math.isinf(self.beta):
            raise DomainError(f"window needs 0 <= alpha < beta, got ({self.alpha}, {self.beta})")

    def astuple(self) -> tuple:
        return (self.alpha, self.beta)


def as_windows(pairs) -> list:
    return [p if isinstance(p, WindowPair) else WindowPair(float(p[0]), float(p[1])) for p in pairs]


# ---------------------------------------------------------------- eigenangles

def _check_window(alpha, beta):
    if not (0 <= alpha < beta <= TWO_PI):
        raise DomainError(f"window must satisfy 0 <= alpha < beta <= 2*pi, got ({alpha}, {beta})")


def count_eigs(e: EigenAngles, alpha: float, beta: float) -> int:
    """Number of eigenangles in ``(alpha, beta]``."""
    _check_window(alpha, beta)
    a = e.angles
    return int(np.searchsorted(a, beta, "right") - np.searchsorted(a, alpha, "right"))


def delta_n(e: EigenAngles, alpha: float, beta: float) -> float:
    """``N_n(alpha, beta) - n (beta - alpha) / (2 pi)``."""
    return count_eigs(e, alpha, beta) - e.n * (beta - alpha) / TWO_PI


def delta_n_from_log_z(e: EigenAngles, alpha: float, beta: float) -> float:
    """The same fluctuation through ``(Im log Z(e^{i beta}) - Im log Z(e^{i alpha})) / pi``."""
    _check_window(alpha, beta)
    v = log_z(e, 0.0, np.array([alpha, beta]))
    return float((v[1].imag - v[0].imag) / math.pi)


def _batch_counts(angles: np.ndarray, windows: np.ndarray) -> np.ndarray:
    """Fluctuations for rows of sorted angles, shape (rows, len(windows))."""
    n = angles.shape[1]
    out = np.empty((angles.shape[0], len(windows)))
    for r, row in enumerate(angles):
        hi = np.searchsorted(row, windows[:, 1], "right")
        lo = np.searchsorted(row, windows[:, 0], "right")
        out[r] = hi - lo
    return out - n * (windows[:, 1] - windows[:, 0]) / TWO_PI


def cue_window_fluctuations(n: int, windows, seed: int, replicas: int, method: str = "auto",
                            threads: int = 1) -> np.ndarray:
    """``delta_n`` over angle ``windows`` (array (m, 2)) for CUE replicas ``0..replicas-1``.

    ``eig`` counts eigenangles directly; ``szego`` uses the log Z identity with
    log Z from Verblunsky coefficients (no eigensolver).
    """
    w = np.asarray(windows, dtype=float).reshape(-1, 2)
    for a, b in w:
        _check_window(a, b)
    if method == "auto":
        method = "eig" if n <= EIG_MAX_N else "szego"
    if method == "eig":
        def chunk(start, stop):
            return _batch_counts(sample_cue_angles(n, seed, start, stop), w)
    elif method == "szego":
        points, inverse = np.unique(w.ravel(), return_inverse=True)
        inverse = inverse.reshape(w.shape)

        def chunk(start, stop):
            im = log_z_verblunsky(sample_verblunsky_batch(n, seed, start, stop), 0.0, points).imag
            return (im[:, inverse[:, 1]] - im[:, inverse[:, 0]]) / math.pi
    else:
        raise ValidationError(f"unknown counting method {method!r}")
    return map_replicas(chunk, replicas, threads, chunk=64)


# ---------------------------------------------------------------- zeta zeros

@dataclass(frozen=True, eq=False)
class ZeroTable:
    """Zero ordinates stored as offsets above ``base_height``."""

    base_height: float
    ordinates: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.ordinates, dtype=float)
        if self.base_height < 0 or math.isnan(self.base_height):
            raise ValidationError("base height must be nonnegative")
        if o.ndim != 1 or o.size == 0:
            raise ValidationError("zero table is empty")
        if np.any(o <= 0):
            raise ValidationError("ordinates must be positive")
        if np.any(np.diff(o) <= 0):
            raise ValidationError("ordinates must be strictly increasing")
        if self.base_height + o[0] < 14.0:
            raise ValidationError("heights start below the first zeta zero")
        o = o.copy()
        o.setflags(write=False)
        object.__setattr__(self, "ordinates", o)

    def __len__(self) -> int:
        return self.ordinates.size

    @property
    def heights(self) -> np.ndarray:
        return self.base_height + self.ordinates

    @property
    def starts_at_first_zero(self) -> bool:
        """True when the table is the complete list from the first zero up."""
        return self.base_height == 0 and abs(self.ordinates[0] - FIRST_ZERO) < 1e-3

    @property
    def lower(self) -> float:
        """Lowest height from which counts in the table are complete."""
        return 0.0 if self.starts_at_first_zero else float(self.heights[0])

    @property
    def upper(self) -> float:
        return float(self.heights[-1])

    @property
    def midpoint(self) -> float:
        return 0.5 * (float(self.heights[0]) + self.upper)


def parse_zero_table(stream, base_height: float = 0.0) -> ZeroTable:
    """Read one ordinate per line; ``#`` comments and blank lines are skipped."""
    values = []
    last = -math.inf
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(f"not a decimal ordinate: {line[:40]!r}", line=lineno) from None
        if not math.isfinite(v) or v <= 0:
            raise ParseError(f"ordinate must be positive and finite, got {line[:40]!r}", line=lineno)
        if v <= last:
            raise ParseError(f"ordinates not strictly increasing ({v!r} after {last!r})", line=lineno)
        values.append(v)
        last = v
    if not values:
        raise ParseError("no ordinates found", line=0)
    return ZeroTable(float(base_height), np.array(values))


def read_zero_table(path, base_height: float = 0.0) -> ZeroTable:
    """:func:`parse_zero_table` on a file; ``.gz`` files are decompressed."""
    path = str(path)
    if path.endswith(".gz"):
        with gzip.open(path, "rt", encoding="ascii") as fh:
            return parse_zero_table(fh, base_height)
    with io.open(path, "r", encoding="ascii") as fh:
        return parse_zero_table(fh, base_height)


def _smooth(t):
    t = np.asarray(t, dtype=float)
    return t / TWO_PI * np.log(t / (TWO_PI * math.e)) + 7.0 / 8.0


def smooth_count(t: float) -> float:
    """``(t / 2 pi) log(t / (2 pi e)) + 7/8``."""
    if not t >= 14:
        raise DomainError("smooth_count needs t >= 14")
    return float(_smooth(t))


def _require_cover(table: ZeroTable, lo, hi):
    if np.min(lo) < table.lower or np.max(hi) > table.upper:
        raise CoverageError(
            f"window [{np.min(lo):.6g}, {np.max(hi):.6g}] leaves table range "
            f"[{table.lower:.6g}, {table.upper:.6g}]")


def zero_count(table: ZeroTable, t) -> np.ndarray | int:
    """``N(t)``: zeros with height ``<= t`` (complete tables only)."""
    if not table.starts_at_first_zero:
        raise CoverageError("absolute counts need a table starting at the first zero")
    tt = np.asarray(t, dtype=float)
    _require_cover(table, tt, tt)
    c = np.searchsorted(table.heights, tt, "right")
    return int(c) if c.ndim == 0 else c


def count_between(table: ZeroTable, t1, t2):
    """Zeros in ``(t1, t2]``, vectorized over arrays of windows."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    _require_cover(table, t1, t2)
    h = table.heights
    return np.searchsorted(h, t2, "right") - np.searchsorted(h, t1, "right")


def delta_zeta(table: ZeroTable, t1, t2):
    """``Delta(t1, t2)``: zero count in ``(t1, t2]`` minus the smooth-term increment."""
    t1a = np.asarray(t1, dtype=float)
    t2a = np.asarray(t2, dtype=float)
    if np.any(t1a >= t2a):
        raise DomainError("delta_zeta needs t1 < t2")
    if np.any(t1a <= 0):
        raise DomainError("heights must be positive")
    d = count_between(table, t1a, t2a) - (_smooth(t2a) - _smooth(t1a))
    return float(d) if np.ndim(d) == 0 else d


def max_count_deviation(table: ZeroTable) -> float:
    """``sup_t |N(t) - smooth_count(t)|`` over ``[14, last zero]`` (complete tables).

    ``N`` jumps only at zeros and the smooth term increases, so the supremum is
    attained at a zero, from the left or from the right.
    """
    if not table.starts_at_first_zero:
        raise CoverageError("absolute counts need a table starting at the first zero")
    h = table.heights
    k = np.arange(1, h.size + 1)
    s = _smooth(h)
    return float(max(np.max(np.abs(k - s)), np.max(np.abs(k - 1 - s)), abs(smooth_count(14.0))))


# ---------------------------------------------------------------- experiment

def counting_normalization(scale: float, delta: float) -> float:
    """``(1/pi) sqrt((1 - delta) log scale)`` with scale = n or log T."""
    if scale <= 1:
        raise DomainError("normalizing scale must exceed 1")
    return math.sqrt((1.0 - delta) * math.log(scale)) / math.pi


def _windows_array(pairs) -> np.ndarray:
    return np.array([w.astuple() for w in as_windows(pairs)], dtype=float).reshape(-1, 2)


def counting_samples(source, delta: float, pairs, replicas: int, seed: int, threads: int = 1,
                     method: str = "auto") -> np.ndarray:
    """Normalized fluctuation vectors, shape (replicas, len(pairs)).

    ``source`` is an integer ``n`` (CUE(n), ``K = n^delta``, windows
    ``(alpha/K, beta/K]`` in angle) or a :class:`ZeroTable` (``K = (log T)^delta``
    with ``T`` the table midpoint; windows ``(b + alpha/K, b + beta/K]`` at base
    points ``b`` uniform on the middle 80% of the table, one per replica).
    """
    if not (0 <= delta < 1):
        raise DomainError("delta must lie in [0, 1)")
    if int(replicas) != replicas or replicas < 2:
        raise ValidationError("need at least two replicas")
    if replicas < MIN_REPLICAS:
        warnings.warn(f"{replicas} replicas: correlation estimates are noisy",
                      StatisticalPowerWarning, stacklevel=2)
    w = _windows_array(pairs)
    if isinstance(source, ZeroTable):
        log_t = math.log(source.midpoint)
        if log_t <= 1:
            raise CoverageError("table midpoint too low for log log T")
        k = log_t ** delta
        lo, hi = float(source.heights[0]), source.upper
        margin = 0.1 * (hi - lo)

        def chunk(start, stop):
            b = np.array([RngStream(seed, r).generator().uniform(lo + margin, hi - margin)
                          for r in range(start, stop)])
            return delta_zeta(source, b[:, None] + w[None, :, 0] / k, b[:, None] + w[None, :, 1] / k)

        vals = map_replicas(chunk, replicas, threads, chunk=4096)
        return vals / counting_normalization(log_t, delta)
    n = int(source)
    if n != source or n < 2:
        raise ValidationError("CUE source must be an integer n >= 2")
    k = n ** delta
    if w.max() / k > TWO_PI:
        raise DomainError("windows exceed one turn of the circle")
    vals = cue_window_fluctuations(n, w / k, seed, replicas, method, threads)
    return vals / counting_normalization(n, delta)


def correlation_experiment(source, delta: float, pairs, replicas: int, seed: int,
                           threads: int = 1, method: str = "auto") -> CovarianceEstimate:
    """Covariance estimate of the normalized counting fluctuations.

    Use :meth:`CovarianceEstimate.correlation` for the correlation matrix and
    ``corr_stderr`` for its batch-means error.
    """
    return estimate_covariance(counting_samples(source, delta, pairs, replicas, seed, threads, method))


__all__ = [
    "WindowPair", "ZeroTable", "StatisticalPowerWarning", "count_eigs", "delta_n",
    "delta_n_from_log_z", "cue_window_fluctuations", "parse_zero_table", "read_zero_table",
    "smooth_count", "zero_count", "count_between", "delta_zeta", "max_count_deviation",
    "counting_normalization", "counting_samples", "correlation_experiment",
]
