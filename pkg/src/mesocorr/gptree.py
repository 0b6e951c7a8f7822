"""Gaussian vectors with min-rule covariances.

The limiting covariance ``1 ^ min(c_i..c_{j-1})`` of the joint CLTs is
realized three ways here:

* directly as a matrix (:func:`theorem_cov_matrix`);
* by the ancestor-tree recursion ``X_k = X_father(k) + N_k`` on the Cartesian
  tree of a level sequence (:func:`build_tree`, :func:`sample_tree_gaussian`);
* by random Fourier partial sums whose exact covariance converges to it
  (:func:`partial_sum_vector`).

It also holds the two effective constructions for the counting processes,
``X_delta = B_delta + D_{1-delta}`` and ``Dt(a, b) = Dt_b - Dt_a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mesocorr.cue import RngLike, _as_generator
from mesocorr.errors import DomainError, ValidationError

ROOT = -1
TIE_JITTER = 1e-12


def min_covariance_matrix(c) -> np.ndarray:
    """``C[i, j] = min(c[i..j])``: the covariance ``E(X_i X_j)`` of the tree vector."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("levels must be a non-empty 1-d sequence")
    if np.any(~(c > 0)):
        raise DomainError("levels must be positive")
    ell = c.size
    out = np.empty((ell, ell))
    for i in range(ell):
        run = np.minimum.accumulate(c[i:])
        out[i, i:] = run
        out[i:, i] = run
    return out


def theorem_cov_matrix(gap_c) -> np.ndarray:
    """Limit covariance of the normalized log vector from consecutive gap exponents.

    Diagonal 1, and for ``i < j`` the entry ``1 ^ min(gap_c[i..j-1])``.
    ``gap_c`` may contain ``inf`` (coincident scale) and 0 (macroscopic gap).
    """
    g = np.atleast_1d(np.asarray(gap_c, dtype=float))
    if g.ndim != 1:
        raise DomainError("gap exponents must be 1-d")
    if np.any(np.isnan(g)) or np.any(g < 0):
        raise DomainError("gap exponents must be nonnegative")
    ell = g.size + 1
    h = np.minimum(g, 1.0)
    out = np.eye(ell)
    for i in range(ell - 1):
        run = np.minimum.accumulate(h[i:])
        out[i, i + 1:] = run
        out[i + 1:, i] = run
    return out


def interleaved_levels(gap_c) -> np.ndarray:
    """Levels ``(1, h_1, 1, h_2, ..., 1)`` with ``h_k = 1 ^ gap_c[k]``.

    The min-rule matrix of these ``2*ell - 1`` levels restricted to even
    positions is exactly :func:`theorem_cov_matrix` (``lambda = 1``, ``D = 0``).
    An ``ell x ell`` min-rule matrix cannot do this in general: gaps
    ``(0.9, 0.2, 0.9)`` force ``c_2, c_3 >= 0.9`` yet ``min(c_2, c_3) = 0.2``.
    """
    g = np.atleast_1d(np.asarray(gap_c, dtype=float))
    levels = np.ones(2 * g.size + 1)
    levels[1::2] = np.minimum(g, 1.0)
    if np.any(levels[1::2] <= 0):
        raise DomainError("interleaved levels need strictly positive gap exponents")
    return levels


def is_psd(matrix, tol: float = 1e-10) -> bool:
    """Symmetric/Hermitian and diagonally pivoted Cholesky succeeds to ``tol``."""
    a = np.array(matrix, dtype=complex if np.iscomplexobj(matrix) else float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    if not np.allclose(a, a.conj().T, atol=tol, rtol=0):
        return False
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(a)))) if n else 1.0)
    for k in range(n):
        d = np.real(np.diag(a))[k:]
        p = k + int(np.argmax(d))
        if d[p - k] < -tol * scale:
            return False
        if d[p - k] <= tol * scale:
            # remaining Schur complement must vanish
            return bool(np.all(np.abs(a[k:, k:]) <= tol * scale * 10))
        a[[k, p]] = a[[p, k]]
        a[:, [k, p]] = a[:, [p, k]]
        piv = np.sqrt(a[k, k].real)
        a[k, k:] /= piv
        a[k + 1:, k] = a[k, k + 1:].conj()
        a[k + 1:, k + 1:] -= np.outer(a[k, k + 1:].conj(), a[k, k + 1:])
    return True


@dataclass(frozen=True, eq=False)
class CorrelationTree:
    """Cartesian (ancestor) tree of a level sequence.

    ``father[i]`` is the nearest ancestor of ``i`` (``ROOT`` for the global
    minimum) and ``order`` lists indices by increasing level.
    """

    levels: np.ndarray
    father: np.ndarray
    order: np.ndarray

    @property
    def ell(self) -> int:
        return int(self.levels.size)

    @property
    def root(self) -> int:
        return int(self.order[0])

    def increments(self) -> np.ndarray:
        """Variances ``c_k - c_father(k)`` of the independent innovations."""
        parent_level = np.where(self.father == ROOT, 0.0, self.levels[np.maximum(self.father, 0)])
        return self.levels - parent_level


def build_tree(c, perturb_ties: bool = False) -> CorrelationTree:
    """Cartesian tree of ``c`` in O(ell) with a monotone stack.

    ``j`` is an ancestor of ``i`` when ``c_j`` is the minimum over the index
    interval between them; the father is the ancestor with the largest level,
    which is the larger of the previous-smaller and next-smaller neighbours.

    Ties are rejected unless ``perturb_ties`` is set, in which case level
    ``k`` is raised by ``k * 1e-12`` before building.
    """
    c = np.asarray(c, dtype=float).copy()
    if c.ndim != 1 or c.size == 0:
        raise DomainError("levels must be a non-empty 1-d sequence")
    if np.any(~(c > 0)):
        raise DomainError("levels must be positive")
    if perturb_ties:
        c = c + TIE_JITTER * np.arange(c.size)
    if np.unique(c).size != c.size:
        raise ValidationError("levels must be distinct (pass perturb_ties=True to jitter)")

    ell = c.size
    prev_smaller = np.full(ell, ROOT)
    next_smaller = np.full(ell, ROOT)
    stack: list[int] = []
    for i in range(ell):
        while stack and c[stack[-1]] > c[i]:
            next_smaller[stack.pop()] = i
        if stack:
            prev_smaller[i] = stack[-1]
        stack.append(i)

    father = np.full(ell, ROOT)
    for i in range(ell):
        a, b = prev_smaller[i], next_smaller[i]
        if a == ROOT:
            father[i] = b
        elif b == ROOT:
            father[i] = a
        else:
            father[i] = a if c[a] > c[b] else b
    order = np.argsort(c, kind="stable")
    for arr in (c, father, order):
        arr.setflags(write=False)
    return CorrelationTree(c, father, order)


def tree_transform(tree: CorrelationTree, z) -> np.ndarray:
    """Map standard normals ``z`` (..., ell) to the tree vector (..., ell).

    Walks ``order`` so every father is filled before its children.
    """
    z = np.asarray(z)
    sd = np.sqrt(tree.increments())
    x = np.empty_like(z)
    for k in tree.order:
        f = tree.father[k]
        x[..., k] = sd[k] * z[..., k] if f == ROOT else x[..., f] + sd[k] * z[..., k]
    return x


def sample_tree_gaussian(tree: CorrelationTree, rng: RngLike, size=None) -> np.ndarray:
    """Real Gaussian vector with covariance ``min_covariance_matrix(tree.levels)``."""
    gen = _as_generator(rng)
    shape = (tree.ell,) if size is None else (int(size), tree.ell)
    return tree_transform(tree, gen.standard_normal(shape))


def sample_tree_gaussian_complex(tree: CorrelationTree, rng: RngLike, size=None) -> np.ndarray:
    """Complex version: two independent real copies combined as ``(X + iX')/sqrt(2)``."""
    gen = _as_generator(rng)
    re = sample_tree_gaussian(tree, gen, size)
    im = sample_tree_gaussian(tree, gen, size)
    return (re + 1j * im) / np.sqrt(2.0)


def partial_sum_angles(n: int, gap_c) -> np.ndarray:
    """``phi_1 = 0`` and ``phi_k = phi_{k-1} + n^(-c_{k-1,k})``."""
    g = np.atleast_1d(np.asarray(gap_c, dtype=float))
    return np.concatenate([[0.0], np.cumsum(float(n) ** -g)]) if g.size else np.zeros(1)


def partial_sum_vector(n: int, gap_c, rng: RngLike) -> np.ndarray:
    """``Y_k = (log n)^(-1/2) sum_{r<=n} exp(i r phi_k) X_r / sqrt(r)``, X_r standard complex normal."""
    if int(n) != n or n < 2:
        raise DomainError("partial sums need n >= 2")
    n = int(n)
    gen = _as_generator(rng)
    x = (gen.standard_normal(n) + 1j * gen.standard_normal(n)) / np.sqrt(2.0)
    r = np.arange(1, n + 1, dtype=float)
    w = x / np.sqrt(r)
    phi = partial_sum_angles(n, gap_c)
    return np.array([np.sum(np.exp(1j * r * p) * w) for p in phi]) / np.sqrt(np.log(n))


def partial_sum_covariance(n: int, gap_c) -> np.ndarray:
    """Exact ``E(conj(Y_s) Y_t) = (log n)^-1 sum_{r<=n} exp(i r (phi_t - phi_s)) / r``."""
    from mesocorr.limits import rmt_micro_sum

    if int(n) != n or n < 2:
        raise DomainError("partial sums need n >= 2")
    phi = partial_sum_angles(n, gap_c)
    ell = phi.size
    harmonic = np.sum(1.0 / np.arange(1, int(n) + 1)) / np.log(n)
    out = np.empty((ell, ell), dtype=complex)
    for s in range(ell):
        out[s, s] = harmonic
        for t in range(s + 1, ell):
            v = rmt_micro_sum(int(n), phi[t] - phi[s])
            out[s, t] = v
            out[t, s] = np.conj(v)
    return out


def sample_bd_process(grid, rng: RngLike) -> np.ndarray:
    """``X_d = B_d + D_{1-d}`` on ``grid``.

    ``B`` is a standard Brownian motion built from independent increments over
    the sorted distinct grid values; every coordinate gets its own independent
    ``D`` draw with variance ``1 - d``, duplicates included.
    """
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1:
        raise DomainError("grid must be 1-d")
    if np.any((g < 0) | (g > 1)) or np.any(np.isnan(g)):
        raise DomainError("grid values must lie in [0, 1]")
    gen = _as_generator(rng)
    uniq, inverse = np.unique(g, return_inverse=True)
    steps = np.diff(np.concatenate([[0.0], uniq]))
    b = np.cumsum(np.sqrt(steps) * gen.standard_normal(uniq.size))
    d = np.sqrt(1.0 - g) * gen.standard_normal(g.size)
    return b[inverse] + d


def bd_covariance(grid) -> np.ndarray:
    """Exact covariance of :func:`sample_bd_process` coordinates."""
    g = np.asarray(grid, dtype=float)
    cov = np.minimum.outer(g, g)
    cov[np.diag_indices_from(cov)] = 1.0
    return cov


def _pair_array(pairs) -> np.ndarray:
    p = np.asarray([(float(a), float(b)) for a, b in pairs], dtype=float).reshape(-1, 2)
    if np.any(p < 0) or np.any(np.isnan(p)):
        raise DomainError("window endpoints must be nonnegative")
    return p


def sample_dtilde(pairs, rng: RngLike) -> np.ndarray:
    """``Dt(a, b) = Dt_b - Dt_a`` with independent ``Dt_x ~ N(0, 1/2)`` per distinct endpoint."""
    p = _pair_array(pairs)
    gen = _as_generator(rng)
    points, inverse = np.unique(p.ravel(), return_inverse=True)
    d = np.sqrt(0.5) * gen.standard_normal(points.size)
    ends = d[inverse].reshape(p.shape)
    return ends[:, 1] - ends[:, 0]


def strange_correlation(pairs) -> np.ndarray:
    """Predicted covariance of the limit counting process for window pairs.

    1 for identical windows, 1/2 when exactly one endpoint is shared in the
    same role, -1/2 when one window ends where the other starts, 0 otherwise.
    Degenerate windows ``(a, a)`` are identically zero.
    """
    p = _pair_array(pairs)
    m = len(p)
    out = np.zeros((m, m))
    for i in range(m):
        a, b = p[i]
        for j in range(m):
            a2, b2 = p[j]
            if a == b or a2 == b2:
                continue
            if a == a2 and b == b2:
                out[i, j] = 1.0
            elif a == a2 or b == b2:
                out[i, j] = 0.5
            elif b == a2 or a == b2:
                out[i, j] = -0.5
    return out
