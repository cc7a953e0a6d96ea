"""Dense symmetric-matrix primitives.

Symmetric matrices are plain ``float64`` NumPy arrays. Every function that
returns one builds it so that ``M[i, j] == M[j, i]`` holds bit for bit, and
every function that accepts one validates shape, finiteness and exact
symmetry first (see :func:`as_symmetric`).
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from ._backend import kernels
from .exceptions import (
    ConvergenceError,
    DegenerateVarianceError,
    DimensionError,
    IllConditionedError,
    NotPositiveDefiniteError,
    ParameterError,
    ValidationError,
)

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues sorted in non-increasing order, with their mean."""

    values: np.ndarray
    mean_value: float

    @property
    def min(self):
        return float(self.values[-1])

    @property
    def max(self):
        return float(self.values[0])

    def __len__(self):
        return len(self.values)


def as_symmetric(m, name="matrix"):
    """Validate ``m`` as a finite, exactly symmetric square matrix.

    Returns a C-contiguous float64 array (a copy only when needed).
    """
    a = np.ascontiguousarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or infinite entries")
    if not np.array_equal(a, a.T):
        raise ValidationError(f"{name} is not symmetric")
    return a


def symmetrize(m):
    """Return ``(m + m.T) / 2``, which is symmetric bit for bit."""
    m = np.asarray(m, dtype=np.float64)
    return np.ascontiguousarray((m + m.T) / 2.0)


def as_data(x, name="data"):
    """Validate an n x p observation matrix (n >= 2, finite entries)."""
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {a.shape}")
    if a.shape[0] < 2:
        raise DimensionError(f"{name} needs at least 2 observations, got {a.shape[0]}")
    if a.shape[1] < 1:
        raise DimensionError(f"{name} has no variables")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or infinite entries")
    return a


def sample_covariance(x):
    """Sample covariance centred at the sample mean, divided by ``n``."""
    x = as_data(x)
    xc = x - x.mean(axis=0)
    return symmetrize(xc.T @ xc / x.shape[0])


def to_correlation(s):
    """Split a covariance matrix into correlation matrix and standard deviations.

    Returns ``(K, scale)`` with ``S == diag(scale) @ K @ diag(scale)`` up to
    rounding and ``K`` carrying an exact unit diagonal.
    """
    s = as_symmetric(s, "covariance")
    d = np.diag(s).copy()
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        raise DegenerateVarianceError(int(bad[0]), float(d[bad[0]]))
    k = s / np.sqrt(np.outer(d, d))
    np.fill_diagonal(k, 1.0)
    return k, np.sqrt(d)


def scale_symmetric(m, scale):
    """Return ``diag(scale) @ m @ diag(scale)`` computed entrywise."""
    return kernels.scale_symmetric(np.ascontiguousarray(m, dtype=np.float64),
                                   np.ascontiguousarray(scale, dtype=np.float64))


def soft_threshold_offdiag(m, t):
    """Soft-threshold the off-diagonal entries of ``m`` at level ``t``.

    Off-diagonal entries become ``sign(m) * max(|m| - t, 0)``; the diagonal
    is returned unchanged.
    """
    if not t >= 0:
        raise ParameterError(f"threshold must be nonnegative, got {t!r}")
    m = as_symmetric(m)
    return kernels.threshold_shrink(m, float(t), 0.0, 0.0)


def threshold_shrink(m, lam, gamma, shift):
    """Closed-form joint-penalty map of a symmetric matrix.

    Off-diagonals: ``sign(m) * max(|m| - lam/2, 0) / (1 + gamma)``.
    Diagonal: ``(m_ii + gamma * shift) / (1 + gamma)``.
    """
    if not lam >= 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam!r}")
    if not gamma >= 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma!r}")
    return kernels.threshold_shrink(m, 0.5 * float(lam), float(gamma), float(shift))


def sign_matrix(m):
    """Elementwise sign with ``sign(0) == 0``."""
    return kernels.sign_matrix(as_symmetric(m))


def count_offdiag_zeros(m, tol=0.0):
    return kernels.count_offdiag_zeros(np.ascontiguousarray(m, dtype=np.float64), float(tol))


def _eigvalsh(m, subset=None):
    try:
        if subset is None:
            return np.linalg.eigvalsh(m)
        return sla.eigh(m, eigvals_only=True, subset_by_index=subset,
                        check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceError(f"symmetric eigen-solver did not converge: {exc}") from exc


def eigenvalues(m):
    """All eigenvalues of a symmetric matrix as an :class:`EigenSpectrum`."""
    m = as_symmetric(m)
    vals = _eigvalsh(m)[::-1].copy()
    return EigenSpectrum(values=vals, mean_value=float(vals.mean()))


def min_eigenvalue(m):
    m = np.ascontiguousarray(m, dtype=np.float64)
    return float(_eigvalsh(m, subset=[0, 0])[0])


def max_eigenvalue(m):
    m = np.ascontiguousarray(m, dtype=np.float64)
    p = m.shape[0]
    return float(_eigvalsh(m, subset=[p - 1, p - 1])[0])


def extreme_eigenvalues(m):
    """Return ``(min, max)`` eigenvalue."""
    return min_eigenvalue(m), max_eigenvalue(m)


def eigh(m):
    """Eigen-decomposition with eigenvalues in descending order.

    Eigenvector signs are fixed so the first nonzero entry of each column is
    positive, which makes the decomposition reproducible.
    """
    m = as_symmetric(m)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigen-solver did not converge: {exc}") from exc
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    lead = np.argmax(np.abs(vecs) > 1e-12, axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def cholesky(m):
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises :class:`NotPositiveDefiniteError` carrying the (0-based) index of
    the first pivot that failed.
    """
    m = as_symmetric(m)
    c, info = lapack.dpotrf(m, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        pivot = int(info) - 1
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (pivot {pivot} failed)", pivot=pivot)
    if info < 0:  # pragma: no cover - argument error inside LAPACK
        raise ValidationError(f"dpotrf rejected argument {-info}")
    return c


def inverse_spd(m, max_condition=MAX_CONDITION):
    """Invert a symmetric positive definite matrix.

    Refuses (rather than regularising) when the matrix is not positive
    definite or its condition number exceeds ``max_condition``.
    """
    m = as_symmetric(m)
    lo, hi = extreme_eigenvalues(m)
    if lo <= 0:
        raise NotPositiveDefiniteError(
            f"cannot invert: smallest eigenvalue is {lo:.3e}")
    if hi / lo > max_condition:
        raise IllConditionedError(
            f"cannot invert: condition number {hi / lo:.3e} exceeds {max_condition:.0e}")
    c, info = lapack.dpotrf(m, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        raise NotPositiveDefiniteError("cannot invert: Cholesky factorisation failed",
                                       pivot=int(info) - 1 if info > 0 else None)
    inv, info = lapack.dpotri(c, lower=1)
    if info != 0:  # pragma: no cover
        raise NotPositiveDefiniteError("cannot invert: dpotri failed")
    inv = np.tril(inv) + np.tril(inv, -1).T
    return np.ascontiguousarray(inv)


def frobenius_norm(m):
    return float(np.sqrt(np.sum(np.square(m))))


def operator_norm(m):
    """Largest absolute eigenvalue of a symmetric matrix."""
    vals = _eigvalsh(np.ascontiguousarray(m, dtype=np.float64))
    return float(max(abs(vals[0]), abs(vals[-1])))


def l1_norm(m):
    """Sum of absolute values of all entries."""
    return float(np.sum(np.abs(m)))


def l1_distance(a, b):
    return kernels.l1_distance(np.ascontiguousarray(a, dtype=np.float64),
                               np.ascontiguousarray(b, dtype=np.float64))
