"""Joint-penalty (JPEN) covariance and precision estimators.

All estimators here are closed-form transformations of an input matrix: the
off-diagonal entries are soft-thresholded at ``lambda / 2`` and the whole
matrix is pulled toward a multiple of the identity with weight ``gamma``.
The weighted variants use a threshold-then-eigenvalue-shrink scheme that
reduces to the closed form for uniform weights.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import (
    ConfigurationError,
    ConvergenceError,
    DegenerateVarianceError,
    NotCorrelationError,
    ParameterError,
)
from .matrix import (
    as_symmetric,
    count_offdiag_zeros,
    eigh,
    extreme_eigenvalues,
    inverse_spd,
    scale_symmetric,
    soft_threshold_offdiag,
    symmetrize,
    threshold_shrink,
    to_correlation,
)
from .region import PenaltyRegion, is_admissible

SCHEMA_VERSION = 1
CORRELATION_TOL = 1e-10


class Variant(str, Enum):
    CORRELATION = "corr"
    DIRECT = "direct"
    WEIGHTED = "weighted"


class PrecisionVariant(str, Enum):
    CORRELATION = "prec-corr"
    DIRECT = "prec-direct"
    WEIGHTED = "prec-weighted"


@dataclass(frozen=True)
class EstimatorConfig:
    """Penalty weights ``lam`` (l1) and ``gamma`` (eigenvalue variance).

    ``weights`` is the diagonal of the eigenvalue weight matrix and is only
    used by the weighted variants.
    """

    lam: float
    gamma: float
    weights: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ParameterError(f"lambda must be a nonnegative real, got {self.lam!r}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ParameterError(f"gamma must be a nonnegative real, got {self.gamma!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64).ravel()
            if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ParameterError("weights must be a non-empty vector of positive reals")
            object.__setattr__(self, "weights", w)

    def to_dict(self):
        out = {"lambda": self.lam, "gamma": self.gamma}
        if self.weights is not None:
            out["weights"] = [float(x) for x in self.weights]
        return out


@dataclass(frozen=True)
class _Estimate:
    matrix: np.ndarray = field(repr=False)
    config: EstimatorConfig
    variant: str
    admissible: bool | None = None

    def report(self, tol=1e-8):
        """JSON-ready summary of the estimate."""
        lo, hi = extreme_eigenvalues(self.matrix)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "kind": self.kind,
            "variant": str(self.variant),
            "config": self.config.to_dict(),
            "admissible": self.admissible,
            "dim": int(self.matrix.shape[0]),
            "minEigenvalue": lo,
            "maxEigenvalue": hi,
            "offDiagonalZeros": count_offdiag_zeros(self.matrix, tol),
            "zeroTolerance": tol,
        }


@dataclass(frozen=True)
class CovarianceEstimate(_Estimate):
    kind = "covariance"


@dataclass(frozen=True)
class PrecisionEstimate(_Estimate):
    kind = "precision"


def _match_trace(m, target):
    """Nudge diagonal entries by a few ulps so ``np.trace(m) == target``.

    The closed forms preserve the trace in exact arithmetic; this removes the
    rounding residue so the constraint holds bit for bit.
    """
    diff = target - np.trace(m)
    if diff == 0.0:
        return m
    p = m.shape[0]
    # the computed trace is monotone in each diagonal entry, so walk one entry
    # an ulp at a time; intermediate roundings can make an early summand skip
    # the target, so start with the last one and fall back to the others
    order = [p - 1] + [int(k) for k in np.argsort(-np.abs(np.diag(m)), kind="stable") if k != p - 1]
    for k in order:
        m[k, k] += diff
        for _ in range(64 * p + 64):
            diff = target - np.trace(m)
            if diff == 0.0:
                return m
            m[k, k] = np.nextafter(m[k, k], np.inf if diff > 0 else -np.inf)
        diff = target - np.trace(m)
    raise ConvergenceError(f"could not match trace {target!r} exactly")


def _check_correlation(k):
    k = as_symmetric(k, "correlation matrix")
    d = np.diag(k)
    if np.max(np.abs(d - 1.0)) > CORRELATION_TOL:
        raise NotCorrelationError("correlation matrix must have a unit diagonal")
    if np.max(np.abs(k)) > 1.0 + CORRELATION_TOL:
        raise NotCorrelationError("correlation entries must lie in [-1, 1]")
    if not np.all(d == 1.0):
        k = k.copy()
        np.fill_diagonal(k, 1.0)
    return k


def _require_weights(cfg, p):
    if cfg.weights is None:
        raise ConfigurationError("weighted variant requires cfg.weights")
    if cfg.weights.size != p:
        raise ConfigurationError(f"expected {p} weights, got {cfg.weights.size}")
    return cfg.weights


def _mean_diag(m):
    return float(np.mean(np.diag(m)))


def jpen_correlation(k, cfg):
    """JPEN estimate of a correlation matrix.

    Off-diagonals are ``sign(k) max(|k| - lam/2, 0) / (1 + gamma)``; the
    diagonal stays exactly one, so the trace equals ``p``.
    """
    k = _check_correlation(k)
    return threshold_shrink(k, cfg.lam, cfg.gamma, 1.0)


def jpen_covariance_from_correlation(s, cfg, check=True, c12=0.5, pd_tol=1e-8):
    """Regularise the correlation matrix of ``s`` and scale back.

    The diagonal of the result equals the diagonal of ``s`` exactly.
    """
    k, scale = to_correlation(s)
    r = jpen_correlation(k, cfg)
    out = scale_symmetric(r, scale)
    np.fill_diagonal(out, np.diag(as_symmetric(s)))
    adm = None
    if check:
        adm = is_admissible(PenaltyRegion(k, 1.0, c12, pd_tol), cfg.lam, cfg.gamma)
    return CovarianceEstimate(out, cfg, Variant.CORRELATION.value, adm)


def jpen_covariance_direct(s, cfg, check=True, c12=0.5, pd_tol=1e-8):
    """Regularise the sample covariance directly, keeping its trace.

    The shrink target is ``t I`` with ``t`` the mean of ``diag(s)``.
    """
    s = as_symmetric(s, "covariance")
    t = _mean_diag(s)
    out = _match_trace(threshold_shrink(s, cfg.lam, cfg.gamma, t), np.trace(s))
    adm = None
    if check:
        adm = is_admissible(PenaltyRegion(s, t, c12, pd_tol), cfg.lam, cfg.gamma)
    return CovarianceEstimate(out, cfg, Variant.DIRECT.value, adm)


def _weighted_shrink(m, lam, gamma, weights, target, trace):
    # threshold, then shrink each eigenvalue toward `target` with its own
    # weight, then shift the spectrum so the trace is `trace`
    p = m.shape[0]
    thr = threshold_shrink(m, lam, 0.0, 0.0)
    vals, vecs = eigh(thr)
    extremeness = np.abs(vals - vals.mean())
    order = np.argsort(-extremeness, kind="stable")
    paired = np.empty(p)
    paired[order] = np.sort(weights)[::-1]
    ga = gamma * paired
    new = (vals + ga * target) / (1.0 + ga)
    new += (trace - new.sum()) / p
    out = symmetrize((vecs * new) @ vecs.T)
    return _match_trace(out, trace)


def jpen_weighted_correlation(k, cfg):
    """Weighted JPEN correlation estimate (approximate, two-step).

    Larger weights are paired with the eigenvalues farthest from the mean
    of the spectrum, so extreme eigenvalues are shrunk the most.
    """
    k = _check_correlation(k)
    p = k.shape[0]
    w = _require_weights(cfg, p)
    return _weighted_shrink(k, cfg.lam, cfg.gamma, w, 1.0, float(p))


def jpen_weighted_covariance(s, cfg, pd_tol=1e-8):
    """Covariance estimate built on :func:`jpen_weighted_correlation`."""
    k, scale = to_correlation(s)
    r = jpen_weighted_correlation(k, cfg)
    out = scale_symmetric(r, scale)
    adm = extreme_eigenvalues(out)[0] > pd_tol
    return CovarianceEstimate(out, cfg, Variant.WEIGHTED.value, adm)


def choose_weights(s):
    """Eigenvalue weights from the sorted sample variances.

    Variances below one keep their value, the rest are inverted, and the
    result is normalised to sum to one. Returned in ascending-variance order.
    """
    s = as_symmetric(s, "covariance")
    e = np.sort(np.diag(s))
    if e[0] <= 0:
        idx = int(np.argmin(np.diag(s)))
        raise DegenerateVarianceError(idx, float(s[idx, idx]))
    a = np.where(e < 1.0, e, 1.0 / e)
    return a / a.sum()


def _threshold_inverse(pilot, cfg):
    m = inverse_spd(pilot)
    t = _mean_diag(m)
    out = _match_trace(threshold_shrink(m, cfg.lam, cfg.gamma, t), np.trace(m))
    return out, m, t


def jpen_inverse_correlation(rhat, cfg):
    """JPEN estimate of an inverse correlation matrix from a PD pilot.

    The pilot is inverted, then thresholded and shrunk toward ``t1 I`` where
    ``t1`` is the mean diagonal of the inverse. The trace of the inverse is
    preserved exactly.
    """
    out, _, _ = _threshold_inverse(as_symmetric(rhat, "pilot"), cfg)
    return out


def _inverse_region(m, t, c12, pd_tol):
    return PenaltyRegion(m, t, c12, pd_tol)


def jpen_precision_from_correlation(s, cfg_cov, cfg_prec=None, check=True,
                                    c12=0.5, pd_tol=1e-8):
    """Precision estimate through the regularised inverse correlation matrix."""
    cfg_prec = cfg_cov if cfg_prec is None else cfg_prec
    k, scale = to_correlation(s)
    rhat = jpen_correlation(k, cfg_cov)
    z, m, t1 = _threshold_inverse(rhat, cfg_prec)
    out = scale_symmetric(z, 1.0 / scale)
    adm = None
    if check:
        adm = (is_admissible(PenaltyRegion(k, 1.0, c12, pd_tol), cfg_cov.lam, cfg_cov.gamma)
               and is_admissible(_inverse_region(m, t1, c12, pd_tol),
                                 cfg_prec.lam, cfg_prec.gamma))
    return PrecisionEstimate(out, cfg_prec, PrecisionVariant.CORRELATION.value, adm)


def jpen_precision_direct(s, cfg_cov, cfg_prec=None, check=True, c12=0.5, pd_tol=1e-8):
    """Precision estimate obtained by regularising the inverse of the direct
    covariance estimate."""
    cfg_prec = cfg_cov if cfg_prec is None else cfg_prec
    sig = jpen_covariance_direct(s, cfg_cov, check=check, c12=c12, pd_tol=pd_tol)
    z, m, t2 = _threshold_inverse(sig.matrix, cfg_prec)
    adm = None
    if check:
        adm = bool(sig.admissible) and is_admissible(
            _inverse_region(m, t2, c12, pd_tol), cfg_prec.lam, cfg_prec.gamma)
    return PrecisionEstimate(z, cfg_prec, PrecisionVariant.DIRECT.value, adm)


def jpen_weighted_inverse_correlation(rhat, cfg):
    """Weighted inverse-correlation estimate, eigenvalues shrunk toward one.

    The trace of the inverted pilot is kept.
    """
    m = inverse_spd(as_symmetric(rhat, "pilot"))
    w = _require_weights(cfg, m.shape[0])
    return _weighted_shrink(m, cfg.lam, cfg.gamma, w, 1.0, float(np.trace(m)))


def jpen_weighted_precision(s, cfg_cov, cfg_prec, pd_tol=1e-8):
    k, scale = to_correlation(s)
    rhat = jpen_correlation(k, cfg_cov)
    z = jpen_weighted_inverse_correlation(rhat, cfg_prec)
    out = scale_symmetric(z, 1.0 / scale)
    adm = extreme_eigenvalues(out)[0] > pd_tol
    return PrecisionEstimate(out, cfg_prec, PrecisionVariant.WEIGHTED.value, adm)


def baseline_soft_threshold(s, lam):
    """Plain soft-thresholding of the off-diagonals at ``lam / 2``.

    The result need not be positive definite.
    """
    if not lam >= 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam!r}")
    return soft_threshold_offdiag(s, 0.5 * lam)


def baseline_eigen_shrink(s, gamma):
    """``(s + gamma t I) / (1 + gamma)`` with ``t`` the mean variance.

    Like the direct estimator, the trace of ``s`` is preserved bit for bit.
    """
    if not gamma >= 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma!r}")
    s = as_symmetric(s, "covariance")
    t = _mean_diag(s)
    return _match_trace(threshold_shrink(s, 0.0, gamma, t), np.trace(s))


COVARIANCE_VARIANTS = {v.value for v in Variant}
PRECISION_VARIANTS = {v.value for v in PrecisionVariant}
BASELINES = {"baseline-soft", "baseline-shrink"}


def estimate(variant, s, cfg, cfg_prec=None, check=True):
    """Dispatch on a variant name and return the estimated matrix wrapper.

    Baselines return a :class:`CovarianceEstimate` whose ``admissible`` flag
    records whether the result is positive definite.
    """
    variant = getattr(variant, "value", variant)
    if variant == Variant.CORRELATION.value:
        return jpen_covariance_from_correlation(s, cfg, check=check)
    if variant == Variant.DIRECT.value:
        return jpen_covariance_direct(s, cfg, check=check)
    if variant == Variant.WEIGHTED.value:
        if cfg.weights is None:
            cfg = EstimatorConfig(cfg.lam, cfg.gamma, choose_weights(s))
        return jpen_weighted_covariance(s, cfg)
    if variant == PrecisionVariant.CORRELATION.value:
        return jpen_precision_from_correlation(s, cfg, cfg_prec, check=check)
    if variant == PrecisionVariant.DIRECT.value:
        return jpen_precision_direct(s, cfg, cfg_prec, check=check)
    if variant == PrecisionVariant.WEIGHTED.value:
        cfg_prec = cfg if cfg_prec is None else cfg_prec
        if cfg_prec.weights is None:
            cfg_prec = EstimatorConfig(cfg_prec.lam, cfg_prec.gamma, choose_weights(s))
        return jpen_weighted_precision(s, cfg, cfg_prec)
    if variant == "baseline-soft":
        out = baseline_soft_threshold(s, cfg.lam)
        return CovarianceEstimate(out, cfg, variant, extreme_eigenvalues(out)[0] > 1e-8)
    if variant == "baseline-shrink":
        out = baseline_eigen_shrink(s, cfg.gamma)
        return CovarianceEstimate(out, cfg, variant, extreme_eigenvalues(out)[0] > 1e-8)
    raise ConfigurationError(f"unknown estimator variant {variant!r}")
