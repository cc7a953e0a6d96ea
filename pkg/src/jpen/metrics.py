"""Evaluation metrics for covariance estimates."""
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import lapack

from .exceptions import DegenerateDenominatorError, NotPositiveDefiniteError, ParameterError
from .matrix import as_symmetric, eigenvalues, extreme_eigenvalues, frobenius_norm, l1_norm, operator_norm

DEFAULT_ZERO_TOL = 1e-8
LOG_2PI = math.log(2.0 * math.pi)


def gaussian_loglik(s, sigma, n):
    """Gaussian log-likelihood of ``n`` mean-zero samples summarised by ``s``.

    ``-(n/2) [log det sigma + tr(s sigma^{-1}) + p log(2 pi)]``
    """
    s = as_symmetric(s)
    sigma = as_symmetric(sigma)
    c, info = lapack.dpotrf(sigma, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        raise NotPositiveDefiniteError("log-likelihood needs a positive definite covariance",
                                       pivot=int(info) - 1 if info > 0 else None)
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    inv, _ = lapack.dpotri(c, lower=1)
    inv = np.tril(inv) + np.tril(inv, -1).T
    p = sigma.shape[0]
    return -0.5 * n * (logdet + float(np.sum(s * inv)) + p * LOG_2PI)


def are(s, est, truth, n):
    """Relative gap between the log-likelihoods of ``est`` and ``truth``."""
    ref = gaussian_loglik(s, truth, n)
    if abs(ref) < 1e-12:
        raise DegenerateDenominatorError("log-likelihood at the true covariance is ~0")
    return abs(gaussian_loglik(s, est, n) - ref) / abs(ref)


def norm_errors(est, truth):
    """``(frobenius, operator, l1)`` norms of ``est - truth``."""
    est = np.asarray(est, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if est.shape != truth.shape:
        raise ParameterError(f"shape mismatch {est.shape} vs {truth.shape}")
    d = est - truth
    return frobenius_norm(d), operator_norm(d), l1_norm(d)


def sparsity_recovery(est, zero_pattern, tol=DEFAULT_ZERO_TOL):
    """Fractions of true zeros and of true nonzeros estimated as zero.

    With no true zeros the first rate is 1 by convention; with no true
    nonzeros the second is 0.
    """
    if not tol >= 0:
        raise ParameterError(f"tol must be nonnegative, got {tol!r}")
    est = np.asarray(est)
    zero_pattern = np.asarray(zero_pattern, dtype=bool)
    off = ~np.eye(est.shape[0], dtype=bool)
    small = np.abs(est) <= tol
    true_zero = zero_pattern & off
    true_nonzero = ~zero_pattern & off
    nz = np.count_nonzero(true_zero)
    nn = np.count_nonzero(true_nonzero)
    zero_rate = np.count_nonzero(small & true_zero) / nz if nz else 1.0
    false_rate = np.count_nonzero(small & true_nonzero) / nn if nn else 0.0
    return float(zero_rate), float(false_rate)


def condition_number(m):
    lo, hi = extreme_eigenvalues(as_symmetric(m))
    if lo <= 0:
        raise NotPositiveDefiniteError(f"condition number needs a PD matrix (min eig {lo:.3e})")
    return hi / lo


@dataclass
class EvalReport:
    method: str
    replicate: int
    are: float
    frobenius_error: float
    operator_error: float
    l1_error: float
    zero_recovery_rate: float
    false_zero_rate: float
    condition_number: float
    spectrum_true: np.ndarray = field(repr=False)
    spectrum_est: np.ndarray = field(repr=False)
    wall_time: float | None = None
    params: dict = field(default_factory=dict)

    CSV_FIELDS = ("method", "replicate", "lambda", "gamma", "are", "frobenius_error",
                  "operator_error", "l1_error", "zero_recovery_rate", "false_zero_rate",
                  "condition_number")

    def row(self, timing=False):
        values = {**asdict(self), "lambda": self.params.get("lambda"),
                  "gamma": self.params.get("gamma")}
        out = {k: values[k] for k in self.CSV_FIELDS}
        if timing:
            out["wall_time"] = self.wall_time
        return out

    def to_dict(self, timing=False):
        out = self.row(timing)
        out["spectrumTrue"] = [float(v) for v in self.spectrum_true]
        out["spectrumEst"] = [float(v) for v in self.spectrum_est]
        return out


def evaluate(s, est, truth, n, method="", replicate=0, tol=DEFAULT_ZERO_TOL,
             wall_time=None, params=None):
    """Compute every metric for one estimate against a ground truth.

    ARE and condition number are NaN when the estimate is not positive
    definite (possible for the soft-threshold baseline).
    """
    try:
        a = are(s, est, truth.sigma, n)
        cond = condition_number(est)
    except NotPositiveDefiniteError:
        a, cond = math.nan, math.nan
    frob, op, l1 = norm_errors(est, truth.sigma)
    zr, fr = sparsity_recovery(est, truth.zero_pattern, tol)
    return EvalReport(method, replicate, a, frob, op, l1, zr, fr, cond,
                      eigenvalues(truth.sigma).values, eigenvalues(est).values,
                      wall_time, dict(params or {}))


def timed(fn, *args, **kwargs):
    """Call ``fn`` and return ``(result, seconds)``."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
