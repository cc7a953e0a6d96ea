"""Two-class linear discriminant analysis with a pluggable precision estimate.

The discriminant for class ``k`` is

    delta_k(x) = x' W mu_k - mu_k' W mu_k / 2 + log(pi_k)

with ``W`` an estimate of the inverse of the pooled within-class covariance.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import estimators as est
from .exceptions import (
    ConfigurationError,
    ExhaustedGridError,
    LabelError,
    NumericalError,
    ProtocolError,
)
from .matrix import as_data, symmetrize
from .tuning import _argmin_with_ties, default_threads, fold_indices, plan_for

NAIVE = "diagonal"


@dataclass(frozen=True)
class LdaModel:
    means: np.ndarray = field(repr=False)
    log_priors: np.ndarray
    precision: np.ndarray = field(repr=False)
    config: est.EstimatorConfig | None = None

    def discriminants(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        wm = self.means @ self.precision  # (2, p)
        const = -0.5 * np.sum(wm * self.means, axis=1) + self.log_priors
        return x @ wm.T + const

    def predict(self, x):
        return lda_predict(self, x)


@dataclass(frozen=True)
class PrecisionSource:
    """How to get the precision matrix for LDA.

    ``variant`` is a precision variant (``prec-corr``, ``prec-direct``,
    ``prec-weighted``) or ``diagonal`` for inverse variances only. If ``lam``
    and ``gamma`` are both set they are used as-is, otherwise they are chosen
    by inner K-fold CV on classification error.
    """

    variant: str = est.PrecisionVariant.CORRELATION.value
    lam: float | None = None
    gamma: float | None = None
    points: int = 10
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        ok = est.PRECISION_VARIANTS | {NAIVE}
        if self.variant not in ok:
            raise ConfigurationError(f"precision source must be one of {sorted(ok)}")


@dataclass(frozen=True)
class SplitProtocol:
    train_per_class: tuple = (27, 15)
    repeats: int = 100
    seed: int = 0

    def __post_init__(self):
        if len(self.train_per_class) != 2 or min(self.train_per_class) < 2:
            raise ProtocolError("train_per_class needs two counts, each >= 2")
        if self.repeats < 1:
            raise ProtocolError("repeats must be >= 1")


@dataclass
class SplitResult:
    mean_error: float
    std_error: float
    errors: np.ndarray = field(repr=False)
    configs: list = field(default_factory=list, repr=False)

    def to_dict(self, method, p):
        return {
            "schemaVersion": 1,
            "method": method,
            "p": int(p),
            "repeats": int(self.errors.size),
            "meanErrorPercent": 100.0 * self.mean_error,
            "stdErrorPercent": 100.0 * self.std_error,
            "errors": [float(e) for e in self.errors],
        }


def _check_labels(y, n):
    y = np.asarray(y).ravel()
    if y.size != n:
        raise LabelError(f"{y.size} labels for {n} rows")
    if not np.all(np.isin(y, (0, 1))):
        raise LabelError("labels must be 0 or 1")
    return y.astype(np.int64)


def pooled_covariance(x, y):
    """Within-class centred pooled covariance (denominator n)."""
    xc = x.copy()
    for k in (0, 1):
        rows = y == k
        xc[rows] -= x[rows].mean(axis=0)
    return symmetrize(xc.T @ xc / x.shape[0]), xc


def _class_stats(x, y):
    counts = np.array([np.count_nonzero(y == 0), np.count_nonzero(y == 1)])
    if np.any(counts < 2):
        raise LabelError(f"each class needs at least 2 training rows, got {counts.tolist()}")
    means = np.stack([x[y == 0].mean(axis=0), x[y == 1].mean(axis=0)])
    return means, np.log(counts / counts.sum())


def _precision(variant, s, cfg):
    if variant == NAIVE:
        return np.diag(1.0 / np.diag(s))
    return est.estimate(variant, s, cfg, check=False).matrix


def _lda_cv(x, y, source):
    """Choose (lambda, gamma) by K-fold CV misclassification rate."""
    _, xc = pooled_covariance(x, y)
    plan = plan_for(xc, source.variant, source.points, source.folds, source.seed)
    folds = fold_indices(x.shape[0], plan.folds, plan.seed)
    shape = (len(plan.lambda_grid), len(plan.gamma_grid))
    loss = np.zeros(shape)
    for idx in folds:
        keep = np.ones(x.shape[0], dtype=bool)
        keep[idx] = False
        xt, yt = x[keep], y[keep]
        means, logp = _class_stats(xt, yt)
        s, _ = pooled_covariance(xt, yt)
        for j, gamma in enumerate(plan.gamma_grid):
            for i, lam in enumerate(plan.lambda_grid):
                try:
                    w = _precision(source.variant, s, est.EstimatorConfig(lam, gamma))
                except NumericalError:
                    loss[i, j] = math.inf
                    continue
                pred = lda_predict(LdaModel(means, logp, w), x[idx])
                loss[i, j] += np.mean(pred != y[idx]) / plan.folds
    s_full, _ = pooled_covariance(x, y)
    mask = np.zeros(shape, dtype=bool)
    for j, gamma in enumerate(plan.gamma_grid):
        for i, lam in enumerate(plan.lambda_grid):
            try:
                fit = est.estimate(source.variant, s_full, est.EstimatorConfig(lam, gamma))
            except NumericalError:
                continue
            mask[i, j] = bool(fit.admissible)
    pick = _argmin_with_ties(loss, mask & np.isfinite(loss))
    if pick is None:
        raise ExhaustedGridError("no admissible grid point for the LDA precision estimate")
    return est.EstimatorConfig(plan.lambda_grid[pick[0]], plan.gamma_grid[pick[1]])


def lda_fit(x, y, source=None):
    """Fit class means, priors and a JPEN precision estimate."""
    source = source or PrecisionSource()
    x = as_data(x)
    y = _check_labels(y, x.shape[0])
    means, logp = _class_stats(x, y)
    s, _ = pooled_covariance(x, y)
    if source.variant == NAIVE:
        return LdaModel(means, logp, _precision(NAIVE, s, None))
    if source.lam is not None and source.gamma is not None:
        cfg = est.EstimatorConfig(source.lam, source.gamma)
    else:
        cfg = _lda_cv(x, y, source)
    return LdaModel(means, logp, _precision(source.variant, s, cfg), cfg)


def lda_predict(model, x):
    """Predicted class (0 or 1); ties go to class 0.

    Returns an int for a single observation and an array for a matrix.
    """
    single = np.ndim(x) == 1
    scores = model.discriminants(x)
    pred = (scores[:, 1] > scores[:, 0]).astype(np.int64)
    return int(pred[0]) if single else pred


def stratified_split(y, train_per_class, rng):
    train = []
    for k, size in zip((0, 1), train_per_class):
        rows = np.flatnonzero(y == k)
        train.append(rng.choice(rows, size=size, replace=False))
    train = np.sort(np.concatenate(train))
    test = np.setdiff1d(np.arange(y.size), train)
    return train, test


def split_benchmark(x, y, protocol=None, source=None, n_jobs=None):
    """Repeated stratified random splits; mean test error and its standard error.

    The standard error is ``std(ddof=1) / sqrt(repeats)``, and 0 when there
    is a single repeat.
    """
    protocol = protocol or SplitProtocol()
    source = source or PrecisionSource()
    x = as_data(x)
    y = _check_labels(y, x.shape[0])
    for k, size in zip((0, 1), protocol.train_per_class):
        have = np.count_nonzero(y == k)
        if have < size + 1:
            raise ProtocolError(f"class {k} has {have} rows; need at least {size + 1}")
    seeds = np.random.SeedSequence(protocol.seed).spawn(protocol.repeats)

    def one(seq):
        train, test = stratified_split(y, protocol.train_per_class, np.random.default_rng(seq))
        model = lda_fit(x[train], y[train], source)
        return float(np.mean(lda_predict(model, x[test]) != y[test])), model.config

    n_jobs = default_threads() if n_jobs is None else max(1, int(n_jobs))
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    errors = np.array([r[0] for r in results])
    se = float(np.std(errors, ddof=1) / math.sqrt(errors.size)) if errors.size > 1 else 0.0
    return SplitResult(float(np.mean(errors)), se, errors, [r[1] for r in results])
