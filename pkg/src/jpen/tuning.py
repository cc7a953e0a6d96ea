"""Tuning-parameter selection: admissibility, grids and K-fold CV."""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import estimators as est
from .exceptions import DimensionError, ExhaustedGridError, NumericalError, ParameterError
from .matrix import as_data, as_symmetric, l1_distance, sample_covariance, to_correlation
from .region import (  # noqa: F401  (re-exported)
    DEFAULT_C12,
    DEFAULT_PD_TOL,
    PenaltyRegion,
    correlation_region,
    covariance_region,
    is_admissible,
    lambda_max,
)

SCHEMA_VERSION = 1


def default_threads():
    """Worker count from ``JPEN_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("JPEN_THREADS", "1")))
    except ValueError:
        return 1


def _check_grid(name, grid):
    g = np.asarray(grid, dtype=np.float64).ravel()
    if g.size == 0:
        raise ParameterError(f"{name} is empty")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ParameterError(f"{name} must contain positive reals")
    if np.any(np.diff(g) <= 0):
        raise ParameterError(f"{name} must be strictly ascending")
    return tuple(float(x) for x in g)


@dataclass(frozen=True)
class CvPlan:
    lambda_grid: tuple
    gamma_grid: tuple
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if int(self.folds) != self.folds or self.folds < 2:
            raise ParameterError(f"folds must be an integer >= 2, got {self.folds!r}")
        object.__setattr__(self, "lambda_grid", _check_grid("lambda grid", self.lambda_grid))
        object.__setattr__(self, "gamma_grid", _check_grid("gamma grid", self.gamma_grid))
        object.__setattr__(self, "folds", int(self.folds))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self):
        return {
            "lambdaGrid": list(self.lambda_grid),
            "gammaGrid": list(self.gamma_grid),
            "folds": self.folds,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CvResult:
    best_lambda: float
    best_gamma: float
    loss_surface: np.ndarray = field(repr=False)
    admissible_mask: np.ndarray = field(repr=False)
    plan: CvPlan = None
    variant: str = "corr"

    @property
    def config(self):
        return est.EstimatorConfig(self.best_lambda, self.best_gamma)

    def to_dict(self):
        loss = [None if not np.isfinite(v) else float(v) for v in self.loss_surface.ravel()]
        return {
            "schemaVersion": SCHEMA_VERSION,
            "variant": self.variant,
            "lambdaGrid": list(self.plan.lambda_grid),
            "gammaGrid": list(self.plan.gamma_grid),
            "folds": self.plan.folds,
            "seed": self.plan.seed,
            "shape": list(self.loss_surface.shape),
            "lossSurface": loss,
            "admissibleMask": [bool(b) for b in self.admissible_mask.ravel()],
            "selected": {"lambda": self.best_lambda, "gamma": self.best_gamma},
        }


def lambda_boundary(region, gamma, iters=60):
    """Largest lambda (to bisection precision) that passes :func:`is_admissible`.

    Returns 0.0 when even lambda -> 0 is inadmissible.
    """
    a = region.shifted(gamma)
    hi = 2.0 * float(np.min(np.diag(a)))
    if hi <= 0 or not is_admissible(region, 0.0, gamma):
        return 0.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_admissible(region, mid, gamma):
            lo = mid
        else:
            hi = mid
    return lo


def default_grid(region, n, points=10, folds=5, seed=0):
    """Log-spaced (lambda, gamma) grid anchored at ``sqrt(log p / n)``.

    ``region`` is a :class:`PenaltyRegion` or a correlation matrix. Gamma
    spans ``[0.1 g, 10 g]``. Lambda spans two decades below the largest
    admissible lambda at the top gamma.
    """
    if int(points) != points or points < 2:
        raise ParameterError(f"points must be an integer >= 2, got {points!r}")
    if not isinstance(region, PenaltyRegion):
        region = correlation_region(region)
    p = region.dim
    if n < 1:
        raise ParameterError(f"n must be positive, got {n!r}")
    g = math.sqrt(max(math.log(p), 1e-12) / n)
    gammas = np.geomspace(0.1 * g, 10.0 * g, int(points))
    top = lambda_boundary(region, gammas[-1])
    if top <= 0:
        top = lambda_max(region, gammas[-1])
    top *= 0.99
    lambdas = np.geomspace(top / 100.0, top, int(points))
    return CvPlan(tuple(lambdas), tuple(gammas), folds, seed)


def fold_indices(n, folds, seed):
    """Split ``range(n)`` into ``folds`` near-equal, seeded-shuffled folds."""
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, folds)]


def _gaussian_nll(s_hold, omega):
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return math.inf
    return float(np.sum(s_hold * omega) - logdet)


def _fold_losses(x, idx, plan, variant):
    """CV loss of every grid point on one fold, shape (n_lambda, n_gamma)."""
    mask = np.ones(x.shape[0], dtype=bool)
    mask[idx] = False
    s_train = sample_covariance(x[mask])
    s_hold = sample_covariance(x[idx])
    precision = variant in est.PRECISION_VARIANTS
    out = np.full((len(plan.lambda_grid), len(plan.gamma_grid)), math.inf)
    for j, gamma in enumerate(plan.gamma_grid):
        for i, lam in enumerate(plan.lambda_grid):
            cfg = est.EstimatorConfig(lam, gamma)
            try:
                fit = est.estimate(variant, s_train, cfg, check=False).matrix
            except NumericalError:
                continue
            if precision:
                out[i, j] = _gaussian_nll(s_hold, fit)
            else:
                out[i, j] = l1_distance(fit, s_hold)
    return out


def admissible_mask(s, plan, variant):
    """Admissibility of every grid point for the full-data covariance ``s``."""
    mask = np.zeros((len(plan.lambda_grid), len(plan.gamma_grid)), dtype=bool)
    for j, gamma in enumerate(plan.gamma_grid):
        for i, lam in enumerate(plan.lambda_grid):
            try:
                fit = est.estimate(variant, s, est.EstimatorConfig(lam, gamma), check=True)
            except NumericalError:
                continue
            mask[i, j] = bool(fit.admissible)
    return mask


def _argmin_with_ties(loss, mask):
    masked = np.where(mask, loss, math.inf)
    best = np.min(masked)
    if not np.isfinite(best):
        return None
    ii, jj = np.nonzero(masked == best)
    # prefer larger lambda, then larger gamma
    order = np.lexsort((jj, ii))
    k = order[-1]
    return int(ii[k]), int(jj[k])


def cv_select(data, plan, variant="corr", n_jobs=None):
    """K-fold cross-validated choice of (lambda, gamma).

    Covariance variants are scored by the entrywise l1 distance between the
    training-fold estimate and the held-out sample covariance; precision
    variants by the held-out Gaussian negative log-likelihood.
    """
    x = as_data(data)
    n = x.shape[0]
    if n < 2 * plan.folds:
        raise DimensionError(f"need at least {2 * plan.folds} rows for {plan.folds}-fold CV, got {n}")
    variant = getattr(variant, "value", variant)
    folds = fold_indices(n, plan.folds, plan.seed)
    n_jobs = default_threads() if n_jobs is None else max(1, int(n_jobs))
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            per_fold = list(pool.map(lambda idx: _fold_losses(x, idx, plan, variant), folds))
    else:
        per_fold = [_fold_losses(x, idx, plan, variant) for idx in folds]
    loss = np.mean(np.stack(per_fold), axis=0)
    mask = admissible_mask(sample_covariance(x), plan, variant) & np.isfinite(loss)
    pick = _argmin_with_ties(loss, mask)
    if pick is None:
        raise ExhaustedGridError(
            "no admissible grid point; widen the gamma range upward")
    i, j = pick
    return CvResult(plan.lambda_grid[i], plan.gamma_grid[j], loss, mask, plan, variant)


def plan_for(data, variant="corr", points=10, folds=5, seed=0):
    """Default grid for ``data`` using the region matching ``variant``."""
    x = as_data(data)
    s = sample_covariance(x)
    variant = getattr(variant, "value", variant)
    if variant in est.BASELINES:
        return _baseline_plan(s, x.shape[0], variant, points, folds, seed)
    if variant in (est.Variant.DIRECT.value, est.PrecisionVariant.DIRECT.value):
        region = covariance_region(s)
    else:
        region = correlation_region(to_correlation(s)[0])
    return default_grid(region, x.shape[0], points, folds, seed)


def _baseline_plan(s, n, variant, points, folds, seed):
    # each baseline has one live parameter; the other axis is a dummy point
    p = s.shape[0]
    if variant == "baseline-soft":
        off = np.abs(s[~np.eye(p, dtype=bool)])
        top = 2.0 * float(off.max()) if off.size and off.max() > 0 else 1.0
        return CvPlan(tuple(np.geomspace(top / 100.0, top, int(points))), (1.0,), folds, seed)
    g = math.sqrt(max(math.log(p), 1e-12) / n)
    return CvPlan((1.0,), tuple(np.geomspace(0.1 * g, 10.0 * g, int(points))), folds, seed)


def tune(data, variant="corr", points=10, folds=5, seed=0, n_jobs=None):
    """Build the default grid for ``data`` and run :func:`cv_select`."""
    return cv_select(data, plan_for(data, variant, points, folds, seed), variant, n_jobs)


def region_for(s, variant, c12=DEFAULT_C12, pd_tol=DEFAULT_PD_TOL):
    s = as_symmetric(s)
    variant = getattr(variant, "value", variant)
    if variant in (est.Variant.DIRECT.value, est.PrecisionVariant.DIRECT.value):
        return covariance_region(s, c12=c12, pd_tol=pd_tol)
    return correlation_region(to_correlation(s)[0], c12=c12, pd_tol=pd_tol)
