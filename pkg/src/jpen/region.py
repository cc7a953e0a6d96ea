"""Admissible (lambda, gamma) regions.

A region is anchored on a base matrix ``B`` and a diagonal shift ``t``. A pair
``(lambda, gamma)`` is admissible when

    min eig[(B + gamma t I) - (lambda / 2) sign(B + gamma t I)] > pd_tol

which is the condition under which the closed-form estimators stay positive
definite.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError, ValidationError
from .matrix import as_symmetric, max_eigenvalue, min_eigenvalue, sign_matrix

DEFAULT_C12 = 0.5
DEFAULT_PD_TOL = 1e-8


@dataclass(frozen=True)
class PenaltyRegion:
    """Base matrix, diagonal shift and tolerances of an admissible set."""

    base: np.ndarray = field(repr=False)
    shift: float = 1.0
    c12: float = DEFAULT_C12
    pd_tol: float = DEFAULT_PD_TOL

    def __post_init__(self):
        object.__setattr__(self, "base", as_symmetric(self.base, "region base"))
        if not self.c12 >= 0.5:
            raise ParameterError(f"c12 must be >= 0.5, got {self.c12!r}")
        if not self.pd_tol >= 0:
            raise ParameterError(f"pd_tol must be nonnegative, got {self.pd_tol!r}")

    @property
    def dim(self):
        return self.base.shape[0]

    def shifted(self, gamma):
        out = self.base.copy()
        out[np.diag_indices_from(out)] += gamma * self.shift
        return out

    def margin(self, lam, gamma):
        """Smallest eigenvalue of the admissibility test matrix."""
        _check_params(lam, gamma)
        a = self.shifted(gamma)
        return min_eigenvalue(a - 0.5 * lam * sign_matrix(a))

    def contains(self, lam, gamma):
        return is_admissible(self, lam, gamma)


def _check_params(lam, gamma):
    if not lam >= 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam!r}")
    if not gamma >= 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma!r}")


def correlation_region(k, **kwargs):
    return PenaltyRegion(k, 1.0, **kwargs)


def covariance_region(s, **kwargs):
    s = as_symmetric(s)
    return PenaltyRegion(s, float(np.mean(np.diag(s))), **kwargs)


def is_admissible(region, lam, gamma):
    return region.margin(lam, gamma) > region.pd_tol


def lambda_max(region, gamma):
    """Sufficient upper bound on lambda for a given gamma.

    ``min eig(B + gamma t I) / (c12 * max eig(sign(B)))``. Every lambda
    strictly below the bound keeps the estimate positive definite; larger
    values may or may not.
    """
    if not gamma >= 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma!r}")
    sgn = sign_matrix(region.base)
    if not np.any(sgn):
        raise ValidationError("base matrix is identically zero; lambda bound undefined")
    top = max_eigenvalue(sgn)
    if top <= 0:
        raise ValidationError("sign matrix has no positive eigenvalue; lambda bound undefined")
    return min_eigenvalue(region.shifted(gamma)) / (region.c12 * top)
