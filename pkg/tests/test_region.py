import numpy as np
import pytest

from jpen.exceptions import ParameterError, ValidationError
from jpen.estimators import EstimatorConfig, jpen_correlation
from jpen.matrix import min_eigenvalue
from jpen.region import PenaltyRegion, correlation_region, covariance_region, is_admissible, lambda_max
from oracles import random_correlation


def k2(r):
    return np.array([[1.0, r], [r, 1.0]])


def test_identity_boundary():
    # for a diagonal base the test matrix is (1 + gamma - lam/2) I, so the
    # boundary sits at lam = 2 (1 + gamma - tol)
    reg = correlation_region(np.eye(3))
    for gamma in (0.1, 0.5, 2.0):
        assert is_admissible(reg, 2 * gamma * 0.999, gamma)
        edge = 2 * (1 + gamma - reg.pd_tol)
        assert is_admissible(reg, edge * (1 - 1e-9), gamma)
        assert not is_admissible(reg, edge, gamma)
        assert not is_admissible(reg, edge + 1e-6, gamma)


def test_vanishing_lambda_admissible(rng):
    for _ in range(10):
        k = random_correlation(rng, 5)
        assert is_admissible(correlation_region(k), 1e-12, 0.3)


def test_two_by_two_beyond_bound():
    # the sign matrix of K + gamma I is all ones, so the test matrix has
    # eigenvalues 1.5 +- (0.9 - lam/2) - lam/2; the smaller is 0.6 at lam = 0
    # and the larger 2.4 - lam, so admissibility ends at lam = 2.4 - tol
    reg = correlation_region(k2(0.9))
    bound = lambda_max(reg, 0.5)
    # sigma_min(K + 0.5 I) = 0.6, sigma_max(sign K) = 2, c12 = 0.5
    assert bound == pytest.approx(0.6)
    assert is_admissible(reg, bound * 1.01, 0.5)
    assert is_admissible(reg, 2.39, 0.5)
    assert not is_admissible(reg, 2.4, 0.5)
    direct = min(np.linalg.eigvalsh(k2(0.9) + 0.5 * np.eye(2) - 1.2 * np.ones((2, 2))))
    assert reg.margin(2.4, 0.5) == pytest.approx(direct, abs=1e-12)


def test_lambda_max_examples():
    assert lambda_max(correlation_region(np.eye(4)), 1.0) == pytest.approx(4.0)
    assert lambda_max(correlation_region(k2(0.5)), 0.5) == pytest.approx(1.0)


def test_lambda_max_increasing_in_gamma(rng):
    reg = correlation_region(random_correlation(rng, 6))
    vals = [lambda_max(reg, g) for g in np.linspace(0.01, 3, 15)]
    assert np.all(np.diff(vals) > 0)


def test_lambda_max_sound(rng):
    for _ in range(100):
        p = int(rng.integers(2, 21))
        k = random_correlation(rng, p)
        gamma = float(rng.uniform(0.02, 2.5))
        reg = PenaltyRegion(k, 1.0, pd_tol=0.0)
        lam = 0.95 * lambda_max(reg, gamma)
        assert is_admissible(reg, lam, gamma)
        assert min_eigenvalue(jpen_correlation(k, EstimatorConfig(lam, gamma))) > 0


def test_lambda_max_zero_base():
    with pytest.raises(ValidationError):
        lambda_max(PenaltyRegion(np.zeros((2, 2))), 1.0)


def test_region_validation():
    with pytest.raises(ParameterError):
        PenaltyRegion(np.eye(2), c12=0.4)
    with pytest.raises(ParameterError):
        is_admissible(correlation_region(np.eye(2)), -1.0, 0.5)


def test_covariance_region_shift():
    s = np.diag([1.0, 3.0])
    assert covariance_region(s).shift == pytest.approx(2.0)
