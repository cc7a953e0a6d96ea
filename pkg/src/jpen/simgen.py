"""Ground-truth covariance structures and seeded Gaussian sampling.

Five families: hub, neighborhood, toeplitz, block (diagonal Toeplitz blocks)
and cov-i (dense, spread-out spectrum). Every generator takes an explicit
seed and uses NumPy's PCG64 generator, so results are reproducible bit for
bit on a given platform.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError
from .matrix import as_data, cholesky, eigh, inverse_spd, min_eigenvalue, sample_covariance, symmetrize

FAMILIES = ("hub", "neighborhood", "toeplitz", "block", "cov-i")

TOEPLITZ_DIAG = 2.0
TOEPLITZ_BASE = 0.75


@dataclass(frozen=True)
class GroundTruth:
    """True covariance, its inverse, and the off-diagonal zero pattern."""

    sigma: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    zero_pattern: np.ndarray = field(repr=False)
    family: str = ""
    params: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def dim(self):
        return self.sigma.shape[0]

    def nonzero_offdiag(self):
        p = self.dim
        return int(p * (p - 1) - np.count_nonzero(self.zero_pattern))

    def sidecar(self):
        vals = np.linalg.eigvalsh(self.sigma)
        return {
            "schemaVersion": 1,
            "family": self.family,
            "p": self.dim,
            "params": dict(self.params),
            "seed": self.seed,
            "minEigenvalue": float(vals[0]),
            "maxEigenvalue": float(vals[-1]),
            "nonzeroOffDiagonal": self.nonzero_offdiag(),
        }


@dataclass(frozen=True)
class SimSpec:
    family: str
    p: int
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if int(self.p) != self.p or self.p < 2:
            raise ParameterError(f"p must be an integer >= 2, got {self.p!r}")

    def generate(self):
        return generate(self)


def _zero_pattern(sigma):
    z = sigma == 0.0
    np.fill_diagonal(z, False)
    return z


def _finish(sigma, family, params, seed, omega=None):
    sigma = symmetrize(sigma)
    lo = min_eigenvalue(sigma)
    if lo <= 0:
        raise ParameterError(f"{family} construction is not positive definite (min eig {lo:.3e})")
    if omega is None:
        omega = inverse_spd(sigma)
    return GroundTruth(sigma, symmetrize(omega), _zero_pattern(sigma), family, params, seed)


def gen_hub(p, groups=20, seed=None):
    """Star-shaped groups: each pivot variable is linked to the rest of its group.

    Group size is ``s = p // groups`` and every link has value ``1 / (s + 1)``.
    Variables left over when ``groups`` does not divide ``p`` stay unlinked.
    """
    s = p // groups if groups >= 1 else 0
    if groups < 1 or s < 1:
        raise ParameterError(f"hub needs 1 <= groups <= p, got groups={groups}, p={p}")
    rho = 1.0 / (s + 1)
    sigma = np.eye(p)
    for g in range(groups):
        k = g * s
        sigma[k, k + 1:k + s] = rho
        sigma[k + 1:k + s, k] = rho
    params = {"groups": int(groups), "groupSize": s, "rho": rho}
    return _finish(sigma, "hub", params, seed)


def neighborhood_cap(rho):
    """Maximum off-diagonal nonzeros per row, keeping rows diagonally dominant."""
    cap = math.floor(1.0 / rho)
    if cap * rho >= 1.0:
        cap -= 1
    return cap


def gen_neighborhood(p, rho=0.245, seed=0):
    """Random geometric graph on points drawn uniformly in the unit square.

    Pairs are linked with probability ``exp(-4 d^2) / sqrt(2 pi)``; rows over
    the cap lose their farthest links first.
    """
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho!r}")
    rng = np.random.default_rng(seed)
    pts = rng.random((p, 2))
    iu, ju = np.triu_indices(p, 1)
    d2 = np.sum((pts[iu] - pts[ju]) ** 2, axis=1)
    prob = np.exp(-4.0 * d2) / math.sqrt(2.0 * math.pi)
    linked = rng.random(iu.size) < prob
    li, lj, ld = iu[linked], ju[linked], d2[linked]
    cap = neighborhood_cap(rho)
    degree = np.bincount(np.concatenate([li, lj]), minlength=p)
    keep = np.ones(li.size, dtype=bool)
    for e in np.argsort(-ld, kind="stable"):
        a, b = li[e], lj[e]
        if degree[a] > cap or degree[b] > cap:
            keep[e] = False
            degree[a] -= 1
            degree[b] -= 1
    sigma = np.eye(p)
    sigma[li[keep], lj[keep]] = rho
    sigma[lj[keep], li[keep]] = rho
    params = {"rho": float(rho), "rowCap": cap}
    return _finish(sigma, "neighborhood", params, seed)


def _toeplitz_block(size):
    idx = np.arange(size)
    lag = np.abs(idx[:, None] - idx[None, :])
    out = np.where(lag == 1, TOEPLITZ_BASE, 0.0)
    out = np.where(lag == 2, TOEPLITZ_BASE ** 2, out)
    np.fill_diagonal(out, TOEPLITZ_DIAG)
    return out


def gen_toeplitz(p, seed=None):
    """Banded Toeplitz: 2 on the diagonal, 0.75 and 0.75**2 on the first two bands."""
    if p < 3:
        raise ParameterError(f"toeplitz needs p >= 3, got {p}")
    return _finish(_toeplitz_block(p), "toeplitz", {}, seed)


def block_sizes(p, blocks):
    base, extra = divmod(p, blocks)
    return [base + 1 if b < extra else base for b in range(blocks)]


def gen_block(p, blocks=None, seed=None):
    """Block-diagonal matrix of Toeplitz blocks of near-equal size.

    ``blocks`` defaults to 4 for ``p <= 500`` and 6 otherwise; leading blocks
    absorb the remainder.
    """
    if blocks is None:
        blocks = 4 if p <= 500 else 6
    if blocks < 1:
        raise ParameterError(f"blocks must be >= 1, got {blocks}")
    sizes = block_sizes(p, blocks)
    if min(sizes) < 3:
        raise ParameterError(f"block size {min(sizes)} < 3 (p={p}, blocks={blocks})")
    sigma = np.zeros((p, p))
    start = 0
    for size in sizes:
        sigma[start:start + size, start:start + size] = _toeplitz_block(size)
        start += size
    return _finish(sigma, "block", {"blocks": int(blocks), "sizes": sizes}, seed)


def cov_i_eigenvalues(rng, p):
    factor = 1.0 + 1.0 / p ** (1.0 + math.log(1.0 + 1.0 / p ** 2))
    y = rng.standard_normal(p)
    x = np.abs(y) ** 1.5 * factor
    while np.any(x < 1e-12):
        bad = x < 1e-12
        x[bad] = np.abs(rng.standard_normal(int(bad.sum()))) ** 1.5 * factor
    return x


def gen_cov_i(p, seed=0):
    """Dense covariance ``U diag(x) U'`` with a widely spread spectrum.

    ``x_i = |y_i|^{3/2} (1 + 1/p^{1 + log(1 + 1/p^2)})`` for standard normal
    ``y``, and ``U`` holds the eigenvectors of the sample covariance of
    ``5p`` standard normal vectors.
    """
    if p < 2:
        raise ParameterError(f"cov-i needs p >= 2, got {p}")
    rng = np.random.default_rng(seed)
    x = cov_i_eigenvalues(rng, p)
    z = rng.standard_normal((5 * p, p))
    _, u = eigh(sample_covariance(z))
    sigma = (u * x) @ u.T
    omega = (u / x) @ u.T
    return _finish(sigma, "cov-i", {}, seed, omega=omega)


def generate(spec):
    """Build the :class:`GroundTruth` described by a :class:`SimSpec`."""
    params = dict(spec.params)
    if spec.family == "hub":
        return gen_hub(spec.p, params.get("groups", 20), spec.seed)
    if spec.family == "neighborhood":
        return gen_neighborhood(spec.p, params.get("rho", 0.245), spec.seed)
    if spec.family == "toeplitz":
        return gen_toeplitz(spec.p, spec.seed)
    if spec.family == "block":
        return gen_block(spec.p, params.get("blocks"), spec.seed)
    return gen_cov_i(spec.p, spec.seed)


def sample_mvn(truth, n, seed=0):
    """Draw ``n`` rows i.i.d. from ``N(0, truth.sigma)`` via its Cholesky factor."""
    if int(n) != n or n < 2:
        raise ParameterError(f"n must be an integer >= 2, got {n!r}")
    sigma = truth.sigma if isinstance(truth, GroundTruth) else truth
    chol = cholesky(sigma)
    z = np.random.default_rng(seed).standard_normal((int(n), chol.shape[0]))
    return as_data(z @ chol.T)
