"""NumPy implementations of the elementwise kernels.

Used when the compiled extension is not available. The arithmetic is
ordered to match ``_kernels.pyx`` operation for operation.
"""
import numpy as np


def threshold_shrink(m, half_lambda, gamma, shift):
    denom = 1.0 + gamma
    # "+ 0.0" turns -0.0 into 0.0, as in the compiled kernel
    out = np.sign(m) * np.maximum(np.abs(m) - half_lambda, 0.0) / denom + 0.0
    idx = np.diag_indices_from(m)
    out[idx] = (m[idx] + gamma * shift) / denom
    return out


def sign_matrix(m):
    return np.sign(m) + 0.0


def scale_symmetric(m, scale):
    return m * np.outer(scale, scale)


def l1_distance(a, b):
    d = np.abs(a - b)
    upper = np.triu(d, 1).sum()
    return float(np.trace(d) + 2.0 * upper)


def count_offdiag_zeros(m, tol):
    upper = np.abs(m[np.triu_indices_from(m, 1)]) <= tol
    return 2 * int(np.count_nonzero(upper))
