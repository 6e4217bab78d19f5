"""Linear-algebra kernels: shrinkage, Stein equation, SPD right-division.

The Stein solver exploits that both coefficient matrices arising in the
decomposition algorithm are symmetric Gram matrices, so a two-sided
eigendecomposition reduces the equation to an elementwise divide. The
general non-symmetric case is rejected rather than silently mishandled.
"""

import numpy as np
import scipy.linalg

from .tensor import mode_product

SYMMETRY_RTOL = 1e-12
STEIN_MARGIN = 1e-12


def shrink(x, tau):
    """Elementwise soft threshold: sign(x) * max(|x| - tau, 0).

    Entries with |x| <= tau map to exactly 0. tau must be nonnegative.
    """
    if tau < 0:
        raise ValueError(f"shrinkage threshold must be nonnegative, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def symmetric_eig(x):
    """Eigendecomposition Q diag(d) Q.T of a symmetric matrix.

    Returns (Q, d) with d nondecreasing and Q orthogonal. Raises
    ValueError if x deviates from symmetry by more than 1e-12 relative.
    """
    asym = np.linalg.norm(x - x.T)
    if asym > SYMMETRY_RTOL * max(1.0, np.linalg.norm(x)):
        raise ValueError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    d, q = np.linalg.eigh(x)
    return q, d


def solve_stein(a, b, c):
    """Solve the Stein equation X - a X b = c for symmetric a and b.

    Both factors are diagonalized, a = Qa diag(d) Qa.T and
    b = Qb diag(g) Qb.T, which turns the equation into the elementwise
    divide Xt_ij = Ct_ij / (1 - d_i g_j) in the rotated frame. This runs
    in O(r^3) time and O(r^2) space per right-hand side.

    c may be a single r x r matrix or a stack of them with shape
    (r, r, N); the result has the same shape. Raises
    numpy.linalg.LinAlgError when some |1 - d_i g_j| falls below 1e-12
    (the equation is singular or near-singular).
    """
    r = a.shape[0]
    if a.shape != (r, r) or b.shape != (r, r) or c.shape[:2] != (r, r):
        raise ValueError(
            f"shape mismatch: a {a.shape}, b {b.shape}, c {c.shape}"
        )
    qa, d = symmetric_eig(a)
    qb, g = symmetric_eig(b)
    denom = 1.0 - np.outer(d, g)
    margin = np.min(np.abs(denom))
    if margin < STEIN_MARGIN:
        raise np.linalg.LinAlgError(
            f"singular Stein equation: solvability margin {margin:.3e}"
        )
    if c.ndim == 2:
        ct = qa.T @ c @ qb
        return qa @ (ct / denom) @ qb.T
    # stack of right-hand sides along the last axis
    ct = mode_product(mode_product(c, qa.T, 1), qb.T, 2)
    ct /= denom[:, :, None]
    return mode_product(mode_product(ct, qa, 1), qb, 2)


def solve_gram_system(target, gram):
    """Right-divide by an SPD matrix: return M with M @ gram = target.

    gram must be symmetric positive definite (a Cholesky factorization is
    used and its failure propagates as an error).
    """
    cho = scipy.linalg.cho_factor(gram, lower=True)
    return scipy.linalg.cho_solve(cho, target.T).T


def thin_svd(x):
    """Thin SVD with a deterministic sign convention.

    Returns (U, s, V) with x = U diag(s) V.T, s nonincreasing and
    nonnegative, and U, V having orthonormal columns. Each column of U is
    flipped so its largest-magnitude entry is nonnegative, with V's
    column adjusted to match, making the factors unique for distinct
    singular values.
    """
    if not np.isfinite(x).all():
        raise ValueError("cannot compute the SVD of a non-finite matrix")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    v = vt.T
    pivot = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivot, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    v = v * signs
    return u, s, v


def kron(a, b):
    """Kronecker product of two matrices."""
    return np.kron(a, b)
