"""Matrix robust PCA by the inexact augmented Lagrangian method.

The baseline the tensor solver is compared against. For stacks of
slices, flatten with tensor.flatten_slices (one vectorized slice per
column) so both methods see the same data.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import shrink, thin_svd


@dataclass
class RpcaResult:
    """Low-rank plus sparse split of a matrix."""

    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    converged: bool


def svt(x, tau):
    """Singular value thresholding: shrink the spectrum of x by tau."""
    u, s, v = thin_svd(x)
    return (u * shrink(s, tau)) @ v.T


def rpca_ialm(x, lam=None, epsilon=1e-7, max_iter=1000):
    """Split x into low-rank plus sparse via inexact ALM.

    Alternates singular-value thresholding of the low-rank part,
    shrinkage of the sparse part, and a dual ascent step with growing
    step size, until ||X - A - E||_F / ||X||_F falls below epsilon.
    lam defaults to 1/sqrt(max(m, n)).

    Step-size schedule: mu starts at 1.25 / sigma_1(X), grows by 1.5
    each pass, and is capped at 1e7 times its initial value.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("input contains non-finite entries")
    m, n = x.shape
    if lam is None:
        lam = 1.0 / np.sqrt(max(m, n))
    x_norm = np.linalg.norm(x)
    if x_norm == 0:
        return RpcaResult(np.zeros_like(x), np.zeros_like(x), 0, True)
    mu = 1.25 / np.linalg.norm(x, 2)
    mu_cap = mu * 1e7
    rho = 1.5
    low = np.zeros_like(x)
    sparse = np.zeros_like(x)
    dual = np.zeros_like(x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        low = svt(x - sparse + dual / mu, 1.0 / mu)
        sparse = shrink(x - low + dual / mu, lam / mu)
        resid = x - low - sparse
        dual += mu * resid
        mu = min(mu_cap, rho * mu)
        if np.linalg.norm(resid) / x_norm <= epsilon:
            converged = True
            break
    return RpcaResult(low, sparse, it, converged)
