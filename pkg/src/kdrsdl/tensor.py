"""Dense 3-way tensors stored as numpy arrays of shape (m, n, N).

A tensor is a stack of N frontal slices of size m x n, indexed along the
last axis: slice i is ``t[:, :, i]``. All routines expect float64 data.
The canonical element order (used by the on-disk format) is Fortran order
of this shape: row index fastest, then column, then slice.
"""

import numpy as np


def as_tensor(data):
    """Coerce array-like data to a float64 3-way tensor, validating it.

    Raises ValueError if the input is not 3-dimensional, is empty, or
    contains NaN/Inf entries.
    """
    t = np.asarray(data, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got ndim={t.ndim}")
    if t.size == 0:
        raise ValueError(f"tensor has an empty dimension: shape={t.shape}")
    if not np.isfinite(t).all():
        raise ValueError("tensor contains non-finite entries")
    return t


def frontal_slice(t, i):
    """Return frontal slice i of t as an m x n view (writes propagate)."""
    n_slices = t.shape[2]
    if not 0 <= i < n_slices:
        raise IndexError(f"slice index {i} out of range for {n_slices} slices")
    return t[:, :, i]


def mode_product(t, u, mode):
    """Multiply a tensor by a matrix along mode 1 or mode 2.

    Mode 1 maps each frontal slice X_i to u @ X_i; mode 2 maps X_i to
    X_i @ u.T. Hence ``mode_product(mode_product(t, a, 1), b, 2)`` has
    slices a @ X_i @ b.T.

    Parameters
    ----------
    t : ndarray, shape (m, n, N)
    u : ndarray, 2-d; u.shape[1] must equal m (mode 1) or n (mode 2)
    mode : 1 or 2
    """
    if mode == 1:
        if u.shape[1] != t.shape[0]:
            raise ValueError(
                f"mode-1 product needs u.shape[1] == {t.shape[0]}, got {u.shape}"
            )
        return np.tensordot(u, t, axes=(1, 0))
    if mode == 2:
        if u.shape[1] != t.shape[1]:
            raise ValueError(
                f"mode-2 product needs u.shape[1] == {t.shape[1]}, got {u.shape}"
            )
        return np.swapaxes(np.tensordot(u, t, axes=(1, 1)), 0, 1)
    raise ValueError(f"mode must be 1 or 2, got {mode!r}")


def reconstruct(core, a, b):
    """Assemble the low-rank tensor with slices a @ R_i @ b.T.

    core has shape (r, r, N), a is m x r, b is n x r; the result is
    (m, n, N).
    """
    if a.shape[1] != core.shape[0] or b.shape[1] != core.shape[1]:
        raise ValueError(
            f"bases {a.shape} x {b.shape} incompatible with core {core.shape}"
        )
    return mode_product(mode_product(core, a, 1), b, 2)


def flatten_slices(t):
    """Matricize with each frontal slice vectorized (column-major) as a column."""
    m, n, num = t.shape
    return np.asfortranarray(t).reshape(m * n, num, order="F")


def unflatten_slices(mat, m, n):
    """Inverse of flatten_slices for slices of size m x n."""
    if mat.shape[0] != m * n:
        raise ValueError(f"matrix has {mat.shape[0]} rows, expected {m * n}")
    return mat.reshape(m, n, mat.shape[1], order="F")


def slice_norms(t):
    """Frobenius norm of every frontal slice, as a length-N vector."""
    return np.sqrt(np.einsum("ijk,ijk->k", t, t))
