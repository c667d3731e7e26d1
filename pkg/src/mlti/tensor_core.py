"""Dense tensor index arithmetic, unfoldings and elementary multilinear products.

Tensors are plain :class:`numpy.ndarray` objects.  Wherever a tensor is
flattened the *ivec* order is used: the first index runs fastest (``order='F'``
in numpy terms).  Public index tuples and mode ids are 1-based; the conversion
to numpy's 0-based axes happens here and nowhere else.
"""
from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "RANK_TOL",
    "as_tensor",
    "ivec",
    "ivec_inverse",
    "s_transpose",
    "rc_unfold",
    "n_mode_matricize",
    "outer",
    "inner",
    "frobenius_norm",
    "n_mode_product",
    "tucker_product",
    "reshape",
    "vec",
    "numerical_rank",
]

#: Default relative tolerance for numerical ranks (singular value cutoff is
#: ``RANK_TOL * sigma_max * max(matrix dims)``).
RANK_TOL = 2.0 ** -45


def as_tensor(x) -> np.ndarray:
    """Return ``x`` as a float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor entries must be finite")
    return arr


def _check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(s) for s in shape)
    if any(s < 1 for s in shape):
        raise ShapeError(f"extents must be positive, got {shape}")
    return shape


def ivec(idx: Sequence[int], shape: Sequence[int]) -> int:
    """Linear (1-based) position of the 1-based multi-index ``idx``.

    >>> ivec((2, 2), (3, 2))
    5
    """
    shape = _check_shape(shape)
    idx = tuple(int(i) for i in idx)
    if len(idx) != len(shape):
        raise ShapeError(f"index {idx} has wrong order for shape {shape}")
    if any(not 1 <= i <= s for i, s in zip(idx, shape)):
        raise ShapeError(f"index {idx} out of range for shape {shape}")
    p, stride = 1, 1
    for i, s in zip(idx, shape):
        p += (i - 1) * stride
        stride *= s
    return p


def ivec_inverse(p: int, shape: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`ivec`: the 1-based multi-index at linear position ``p``."""
    shape = _check_shape(shape)
    p = int(p)
    if not 1 <= p <= prod(shape):
        raise ShapeError(f"position {p} out of range for shape {shape}")
    rem = p - 1
    idx = []
    for s in shape:
        rem, r = divmod(rem, s)
        idx.append(r + 1)
    return tuple(idx)


def _perm0(s: Sequence[int], order: int) -> list[int]:
    s = [int(k) for k in s]
    if len(s) != order or sorted(s) != list(range(1, order + 1)):
        raise ShapeError(f"{s} is not a permutation of 1..{order}")
    return [k - 1 for k in s]


def s_transpose(x, s: Sequence[int]) -> np.ndarray:
    """Permute modes so that output mode ``k`` is input mode ``s[k]`` (1-based).

    Output shape is ``(J_s(1), ..., J_s(N))``.
    """
    x = np.asarray(x)
    return np.transpose(x, _perm0(s, x.ndim))


def rc_unfold(x, row_modes: Sequence[int], col_modes: Sequence[int]) -> np.ndarray:
    """Matricize ``x`` with ``row_modes`` grouped into rows and ``col_modes`` into columns.

    Both groups are enumerated in ivec order of their listed modes.  Empty
    groups are rejected.
    """
    x = np.asarray(x)
    rows, cols = list(row_modes), list(col_modes)
    if not rows or not cols:
        raise ShapeError("row and column mode groups must both be nonempty")
    perm = _perm0(rows + cols, x.ndim)
    xt = np.transpose(x, perm)
    nr = prod(x.shape[k - 1] for k in rows)
    return xt.reshape(nr, -1, order="F")


def n_mode_matricize(x, n: int) -> np.ndarray:
    """Mode-``n`` matricization: mode ``n`` indexes rows, the rest columns in order."""
    x = np.asarray(x)
    if not 1 <= n <= x.ndim:
        raise ShapeError(f"mode {n} out of range for order {x.ndim}")
    if x.ndim == 1:
        return x.reshape(-1, 1)
    others = [k for k in range(1, x.ndim + 1) if k != n]
    return rc_unfold(x, [n], others)


def outer(x, y) -> np.ndarray:
    """Outer product; the result has order ``x.ndim + y.ndim``."""
    return np.multiply.outer(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def inner(x, y) -> float:
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise ShapeError(f"inner product needs equal shapes, got {x.shape} and {y.shape}")
    return float(np.dot(x.ravel(order="F"), y.ravel(order="F")))


def frobenius_norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x).ravel()))


def n_mode_product(x, a, n: int) -> np.ndarray:
    """``x ×_n a``: contract mode ``n`` of ``x`` with the columns of matrix ``a``."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeError("n_mode_product expects a matrix")
    if not 1 <= n <= x.ndim:
        raise ShapeError(f"mode {n} out of range for order {x.ndim}")
    if a.shape[1] != x.shape[n - 1]:
        raise ShapeError(
            f"matrix has {a.shape[1]} columns but mode {n} has extent {x.shape[n - 1]}"
        )
    y = np.tensordot(a, x, axes=(1, n - 1))
    return np.moveaxis(y, 0, n - 1)


def tucker_product(x, mats: Sequence) -> np.ndarray:
    """``x × {A_1, ..., A_N}``, one matrix per mode."""
    x = np.asarray(x, dtype=float)
    if len(mats) != x.ndim:
        raise ShapeError(f"need {x.ndim} matrices, got {len(mats)}")
    for n, a in enumerate(mats, start=1):
        x = n_mode_product(x, a, n)
    return x


def reshape(x, new_shape: Sequence[int]) -> np.ndarray:
    """Reshape keeping the ivec-ordered data unchanged (column-major reshape)."""
    x = np.asarray(x)
    new_shape = tuple(int(s) for s in new_shape)
    if prod(new_shape) != x.size:
        raise ShapeError(f"cannot reshape {x.shape} into {new_shape}")
    return x.reshape(new_shape, order="F")


def vec(x) -> np.ndarray:
    """Vectorization in ivec order."""
    return np.asarray(x).ravel(order="F")


def numerical_rank(m, tol: float = RANK_TOL, dims: Sequence[int] | None = None) -> int:
    """Count singular values above ``tol * sigma_max * max(dims)``.

    ``dims`` defaults to the matrix shape; callers that work on a compressed
    surrogate of a larger matrix pass the larger matrix's shape.
    """
    m = np.asarray(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return _count_above(s, tol, max(dims if dims is not None else m.shape))


def _count_above(s, tol: float, maxdim: int) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0] * maxdim))
