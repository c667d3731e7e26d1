"""Row and column block tensors of even-order paired tensors.

A row block concatenates along the column extent ``In`` of one pair, a column
block along the row extent ``Jn``.  The multi-block versions stage the
concatenation mode by mode: the first ``K1`` blocks are joined along mode 1,
the resulting groups of ``K2`` along mode 2, and so on.
"""
from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from .einstein import EvenPairedTensor, _ensure, einstein_compose
from .errors import ShapeError

__all__ = [
    "n_mode_row_block",
    "n_mode_col_block",
    "mode_row_block",
    "mode_col_block",
    "extract_row_block",
    "extract_col_block",
    "block_distribute_check",
]


def _check_pair(a: EvenPairedTensor, b: EvenPairedTensor, n: int):
    if a.data.shape != b.data.shape:
        raise ShapeError(f"blocks must share a paired shape, got {a.pairs} and {b.pairs}")
    if not 1 <= n <= a.order:
        raise ShapeError(f"mode {n} out of range for {a.order} pairs")


def n_mode_row_block(a, b, n: int) -> EvenPairedTensor:
    """``|a b|_n``: ``a`` occupies column indices ``1..In`` of pair ``n``, ``b`` the next ``In``."""
    a, b = _ensure(a), _ensure(b)
    _check_pair(a, b, n)
    return EvenPairedTensor(np.concatenate([a.data, b.data], axis=2 * n - 1))


def n_mode_col_block(a, b, n: int) -> EvenPairedTensor:
    """Column-block dual of :func:`n_mode_row_block` (doubles ``Jn``)."""
    a, b = _ensure(a), _ensure(b)
    _check_pair(a, b, n)
    return EvenPairedTensor(np.concatenate([a.data, b.data], axis=2 * n - 2))


def _staged(blocks, factors, first_axis):
    blocks = [_ensure(x) for x in blocks]
    if not blocks:
        raise ShapeError("need at least one block")
    n = blocks[0].order
    factors = [int(k) for k in factors]
    if len(factors) != n or any(k < 1 for k in factors):
        raise ShapeError(f"factorization {factors} must have {n} positive entries")
    if prod(factors) != len(blocks):
        raise ShapeError(f"factorization {factors} does not multiply to {len(blocks)} blocks")
    shape = blocks[0].data.shape
    if any(x.data.shape != shape for x in blocks):
        raise ShapeError("all blocks must share a paired shape")
    arrays = [x.data for x in blocks]
    for mode, k in enumerate(factors):
        axis = 2 * mode + first_axis
        arrays = [np.concatenate(arrays[g:g + k], axis=axis) for g in range(0, len(arrays), k)]
    return EvenPairedTensor(arrays[0])


def mode_row_block(blocks: Sequence, factors: Sequence[int]) -> EvenPairedTensor:
    """Generalized row block ``|X1 X2 ... XK|`` with ``K = K1 K2 ... KN``.

    The result has paired shape ``J1 x I1K1 x ... x JN x INKN``.  Block ``k``
    (1-based) sits at block coordinates ``ivec^-1(k, factors)``.
    """
    return _staged(blocks, factors, 1)


def mode_col_block(blocks: Sequence, factors: Sequence[int]) -> EvenPairedTensor:
    """Generalized column block; paired shape ``J1K1 x I1 x ... x JNKN x IN``."""
    return _staged(blocks, factors, 0)


def _extract(y, coords, block_extents, first_axis):
    y = _ensure(y)
    idx = [slice(None)] * y.data.ndim
    for mode, (k, e) in enumerate(zip(coords, block_extents)):
        idx[2 * mode + first_axis] = slice((k - 1) * e, k * e)
    return EvenPairedTensor(y.data[tuple(idx)])


def extract_row_block(y, coords: Sequence[int], block_cols: Sequence[int]) -> EvenPairedTensor:
    """Slice block at 1-based block coordinates ``coords`` out of a row block tensor."""
    return _extract(y, coords, block_cols, 1)


def extract_col_block(y, coords: Sequence[int], block_rows: Sequence[int]) -> EvenPairedTensor:
    return _extract(y, coords, block_rows, 0)


def block_distribute_check(p, a, b, n: int, c=None, d=None, rtol: float = 1e-12) -> bool:
    """Check that the Einstein product distributes over ``n``-mode blocks.

    Verifies ``p * |a b|_n == |p*a p*b|_n`` and
    ``|a b|_n * |c; d|_n == a*c + b*d``.  ``c`` and ``d`` default to the
    U-transposes of ``a`` and ``b``.
    """
    p, a, b = _ensure(p), _ensure(a), _ensure(b)
    c = a.T if c is None else _ensure(c)
    d = b.T if d is None else _ensure(d)

    def close(x, y):
        scale = max(1.0, x.norm(), y.norm())
        return np.linalg.norm((x.data - y.data).ravel()) <= rtol * scale

    lhs1 = einstein_compose(p, n_mode_row_block(a, b, n))
    rhs1 = n_mode_row_block(einstein_compose(p, a), einstein_compose(p, b), n)
    lhs2 = einstein_compose(n_mode_row_block(a, b, n), n_mode_col_block(c, d, n))
    rhs2 = einstein_compose(a, c) + einstein_compose(b, d)
    return close(lhs1, rhs1) and close(lhs2, rhs2)
