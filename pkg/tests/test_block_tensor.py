from __future__ import annotations

import numpy as np
import pytest

from mlti import (
    EvenPairedTensor,
    ShapeError,
    block_distribute_check,
    extract_col_block,
    extract_row_block,
    mode_col_block,
    mode_row_block,
    n_mode_col_block,
    n_mode_row_block,
    phi,
    u_identity,
)
from mlti.generators import random_paired


def test_n1_blocks_are_matrix_concatenation():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    assert np.array_equal(n_mode_row_block(EvenPairedTensor(a), EvenPairedTensor(b), 1).data, np.hstack([a, b]))
    c = rng.standard_normal((3, 2))
    assert np.array_equal(n_mode_col_block(EvenPairedTensor(a), EvenPairedTensor(c), 1).data, np.vstack([a, c]))


def test_row_block_slices():
    rng = np.random.default_rng(1)
    a = random_paired((2, 2), (2, 2), rng)
    b = random_paired((2, 2), (2, 2), rng)
    y = n_mode_row_block(a, b, 1)
    assert y.data.shape == (2, 4, 2, 2)
    assert np.array_equal(y.data[:, 0:2], a.data)
    assert np.array_equal(y.data[:, 2:4], b.data)
    y2 = n_mode_row_block(a, b, 2)
    assert np.array_equal(y2.data[:, :, :, 2:4], b.data)
    z = n_mode_col_block(a, b, 2)
    assert z.data.shape == (2, 2, 4, 2)
    assert np.array_equal(z.data[:, :, 2:4], b.data)


def test_block_shape_mismatch():
    rng = np.random.default_rng(2)
    a = random_paired((2, 2), (2, 2), rng)
    b = random_paired((3, 2), (2, 2), rng)
    with pytest.raises(ShapeError):
        n_mode_row_block(a, b, 1)
    with pytest.raises(ShapeError):
        n_mode_row_block(a, a, 3)


def test_mode_row_block_collapses():
    rng = np.random.default_rng(3)
    a = random_paired((2, 3), (2, 2), rng)
    b = random_paired((2, 3), (2, 2), rng)
    assert np.array_equal(mode_row_block([a], (1, 1)).data, a.data)
    assert np.array_equal(mode_row_block([a, b], (2, 1)).data, n_mode_row_block(a, b, 1).data)
    assert np.array_equal(mode_col_block([a, b], (1, 2)).data, n_mode_col_block(a, b, 2).data)


def test_mode_row_block_staged_recovery():
    rng = np.random.default_rng(4)
    blocks = [random_paired((2, 2, 2), (2, 2, 2), rng) for _ in range(8)]
    y = mode_row_block(blocks, (2, 2, 2))
    assert y.data.shape == (2, 4, 2, 4, 2, 4)
    for k, blk in enumerate(blocks):
        coords = (k % 2 + 1, (k // 2) % 2 + 1, k // 4 + 1)
        assert np.array_equal(extract_row_block(y, coords, (2, 2, 2)).data, blk.data)
    z = mode_col_block(blocks, (2, 2, 2))
    for k, blk in enumerate(blocks):
        coords = (k % 2 + 1, (k // 2) % 2 + 1, k // 4 + 1)
        assert np.array_equal(extract_col_block(z, coords, (2, 2, 2)).data, blk.data)


def test_mode_row_block_factor_mismatch():
    rng = np.random.default_rng(5)
    blocks = [random_paired((2,), (2,), rng) for _ in range(3)]
    with pytest.raises(ShapeError):
        mode_row_block(blocks, (2,))


def test_block_distribution():
    rng = np.random.default_rng(6)
    a = random_paired((2, 2), (2, 2), rng)
    b = random_paired((2, 2), (2, 2), rng)
    assert block_distribute_check(u_identity((2, 2)), a, b, 1)
    m = [rng.standard_normal((3, 3)) for _ in range(3)]
    assert block_distribute_check(*(EvenPairedTensor(x) for x in m), 1)
    p = random_paired((3, 2), (2, 2), rng)
    for n in (1, 2):
        assert block_distribute_check(p, a, b, n)
    # the row block unfolds to the column-permuted concatenation of the blocks
    y = n_mode_row_block(a, b, 1)
    assert np.isclose(np.linalg.norm(phi(y)) ** 2, a.norm() ** 2 + b.norm() ** 2)
