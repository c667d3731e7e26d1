from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlti import (
    ConvergenceError,
    EvenPairedTensor,
    ProbeOutcome,
    ShapeError,
    SingularTensorError,
    einstein_apply,
    einstein_compose,
    hobg_solve,
    horqi,
    is_u_positive_definite,
    m_positive_probe,
    paired_outer,
    phi,
    phi_inverse,
    reach_gramian,
    tucker_to_einstein,
    u_diagonal,
    u_eigen,
    u_identity,
    u_inverse,
    u_power,
    u_transpose,
    unfolding_det,
    unfolding_rank,
    vec,
)
from mlti.generators import example_tucker_system, random_paired, symmetric_paired

dims = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)


def test_paired_layout_and_shapes():
    a = EvenPairedTensor(np.zeros((2, 3, 4, 5)))
    assert a.order == 2
    assert a.pairs == ((2, 3), (4, 5))
    assert a.row_shape == (2, 4)
    assert a.col_shape == (3, 5)
    with pytest.raises(ShapeError):
        EvenPairedTensor(np.zeros((2, 3, 4)))


def test_einstein_apply_examples():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 3))
    assert np.allclose(einstein_apply(u_identity((2, 3)), x), x)
    a1, a2 = rng.standard_normal((4, 2)), rng.standard_normal((5, 3))
    a = paired_outer([a1, a2])
    assert np.allclose(einstein_apply(a, x), a1 @ x @ a2.T)
    b = random_paired((2, 2), (2, 3), rng)
    assert np.allclose(vec(einstein_apply(b, x)), phi(b) @ vec(x))
    with pytest.raises(ShapeError):
        einstein_apply(b, x.T)


def test_einstein_compose_examples():
    rng = np.random.default_rng(1)
    a = random_paired((2, 3), (3, 2), rng)
    assert np.allclose(einstein_compose(a, u_identity((3, 2))).data, a.data)
    m1, m2 = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
    c = einstein_compose(EvenPairedTensor(m1), EvenPairedTensor(m2))
    assert np.allclose(c.data, m1 @ m2)
    with pytest.raises(ShapeError):
        einstein_compose(a, a)


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 2**32 - 1))
def test_phi_is_a_homomorphism(rows, seed):
    rng = np.random.default_rng(seed)
    mids = tuple(int(v) for v in rng.integers(1, 4, size=len(rows)))
    cols = tuple(int(v) for v in rng.integers(1, 4, size=len(rows)))
    a = random_paired(rows, mids, rng)
    b = random_paired(mids, cols, rng)
    lhs = phi(einstein_compose(a, b))
    rhs = phi(a) @ phi(b)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(phi(a)) * np.linalg.norm(phi(b)) + 1e-300
    assert np.array_equal(phi_inverse(phi(a), a.pairs).data, a.data)


def test_phi_examples():
    rng = np.random.default_rng(2)
    m = rng.standard_normal((3, 4))
    assert np.array_equal(phi(EvenPairedTensor(m)), m)
    assert np.array_equal(phi(u_identity((3, 2))), np.eye(6))
    a = random_paired((2, 2), (3, 3), rng)
    assert phi(a).shape == (4, 9)
    assert np.isclose(np.linalg.norm(phi(a)), a.norm())
    with pytest.raises(ShapeError):
        phi_inverse(np.zeros((4, 5)), [(2, 3), (2, 3)])


def test_u_transpose():
    rng = np.random.default_rng(3)
    s = symmetric_paired((2, 3), rng)
    assert np.allclose(u_transpose(s).data, s.data)
    m = rng.standard_normal((3, 4))
    assert np.array_equal(u_transpose(EvenPairedTensor(m)).data, m.T)
    a = random_paired((2, 3), (4, 2), rng)
    assert np.array_equal(phi(u_transpose(a)), phi(a).T)
    assert np.array_equal(a.T.data, u_transpose(a).data)


def test_u_identity_and_diagonal():
    d = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    dd = u_diagonal(d)
    assert np.array_equal(phi(dd), np.diag(vec(d)))
    assert np.array_equal(u_diagonal(np.ones((3, 2))).data, u_identity((3, 2)).data)


def test_u_inverse():
    i = u_identity((2, 3))
    assert np.allclose(u_inverse(i).data, i.data)
    d = np.array([[2.0, -4.0], [0.5, 8.0]])
    assert np.allclose(u_inverse(u_diagonal(d)).data, u_diagonal(1.0 / d).data)
    rng = np.random.default_rng(4)
    a = phi_inverse(rng.standard_normal((4, 4)) + 4 * np.eye(4), [(2, 2), (2, 2)])
    assert np.allclose(phi(u_inverse(a)), np.linalg.inv(phi(a)))
    with pytest.raises(SingularTensorError):
        u_inverse(u_diagonal(np.array([[1.0, 0.0], [1.0, 1.0]])))


def test_u_power():
    rng = np.random.default_rng(5)
    a = random_paired((2, 2), (2, 2), rng)
    assert np.allclose(phi(u_power(a, 3)), np.linalg.matrix_power(phi(a), 3))
    assert np.allclose(u_power(a, 0).data, u_identity((2, 2)).data)


def test_unfolding_rank_and_det():
    assert unfolding_rank(EvenPairedTensor(np.zeros((2, 2, 3, 3)))) == 0
    assert unfolding_rank(u_identity((3, 2))) == 6
    assert unfolding_det(u_identity((3, 2))) == pytest.approx(1.0)
    d = np.array([[2.0, 3.0], [0.5, -1.0]])
    assert unfolding_det(u_diagonal(d)) == pytest.approx(np.prod(d))
    rng = np.random.default_rng(6)
    a = random_paired((2, 2), (2, 2), rng)
    assert unfolding_det(a) == pytest.approx(np.linalg.det(phi(a)), rel=1e-12)


def test_u_positive_definite():
    assert is_u_positive_definite(u_identity((2, 3)))
    assert not is_u_positive_definite(u_diagonal(np.array([[1.0, -1.0], [2.0, 3.0]])))
    s = tucker_to_einstein(example_tucker_system())
    w = reach_gramian(s, 0, 6)
    assert is_u_positive_definite(w)
    assert np.all(np.linalg.eigvalsh(0.5 * (phi(w) + phi(w).T)) > 0)


def test_m_positive_probe():
    i = u_identity((2, 2))
    assert m_positive_probe(i, trials=50, rng_seed=0) is ProbeOutcome.NOT_FALSIFIED
    neg = EvenPairedTensor(-i.data)
    assert m_positive_probe(neg, trials=1, rng_seed=0) is ProbeOutcome.FALSIFIED
    rng = np.random.default_rng(7)
    for _ in range(5):
        a = symmetric_paired((2, 3), rng, positive_definite=True)
        assert is_u_positive_definite(a)
        assert m_positive_probe(a, trials=200, rng_seed=1) is ProbeOutcome.NOT_FALSIFIED


def test_u_eigen():
    d = np.array([[3.0, -1.0], [0.5, 2.0]])
    vals = sorted(p.value.real for p in u_eigen(u_diagonal(d)))
    assert np.allclose(vals, sorted(d.ravel()))
    rng = np.random.default_rng(8)
    a = random_paired((2, 3), (2, 3), rng)
    for p in u_eigen(a):
        lhs = einstein_apply(a, p.real) + 1j * einstein_apply(a, p.imag)
        assert np.allclose(lhs, p.value * p.tensor, atol=1e-10)
        assert np.isclose(np.linalg.norm(p.tensor), 1.0)


def test_hobg_solve():
    rng = np.random.default_rng(9)
    rhs = rng.standard_normal((2, 3))
    assert np.allclose(hobg_solve(u_identity((2, 3)), rhs), rhs)
    d = rng.uniform(1.0, 3.0, size=(2, 3))
    assert np.allclose(hobg_solve(u_diagonal(d), rhs), rhs / d)
    m = rng.standard_normal((6, 6)) + 8 * np.eye(6)
    a = phi_inverse(m, [(2, 2), (3, 3)])
    x = hobg_solve(a, rhs)
    assert np.allclose(vec(x), np.linalg.solve(m, vec(rhs)), atol=1e-8)


def test_hobg_solve_reports_non_convergence():
    rng = np.random.default_rng(10)
    m = rng.standard_normal((16, 16))
    a = phi_inverse(m, [(4, 4), (4, 4)])
    with pytest.raises(ConvergenceError) as info:
        hobg_solve(a, rng.standard_normal((4, 4)), tol=1e-14, max_iter=2)
    assert info.value.residual > 0


def test_horqi_examples():
    d = np.array([[1.0, 5.0], [2.0, 3.0]])
    x0 = np.zeros((2, 2))
    x0[0, 1] = 1.0
    pair, iters = horqi(u_diagonal(d), x0)
    assert pair.value.real == pytest.approx(5.0)
    assert iters <= 1
    assert np.allclose(np.abs(pair.real), x0)

    rng = np.random.default_rng(11)
    b = random_paired((2, 3), (2, 3), rng)
    a = einstein_compose(b.T, b)
    pair, _ = horqi(a, rng.standard_normal((2, 3)))
    eigs = np.array([p.value for p in u_eigen(a)])
    assert np.min(np.abs(eigs - pair.value)) <= 1e-8


def test_horqi_recovers_planted_eigenpair():
    rng = np.random.default_rng(12)
    v = rng.standard_normal((6, 6)) + 3 * np.eye(6)
    lam = np.array([4.0, 1.0, 0.5, -0.3, 0.2, 0.1])
    m = v @ np.diag(lam) @ np.linalg.inv(v)
    a = phi_inverse(m, [(2, 2), (3, 3)])
    target = v[:, 0] / np.linalg.norm(v[:, 0])
    start = target + 0.05 * rng.standard_normal(6)
    pair, _ = horqi(a, start.reshape((2, 3), order="F"))
    assert pair.value.real == pytest.approx(4.0, abs=1e-8)
    assert abs(abs(vec(pair.real) @ target) - 1.0) < 1e-8
