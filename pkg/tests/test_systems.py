from __future__ import annotations

import warnings
from math import prod

import numpy as np
import pytest
import scipy.linalg

from mlti import (
    Answer,
    EvenPairedTensor,
    FactoredMltiSystem,
    GenCpFactors,
    MltiSystem,
    PoleError,
    PreconditionError,
    Stability,
    TuckerSystem,
    balanced_truncation_baseline,
    compress,
    einstein_apply,
    factored_simulate,
    gen_cpd_to_full,
    hinf_norm,
    hinf_relative_error,
    is_observable,
    is_reachable,
    is_u_positive_definite,
    lyapunov_solve,
    obs_gramian,
    observability_tensor,
    phi,
    phi_inverse,
    reach_gramian,
    reachability_tensor,
    simulate,
    stability_cpd,
    stability_eigen,
    stability_factored,
    stability_hosvd,
    stability_ttd,
    stability_tucker,
    transfer_eval,
    tucker_to_einstein,
    u_diagonal,
    u_identity,
    unfold_to_lti,
)
from mlti.generators import (
    example_tucker_system,
    planted_tt_system,
    random_paired,
    random_system,
    random_tucker_system,
    unreachable_system,
)


@pytest.fixture(scope="module")
def example():
    return tucker_to_einstein(example_tucker_system())


def _zero_like(p):
    return EvenPairedTensor(np.zeros_like(p.data))


# ---------------------------------------------------------------------------
# construction and simulation
# ---------------------------------------------------------------------------


def test_tucker_to_einstein_n1():
    rng = np.random.default_rng(0)
    a, b, c = rng.standard_normal((3, 3)), rng.standard_normal((3, 2)), rng.standard_normal((1, 3))
    s = tucker_to_einstein(TuckerSystem([a], [b], [c]))
    assert np.array_equal(s.a.data, a) and np.array_equal(s.b.data, b) and np.array_equal(s.c.data, c)


def test_tucker_kronecker_identity():
    rng = np.random.default_rng(1)
    ts = random_tucker_system((2, 3), (2, 1), (1, 2), rng)
    s = tucker_to_einstein(ts)
    a1, a2 = ts.a_mats
    assert np.allclose(phi(s.a), np.kron(a2, a1))


def test_example_simulation_matches_tucker_recursion(example):
    ts = example_tucker_system()
    rng = np.random.default_rng(2)
    x = rng.standard_normal((3, 2))
    us = [rng.standard_normal((1, 1)) for _ in range(6)]
    states, outputs = simulate(example, x, us)
    a1, a2 = ts.a_mats
    b1, b2 = ts.b_mats
    c1, c2 = ts.c_mats
    for k in range(6):
        assert np.allclose(states[k], x)
        assert np.allclose(outputs[k], c1 @ x @ c2.T)
        x = a1 @ x @ a2.T + b1 @ us[k] @ b2.T


def test_simulate_trivial_cases():
    rng = np.random.default_rng(3)
    s = MltiSystem(u_identity((2, 3)), random_paired((2, 3), (1, 1), rng), random_paired((1, 1), (2, 3), rng))
    x0 = rng.standard_normal((2, 3))
    states, _ = simulate(s, x0, k=4)
    assert all(np.array_equal(x, x0) for x in states)
    s = random_system((2, 2), (2, 1), (1, 2), rng)
    u0 = rng.standard_normal((2, 1))
    states, _ = simulate(s, x0[:, :2], [u0])
    assert np.allclose(states[1], einstein_apply(s.a, x0[:, :2]) + einstein_apply(s.b, u0))


def test_simulate_matches_unfolded_lti():
    rng = np.random.default_rng(4)
    s = random_system((2, 3), (2, 1), (1, 2), rng)
    af, bf, cf = unfold_to_lti(s)
    x0 = rng.standard_normal((2, 3))
    us = [rng.standard_normal((2, 1)) for _ in range(5)]
    states, outputs = simulate(s, x0, us)
    x = x0.ravel(order="F")
    for k in range(5):
        assert np.allclose(states[k].ravel(order="F"), x)
        assert np.allclose(outputs[k].ravel(order="F"), cf @ x)
        x = af @ x + bf @ us[k].ravel(order="F")


# ---------------------------------------------------------------------------
# transfer function and H-infinity
# ---------------------------------------------------------------------------


def test_transfer_eval_examples(example):
    i = u_identity((2, 2))
    s = MltiSystem(_zero_like(i), i, i)
    z = 0.3 + 2.0j
    assert np.allclose(transfer_eval(s, z), np.eye(4) / z)
    big = transfer_eval(example, 1e8)
    assert np.max(np.abs(big)) < 1e-7
    af, bf, cf = unfold_to_lti(example)
    z = np.exp(0.3j)
    g = cf @ np.linalg.solve(z * np.eye(6) - af, bf)
    assert np.allclose(transfer_eval(example, z), g)


def test_transfer_eval_pole():
    s = MltiSystem(u_diagonal(np.array([[0.5, 0.25]])), u_identity((1, 2)), u_identity((1, 2)))
    with pytest.raises(PoleError):
        transfer_eval(s, 0.5)


def test_hinf_relative_error_examples(example):
    assert hinf_relative_error(example, example) <= 1e-14
    zero = MltiSystem(example.a, _zero_like(example.b), example.c)
    assert hinf_relative_error(example, zero) == pytest.approx(1.0)
    # the peak of a SISO system is its largest frequency-response magnitude
    af, bf, cf = unfold_to_lti(example)
    w = np.linspace(0, np.pi, 4001)
    dense = max(abs((cf @ np.linalg.solve(np.exp(1j * t) * np.eye(6) - af, bf)).item()) for t in w)
    assert hinf_norm(example) == pytest.approx(dense, rel=1e-6)


# ---------------------------------------------------------------------------
# stability criteria
# ---------------------------------------------------------------------------


def _diag_system(d):
    a = u_diagonal(np.asarray(d, dtype=float))
    shape = a.row_shape
    return MltiSystem(a, u_identity(shape), u_identity(shape))


def test_stability_eigen_examples(example):
    assert stability_eigen(_diag_system(0.5 * np.ones((2, 2)))).verdict is Stability.ASYMPTOTICALLY_STABLE
    v = stability_eigen(example)
    assert v.verdict is Stability.ASYMPTOTICALLY_STABLE
    assert v.witness == pytest.approx(0.9207, abs=1e-3)
    assert stability_eigen(_diag_system([[0.5, 1.1]])).verdict is Stability.UNSTABLE
    assert stability_eigen(_diag_system([[1.0, 0.5]])).verdict is Stability.STABLE
    # a unit-circle Jordan block fails the multiplicity check: reported as marginal, not stable
    jordan = phi_inverse(np.array([[1.0, 1.0], [0.0, 1.0]]), [(2, 2)])
    assert stability_eigen(MltiSystem(jordan, u_identity((2,)), u_identity((2,)))).verdict is Stability.STABLE_MARGINAL


def test_stability_hosvd_examples(example):
    rng = np.random.default_rng(5)
    a = random_paired((2, 2), (2, 2), rng)
    a = EvenPairedTensor(a.data * 0.9 / a.norm())
    s = MltiSystem(a, random_paired((2, 2), (1, 1), rng), random_paired((1, 1), (2, 2), rng))
    assert stability_hosvd(s).verdict is Stability.ASYMPTOTICALLY_STABLE
    v = stability_hosvd(example)
    assert v.verdict is not Stability.ASYMPTOTICALLY_STABLE or stability_eigen(example).is_asymptotically_stable
    assert stability_hosvd(_diag_system(np.ones((2, 2)))).verdict is Stability.INCONCLUSIVE


def _orthonormal_cpd(weights, rng):
    r = len(weights)
    q1 = np.linalg.qr(rng.standard_normal((3, 3)))[0][:, :r]
    q2 = np.linalg.qr(rng.standard_normal((3, 3)))[0][:, :r]
    u = rng.standard_normal((2, r))
    v = rng.standard_normal((2, r))
    u /= np.linalg.norm(u, axis=0)
    v /= np.linalg.norm(v, axis=0)
    return GenCpFactors([np.einsum("r,jr,ir->rji", np.asarray(weights), q1, q2), np.einsum("jr,ir->rji", u, v)])


def test_stability_cpd_examples():
    rng = np.random.default_rng(6)
    v = stability_cpd(_orthonormal_cpd([0.8, 0.3], rng))
    assert v.verdict is Stability.ASYMPTOTICALLY_STABLE
    assert v.witness == pytest.approx(0.8)
    assert stability_cpd(_orthonormal_cpd([1.2, 0.3], rng)).verdict is Stability.INCONCLUSIVE
    f = GenCpFactors([rng.standard_normal((2, 3, 3)) * 0.1, rng.standard_normal((2, 2, 2)) * 0.1])
    assert stability_cpd(f).verdict is Stability.INCONCLUSIVE_PRECONDITION


def test_stability_ttd_examples():
    rng = np.random.default_rng(7)
    v = stability_ttd(u_diagonal(0.5 * np.ones((2, 3))))
    assert v.witness == pytest.approx(0.5)
    assert v.verdict is Stability.ASYMPTOTICALLY_STABLE
    a = random_paired((2, 3, 2), (2, 3, 2), rng)
    assert stability_ttd(a).witness == pytest.approx(np.linalg.norm(phi(a), 2), rel=1e-10)
    shear = phi_inverse(np.array([[0.9, 1.2, 0, 0], [0, 0.9, 0, 0], [0, 0, 0.5, 0], [0, 0, 0, 0.5]]), [(2, 2), (2, 2)])
    s = MltiSystem(shear, u_identity((2, 2)), u_identity((2, 2)))
    assert stability_ttd(shear).witness > 1.5
    assert stability_ttd(shear).verdict is Stability.INCONCLUSIVE
    assert stability_eigen(s).verdict is Stability.ASYMPTOTICALLY_STABLE


def test_stability_factored_examples():
    rng = np.random.default_rng(8)
    q1 = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    q2 = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    f = GenCpFactors([0.9 * q1[None], 0.9 * q2[None]])
    v = stability_factored(f)
    assert v.witness == pytest.approx(0.81)
    assert v.verdict is Stability.ASYMPTOTICALLY_STABLE
    assert stability_factored(GenCpFactors([q1[None], q2[None]])).verdict is Stability.STABLE_MARGINAL
    # two terms whose bound is large although the sum is stable
    f = GenCpFactors([np.stack([0.95 * q1, 0.9 * q1]), np.stack([q2, -0.5 * q2])])
    v = stability_factored(f)
    assert v.witness == pytest.approx(0.95 + 0.45)
    assert v.verdict is Stability.INCONCLUSIVE
    s = MltiSystem(gen_cpd_to_full(f), u_identity((3, 2)), u_identity((3, 2)))
    assert stability_eigen(s).verdict is Stability.ASYMPTOTICALLY_STABLE


def test_stability_tucker_examples():
    ts = example_tucker_system()
    v = stability_tucker(ts)
    assert v.verdict is Stability.ASYMPTOTICALLY_STABLE
    assert v.witness == pytest.approx(0.9207, abs=1e-3)
    ones_b, ones_c = [np.ones((2, 1))] * 2, [np.ones((1, 2))] * 2
    bad = TuckerSystem([np.diag([1.2, 0.1]), np.diag([1.0, 0.5])], ones_b, ones_c)
    assert stability_tucker(bad).verdict is Stability.UNSTABLE


def test_stability_tucker_agrees_with_eigen():
    rng = np.random.default_rng(9)
    for _ in range(100):
        ts = random_tucker_system((2, 3), (1, 1), (1, 1), rng, radius=float(rng.uniform(0.5, 1.5)))
        v = stability_tucker(ts)
        e = stability_eigen(tucker_to_einstein(ts))
        assert v.is_asymptotically_stable == e.is_asymptotically_stable
        assert (v.verdict is Stability.UNSTABLE) == (e.verdict is Stability.UNSTABLE)


# ---------------------------------------------------------------------------
# Gramians and Lyapunov
# ---------------------------------------------------------------------------


def test_gramian_examples(example):
    rng = np.random.default_rng(10)
    s = random_system((2, 2), (1, 1), (1, 1), rng)
    zero_b = MltiSystem(s.a, _zero_like(s.b), s.c)
    w = reach_gramian(zero_b, 0, 4)
    assert np.allclose(w.data, 0) and not is_u_positive_definite(w)
    scalar = MltiSystem(EvenPairedTensor(np.array([[0.5]])), EvenPairedTensor(np.array([[1.0]])), EvenPairedTensor(np.array([[1.0]])))
    assert reach_gramian(scalar, 0, 2).data.item() == pytest.approx(1.25)
    assert is_u_positive_definite(reach_gramian(example, 0, 6))
    assert is_u_positive_definite(obs_gramian(example, 0, 6))


def test_lyapunov_examples(example):
    rng = np.random.default_rng(11)
    b = random_paired((2, 2), (2, 1), rng)
    s = MltiSystem(EvenPairedTensor(np.zeros((2, 2, 2, 2))), b, random_paired((1, 1), (2, 2), rng))
    assert np.allclose(phi(lyapunov_solve(s)), phi(b) @ phi(b).T)
    scalar = MltiSystem(EvenPairedTensor(np.array([[0.5]])), EvenPairedTensor(np.array([[1.0]])), EvenPairedTensor(np.array([[1.0]])))
    assert lyapunov_solve(scalar).data.item() == pytest.approx(4.0 / 3.0)
    w = lyapunov_solve(example)
    af, bf, _ = unfold_to_lti(example)
    assert np.linalg.norm(phi(w) - af @ phi(w) @ af.T - bf @ bf.T) <= 1e-10
    assert np.allclose(w.data, reach_gramian(example, 0, 200).data, atol=1e-8)
    wo = lyapunov_solve(example, "obs")
    assert np.allclose(wo.data, obs_gramian(example, 0, 200).data, atol=1e-8)


def test_lyapunov_needs_stability():
    s = _diag_system([[1.2, 0.5]])
    with pytest.raises(PreconditionError):
        lyapunov_solve(s)


def test_lyapunov_against_scipy():
    rng = np.random.default_rng(12)
    s = random_system((3, 3), (1, 2), (2, 1), rng, radius=0.97)
    af, bf, cf = unfold_to_lti(s)
    assert np.allclose(phi(lyapunov_solve(s)), scipy.linalg.solve_discrete_lyapunov(af, bf @ bf.T), atol=1e-9)
    assert np.allclose(phi(lyapunov_solve(s, "obs")), scipy.linalg.solve_discrete_lyapunov(af.T, cf.T @ cf), atol=1e-9)


# ---------------------------------------------------------------------------
# reachability and observability
# ---------------------------------------------------------------------------


def test_reachability_tensor_n1():
    rng = np.random.default_rng(13)
    s = random_system((4,), (2,), (1,), rng)
    a, b = s.a.data, s.b.data
    kalman = np.hstack([np.linalg.matrix_power(a, k) @ b for k in range(4)])
    assert np.allclose(reachability_tensor(s).data, kalman)
    c = s.c.data
    obs = np.vstack([c @ np.linalg.matrix_power(a, k) for k in range(4)])
    assert np.allclose(observability_tensor(s).data, obs)


def test_example_reachability(example):
    for method in ("rank_u", "ttd", "gramian"):
        d = is_reachable(example, method)
        assert d.answer is Answer.YES, method
        d = is_observable(example, method)
        assert d.answer is Answer.YES, method
    assert is_reachable(example, "rank_u").witness == 6
    assert is_reachable(example, "ttd").witness == 6


METHODS = ("rank_u", "ttd", "gramian", "cpd_cert", "mlrank_neg", "hosvd_neg")


def test_zero_input_is_unreachable_by_every_method(example):
    s = MltiSystem(example.a, _zero_like(example.b), example.c)
    for method in METHODS:
        assert is_reachable(s, method).answer is Answer.NO, method
    s = MltiSystem(example.a, example.b, _zero_like(example.c))
    for method in METHODS:
        assert is_observable(s, method).answer is Answer.NO, method


def test_reachable_versus_constructed_unreachable():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        if seed % 2:
            s = unreachable_system((2, 3), (1, 1), (1, 1), int(rng.integers(1, 6)), rng)
            expect = Answer.NO
        else:
            s = random_system((2, 3), (2, 1), (1, 1), rng)
            expect = Answer.YES
        assert is_reachable(s, "rank_u").answer is expect
        assert is_reachable(s, "ttd").answer is expect


def test_observability_duality():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        if seed % 3 == 0:
            s = unreachable_system((2, 2), (1, 1), (1, 1), 2, rng).transposed()
        else:
            s = random_system((2, 2), (1, 1), (1, 2), rng)
        assert is_observable(s).answer is is_reachable(s.transposed()).answer


def test_negative_tests_are_one_sided():
    rng = np.random.default_rng(14)
    s = random_system((2, 3), (1, 2), (1, 1), rng)
    for method in ("mlrank_neg", "hosvd_neg", "cpd_cert"):
        assert is_reachable(s, method).answer in (Answer.INCONCLUSIVE, Answer.YES)


# ---------------------------------------------------------------------------
# compression and factored systems
# ---------------------------------------------------------------------------


def test_compress_exact_ttd():
    rng = np.random.default_rng(15)
    s = random_system((2, 3), (2, 1), (1, 2), rng)
    f = compress(s, "ttd")
    assert f.hinf_error <= 1e-10
    expect = sum(t.parameter_count() for t in (f.a, f.b, f.c))
    assert f.parameter_count() == expect
    assert np.allclose(f.to_system().a.data, s.a.data)


def test_compress_tucker_system_to_rank_one():
    ts = example_tucker_system()
    s = tucker_to_einstein(ts)
    f = compress(s, "cpd", ranks=(1, 1, 1))
    assert f.format == "cpd" and tuple(f.ranks) == (1, 1, 1)
    assert f.hinf_error <= 1e-10
    assert f.parameter_count() == sum(m.size for m in ts.a_mats + ts.b_mats + ts.c_mats)
    assert stability_tucker(f).witness == pytest.approx(0.9207, abs=1e-3)


def test_factored_simulate_matches_full(example):
    f = compress(example, "cpd", ranks=(1, 1, 1))
    rng = np.random.default_rng(16)
    x0 = rng.standard_normal((3, 2))
    us = [rng.standard_normal((1, 1)) for _ in range(10)]
    fs, fo = factored_simulate(f, x0, us)
    ss, so = simulate(example, x0, us)
    for a, b in zip(fs + fo, ss + so):
        assert np.allclose(a, b, atol=1e-10)


def test_factored_simulate_rank_two_expansion():
    rng = np.random.default_rng(17)
    a = GenCpFactors([0.4 * rng.standard_normal((2, 2, 2)), 0.4 * rng.standard_normal((2, 3, 3))])
    b = GenCpFactors([rng.standard_normal((1, 2, 1)), rng.standard_normal((1, 3, 1))])
    c = GenCpFactors([rng.standard_normal((1, 1, 2)), rng.standard_normal((1, 1, 3))])
    f = FactoredMltiSystem(a, b, c)
    x0 = rng.standard_normal((2, 3))
    states, _ = factored_simulate(f, x0, k=2)
    # A^2 expands into four Kronecker terms
    a1, a2 = a.components
    x2 = sum((a1[r] @ a1[q]) @ x0 @ (a2[r] @ a2[q]).T for r in range(2) for q in range(2))
    assert np.allclose(states[2], x2)
    full_states, _ = simulate(f.to_system(), x0, k=2)
    assert np.allclose(states[2], full_states[2])


def test_unfold_factored_matches_dense():
    rng = np.random.default_rng(18)
    s = planted_tt_system((2, 3), (1, 2), (2, 1), (2,), rng)
    f = compress(s, "ttd", evaluate=False)
    for x, y in zip(unfold_to_lti(f), unfold_to_lti(s)):
        assert np.allclose(x, y)


def test_balanced_truncation(example):
    bt = balanced_truncation_baseline(example, 6)
    assert bt.hinf_error <= 1e-10
    hsv = bt.hankel_singular_values
    assert np.all(np.diff(hsv) <= 1e-14)
    errors = [balanced_truncation_baseline(example, k).hinf_error for k in (1, 3, 5)]
    assert errors[0] > errors[2]
    # the error respects the twice-the-tail bound
    for k, err in zip((1, 3, 5), errors):
        assert err * hinf_norm(example) <= 2 * np.sum(hsv[k:]) * (1 + 1e-6)
