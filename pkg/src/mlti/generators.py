"""Seeded random MLTI systems for tests, demos and benchmarks.

"Sparse" tensors are dense arrays whose entries are ``Bernoulli(fill) *
Normal(0, 1)``.  Stable instances are obtained by rescaling ``A`` so that the
spectral radius of ``phi(A)`` equals ``radius``; rescaling does not change any
rank of ``A``.
"""
from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from .decomp import GenTtCores, gen_ttd_to_full
from .einstein import EvenPairedTensor, phi, phi_inverse
from .systems import MltiSystem, TuckerSystem

__all__ = [
    "example_tucker_system",
    "random_paired",
    "random_system",
    "random_tucker_system",
    "random_gen_tt",
    "planted_tt_system",
    "unreachable_system",
    "symmetric_paired",
]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def example_tucker_system() -> TuckerSystem:
    """Small SISO Tucker system with state shape ``3 x 2``.

    Its spectral-radius product is about 0.9207 and it is reachable and
    observable (both rank tensors have unfolding rank 6).
    """
    a1 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.2, 0.5, 0.8]])
    a2 = np.array([[0.0, 1.0], [0.5, 0.0]])
    b1 = np.array([[0.0], [0.0], [1.0]])
    b2 = np.array([[0.0], [1.0]])
    c1 = np.array([[1.0, 0.0, 0.0]])
    c2 = np.array([[1.0, 0.0]])
    return TuckerSystem([a1, a2], [b1, b2], [c1, c2])


def random_paired(rows: Sequence[int], cols: Sequence[int], seed=None, fill: float = 1.0) -> EvenPairedTensor:
    """Random paired tensor of shape ``(J1, I1, ..., JN, IN)`` with the given fill fraction."""
    rng = _rng(seed)
    shape = [d for pair in zip(rows, cols) for d in pair]
    data = rng.standard_normal(shape)
    if fill < 1.0:
        data = data * (rng.random(shape) < fill)
    return EvenPairedTensor(data)


def _rescale(a: EvenPairedTensor, radius: float) -> EvenPairedTensor:
    rho = float(np.max(np.abs(np.linalg.eigvals(phi(a)))))
    if rho == 0.0:
        return a
    return EvenPairedTensor(a.data * (radius / rho))


def random_system(
    state: Sequence[int],
    inputs: Sequence[int],
    outputs: Sequence[int],
    seed=None,
    fill: float = 1.0,
    radius: float | None = 0.9,
) -> MltiSystem:
    """Random dense (or Bernoulli-sparse) system.

    ``radius`` sets the spectral radius of ``phi(A)``; ``None`` leaves ``A``
    unscaled.
    """
    rng = _rng(seed)
    a = random_paired(state, state, rng, fill)
    if radius is not None:
        a = _rescale(a, radius)
    b = random_paired(state, inputs, rng, fill)
    c = random_paired(outputs, state, rng, fill)
    return MltiSystem(a, b, c)


def random_tucker_system(
    state: Sequence[int],
    inputs: Sequence[int],
    outputs: Sequence[int],
    seed=None,
    radius: float | None = 0.9,
) -> TuckerSystem:
    """Random Tucker system; ``radius`` is the product of the per-mode spectral radii."""
    rng = _rng(seed)
    a_mats = [rng.standard_normal((j, j)) for j in state]
    if radius is not None:
        rhos = [float(np.max(np.abs(np.linalg.eigvals(m)))) for m in a_mats]
        per = radius ** (1.0 / len(a_mats))
        a_mats = [m * (per / r) if r > 0 else m for m, r in zip(a_mats, rhos)]
    b_mats = [rng.standard_normal((j, k)) for j, k in zip(state, inputs)]
    c_mats = [rng.standard_normal((i, j)) for i, j in zip(outputs, state)]
    return TuckerSystem(a_mats, b_mats, c_mats)


def random_gen_tt(rows: Sequence[int], cols: Sequence[int], ranks: Sequence[int], seed=None, fill: float = 1.0) -> GenTtCores:
    """Random generalized TT cores with inner TT-ranks ``ranks`` (length ``N - 1``)."""
    rng = _rng(seed)
    r = [1, *[int(x) for x in ranks], 1]
    if len(r) != len(rows) + 1:
        raise ValueError(f"need {len(rows) - 1} inner ranks")
    cores = []
    for n, (j, i) in enumerate(zip(rows, cols)):
        shape = (r[n], j, i, r[n + 1])
        core = rng.standard_normal(shape)
        if fill < 1.0:
            core = core * (rng.random(shape) < fill)
        cores.append(core)
    return GenTtCores(cores)


def planted_tt_system(
    state: Sequence[int],
    inputs: Sequence[int],
    outputs: Sequence[int],
    ranks: Sequence[int],
    seed=None,
    radius: float = 0.9,
) -> MltiSystem:
    """System whose ``A``, ``B``, ``C`` have generalized TT-ranks at most ``ranks``.

    Generic random cores attain the planted ranks whenever they are
    compatible with the extents.
    """
    rng = _rng(seed)
    a = _rescale(gen_ttd_to_full(random_gen_tt(state, state, ranks, rng)), radius)
    b = gen_ttd_to_full(random_gen_tt(state, inputs, ranks, rng))
    c = gen_ttd_to_full(random_gen_tt(outputs, state, ranks, rng))
    return MltiSystem(a, b, c)


def unreachable_system(
    state: Sequence[int],
    inputs: Sequence[int],
    outputs: Sequence[int],
    reachable_dim: int,
    seed=None,
    radius: float = 0.9,
) -> MltiSystem:
    """Stable system whose reachable subspace has dimension ``reachable_dim < prod(state)``.

    ``phi(A)`` is block upper triangular and ``phi(B)`` vanishes outside the
    leading block, both conjugated by a random orthogonal matrix.
    """
    rng = _rng(seed)
    n, m = prod(state), prod(inputs)
    if not 0 <= reachable_dim < n:
        raise ValueError("reachable_dim must be smaller than the state dimension")
    a = rng.standard_normal((n, n))
    a[reachable_dim:, :reachable_dim] = 0.0
    b = np.zeros((n, m))
    b[:reachable_dim] = rng.standard_normal((reachable_dim, m))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q @ a @ q.T
    a *= radius / float(np.max(np.abs(np.linalg.eigvals(a))))
    b = q @ b
    c = rng.standard_normal((prod(outputs), n))
    return MltiSystem(
        phi_inverse(a, list(zip(state, state))),
        phi_inverse(b, list(zip(state, inputs))),
        phi_inverse(c, list(zip(outputs, state))),
    )


def symmetric_paired(state: Sequence[int], seed=None, positive_definite: bool = False) -> EvenPairedTensor:
    """Weakly symmetric square paired tensor (``phi`` image symmetric)."""
    rng = _rng(seed)
    n = prod(state)
    g = rng.standard_normal((n, n))
    m = g @ g.T + n * np.eye(n) if positive_definite else 0.5 * (g + g.T)
    return phi_inverse(m, list(zip(state, state)))
