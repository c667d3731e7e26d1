"""Tensor decompositions and rank machinery.

Covers the higher-order SVD, CP decomposition by alternating least squares,
the tensor-train SVD with orthonormalization sweeps, and the generalized
CP/TT formats of even-order paired tensors in which each factor is a stack of
``Jn x In`` slices.  Einstein products can be formed directly in the factored
formats.

All reshapes follow the ivec convention (first index fastest), so a paired
tensor ``(J1, I1, ..., JN, IN)`` reshapes to ``(J1 I1, ..., JN IN)`` with the
row index ``jn`` running fastest inside each merged mode.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations
from math import prod, sqrt
from typing import Sequence

import numpy as np

from .einstein import EvenPairedTensor, _ensure
from .errors import CapabilityError, ShapeError
from .tensor_core import (
    RANK_TOL,
    _count_above,
    as_tensor,
    n_mode_matricize,
    numerical_rank,
    tucker_product,
)

__all__ = [
    "HosvdResult",
    "CpFactors",
    "TtCores",
    "GenCpFactors",
    "GenTtCores",
    "hosvd",
    "multilinear_ranks",
    "khatri_rao",
    "cp_to_full",
    "cp_als",
    "estimate_cp_rank",
    "tt_svd",
    "tt_to_full",
    "tt_left_orthonormalize",
    "tt_right_orthonormalize",
    "generalized_cpd",
    "gen_cpd_to_full",
    "generalized_ttd",
    "gen_ttd_to_full",
    "gen_ttd_apply",
    "einstein_compose_cpd",
    "einstein_compose_ttd",
    "ttd_permuted",
    "unfolding_rank_via_ttd",
    "k_rank",
    "cpd_rank_certificate",
]


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass
class HosvdResult:
    """``x = core x1 U1 ... xN UN`` with orthogonal ``Un``.

    ``singular_values[n]`` holds the ``Jn`` mode-``n`` singular values
    (zero-padded when the unfolding has fewer rows than columns would allow).
    """

    core: np.ndarray
    factors: list[np.ndarray]
    singular_values: list[np.ndarray]

    def to_full(self) -> np.ndarray:
        return tucker_product(self.core, self.factors)


@dataclass
class CpFactors:
    """Sum of ``R`` weighted rank-one terms with unit-norm factor columns."""

    weights: np.ndarray
    factors: list[np.ndarray]
    fit: float = float("nan")

    @property
    def rank(self) -> int:
        return int(self.weights.size)

    def to_full(self) -> np.ndarray:
        return cp_to_full(self.weights, self.factors)


@dataclass
class TtCores:
    """Tensor train with cores of shape ``(R_{n-1}, Jn, Rn)``, ``R0 = RN = 1``."""

    cores: list[np.ndarray]

    def __post_init__(self):
        _check_chain([c.shape[0] for c in self.cores], [c.shape[-1] for c in self.cores])

    @property
    def ranks(self) -> tuple[int, ...]:
        return (1,) + tuple(int(c.shape[-1]) for c in self.cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(c.shape[1]) for c in self.cores)

    def to_full(self) -> np.ndarray:
        return tt_to_full(self)

    def parameter_count(self) -> int:
        return sum(c.size for c in self.cores)


@dataclass
class GenCpFactors:
    """Generalized CPD ``sum_r A1[r] o A2[r] o ... o AN[r]`` of a paired tensor.

    ``components[n]`` has shape ``(R, Jn, In)``.
    """

    components: list[np.ndarray]
    fit: float = float("nan")

    def __post_init__(self):
        ranks = {c.shape[0] for c in self.components}
        if len(ranks) != 1 or any(c.ndim != 3 for c in self.components):
            raise ShapeError("components must all have shape (R, Jn, In) with a common R")

    @property
    def kronecker_rank(self) -> int:
        return int(self.components[0].shape[0])

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((int(c.shape[1]), int(c.shape[2])) for c in self.components)

    def to_full(self) -> EvenPairedTensor:
        return gen_cpd_to_full(self)

    def parameter_count(self) -> int:
        return sum(c.size for c in self.components)


@dataclass
class GenTtCores:
    """Generalized TTD with cores of shape ``(R_{n-1}, Jn, In, Rn)``."""

    cores: list[np.ndarray]

    def __post_init__(self):
        if any(c.ndim != 4 for c in self.cores):
            raise ShapeError("generalized TT cores must be order-4")
        _check_chain([c.shape[0] for c in self.cores], [c.shape[-1] for c in self.cores])

    @property
    def ranks(self) -> tuple[int, ...]:
        return (1,) + tuple(int(c.shape[-1]) for c in self.cores)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((int(c.shape[1]), int(c.shape[2])) for c in self.cores)

    def to_full(self) -> EvenPairedTensor:
        return gen_ttd_to_full(self)

    def parameter_count(self) -> int:
        return sum(c.size for c in self.cores)


def _check_chain(lefts, rights):
    if not lefts:
        raise ShapeError("need at least one core")
    if lefts[0] != 1 or rights[-1] != 1:
        raise ShapeError("boundary TT-ranks must be 1")
    for k in range(len(lefts) - 1):
        if rights[k] != lefts[k + 1]:
            raise ShapeError(f"TT-rank mismatch between cores {k + 1} and {k + 2}")


# ---------------------------------------------------------------------------
# HOSVD and multilinear ranks
# ---------------------------------------------------------------------------


def _fix_signs(u: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    if u.size == 0:
        return u
    idx = np.argmax(np.abs(u), axis=0)
    s = np.sign(u[idx, np.arange(u.shape[1])])
    s[s == 0] = 1.0
    return u * s


def hosvd(x) -> HosvdResult:
    """Higher-order SVD with full (square) orthogonal factors."""
    x = as_tensor(x)
    factors, svals = [], []
    for n in range(1, x.ndim + 1):
        m = n_mode_matricize(x, n)
        u, s, _ = np.linalg.svd(m, full_matrices=True)
        factors.append(_fix_signs(u))
        g = np.zeros(m.shape[0])
        g[: s.size] = s
        svals.append(g)
    core = tucker_product(x, [u.T for u in factors])
    return HosvdResult(core, factors, svals)


def multilinear_ranks(x, tol: float = RANK_TOL) -> list[int]:
    """Numerical rank of every mode-``n`` matricization."""
    x = as_tensor(x)
    return [numerical_rank(n_mode_matricize(x, n), tol) for n in range(1, x.ndim + 1)]


# ---------------------------------------------------------------------------
# CP decomposition
# ---------------------------------------------------------------------------


def khatri_rao(a, b) -> np.ndarray:
    """Columnwise Kronecker product ``[a1 (x) b1, ..., aR (x) bR]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def _kr_chain(mats: Sequence[np.ndarray]) -> np.ndarray:
    """``mats[-1] ⊙ ... ⊙ mats[0]``, so the first matrix's row index runs fastest."""
    out = mats[0]
    for m in mats[1:]:
        out = khatri_rao(m, out)
    return out


def cp_to_full(weights, factors: Sequence) -> np.ndarray:
    """Dense tensor ``sum_r weights[r] a1_r o ... o aN_r``."""
    factors = [np.asarray(f, dtype=float) for f in factors]
    w = np.asarray(weights, dtype=float)
    shape = tuple(f.shape[0] for f in factors)
    if len(factors) == 1:
        return factors[0] @ w
    rest = _kr_chain(factors[1:])
    mat = (factors[0] * w) @ rest.T
    return mat.reshape(shape, order="F")


def _fit(x, xnorm, weights, factors):
    if xnorm == 0.0:
        return 1.0 if not np.any(weights) else 0.0
    return 1.0 - float(np.linalg.norm((x - cp_to_full(weights, factors)).ravel())) / xnorm


def _normalize(factors, weights=None):
    r = factors[0].shape[1]
    w = np.ones(r) if weights is None else weights.copy()
    out = []
    for f in factors:
        nrm = np.linalg.norm(f, axis=0)
        safe = np.where(nrm > 0, nrm, 1.0)
        out.append(f / safe)
        w = w * nrm
    return w, out


def _als_run(x, unfoldings, rank, rng, max_iter, fit_tol):
    n_modes = x.ndim
    xnorm = float(np.linalg.norm(x.ravel()))
    factors = [rng.standard_normal((j, rank)) for j in x.shape]
    weights = np.ones(rank)
    fit_old = -np.inf
    fit = -np.inf
    for _ in range(max_iter):
        for n in range(n_modes):
            others = [factors[m] for m in range(n_modes) if m != n]
            gram = np.ones((rank, rank))
            for f in others:
                gram *= f.T @ f
            mttkrp = unfoldings[n] @ _kr_chain(others)
            factors[n] = np.linalg.lstsq(gram, mttkrp.T, rcond=None)[0].T
            # keep the other factors unit-norm so the scale lives in factor n
            nrm = np.linalg.norm(factors[n], axis=0)
            weights = nrm
            factors[n] = factors[n] / np.where(nrm > 0, nrm, 1.0)
        fit = _fit(x, xnorm, weights, factors)
        if 1.0 - fit <= 1e-14 or abs(fit - fit_old) < fit_tol * 1e-3:
            break
        fit_old = fit
    return weights, factors, fit


def cp_als(
    x,
    rank: int,
    max_iter: int = 500,
    fit_tol: float = 1e-8,
    restarts: int = 4,
    seed: int = 0,
) -> CpFactors:
    """Rank-``rank`` CP decomposition by alternating least squares.

    Each restart ``k`` starts from unit-normal factors drawn from
    ``default_rng([seed, k])``; the restart with the best fit
    ``1 - ||x - x_hat|| / ||x||`` wins (ties go to the lower index).  Weights are
    positive and sorted in descending order, factor columns have unit norm.
    """
    x = as_tensor(x)
    rank = int(rank)
    if rank < 1:
        raise ValueError("CP rank must be at least 1")
    dims = sorted(x.shape, reverse=True)
    if x.ndim >= 2 and rank > dims[0] * dims[1]:
        warnings.warn(
            f"CP rank {rank} exceeds the product of the two largest extents",
            stacklevel=2,
        )
    if x.ndim == 1:
        nrm = float(np.linalg.norm(x))
        f = x / nrm if nrm > 0 else x.copy()
        w = np.zeros(rank)
        w[0] = nrm
        fac = np.zeros((x.size, rank))
        fac[:, 0] = f
        return CpFactors(w, [fac], 1.0)
    unfoldings = [n_mode_matricize(x, n) for n in range(1, x.ndim + 1)]
    best = None
    for k in range(max(1, int(restarts))):
        rng = np.random.default_rng([int(seed), k])
        w, fac, fit = _als_run(x, unfoldings, rank, rng, int(max_iter), fit_tol)
        if best is None or fit > best[2]:
            best = (w, fac, fit)
        if fit >= 1.0 - 1e-14:
            break
    w, fac, fit = best
    w, fac = _normalize(fac, w)
    # absorb signs into the first factor so that all weights are nonnegative
    sgn = np.where(w < 0, -1.0, 1.0)
    fac[0] = fac[0] * sgn
    w = np.abs(w)
    order = np.argsort(-w, kind="stable")
    return CpFactors(w[order], [f[:, order] for f in fac], fit)


def estimate_cp_rank(
    x,
    fit_target: float = 1.0 - 1e-8,
    max_rank: int | None = None,
    **opts,
) -> tuple[int, CpFactors]:
    """Smallest rank whose CP-ALS fit reaches ``fit_target``.

    Doubling search followed by bisection.  This is an estimate, not a
    certificate: ALS can miss the global optimum.  ``max_rank`` defaults to
    the product of all extents but the largest (an upper bound on CP rank).
    """
    x = as_tensor(x)
    if max_rank is None:
        dims = sorted(x.shape)
        max_rank = max(1, prod(dims[:-1]))
    if not np.any(x):
        return 0, CpFactors(np.zeros(0), [np.zeros((j, 0)) for j in x.shape], 1.0)
    cache: dict[int, CpFactors] = {}

    def run(r):
        if r not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cache[r] = cp_als(x, r, **opts)
        return cache[r]

    lo, hi = 0, 1
    while run(hi).fit < fit_target:
        if hi >= max_rank:
            return hi, run(hi)
        lo, hi = hi, min(2 * hi, max_rank)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if run(mid).fit >= fit_target:
            hi = mid
        else:
            lo = mid
    return hi, run(hi)


# ---------------------------------------------------------------------------
# tensor train
# ---------------------------------------------------------------------------


def tt_svd(x, eps: float | None = None, exact: bool | None = None, tol: float = RANK_TOL) -> TtCores:
    """TT-SVD by sequential truncated SVDs of reshapes.

    With ``eps`` the reconstruction satisfies ``||x - x_hat|| <= eps ||x||``
    (per-step threshold ``eps ||x|| / sqrt(N - 1)``).  In exact mode
    (``eps`` omitted or ``exact=True``) a singular value is kept when it exceeds
    ``tol * sigma_max * max(prod(J[:n]), prod(J[n:]))``, so each TT-rank equals
    the numerical rank of the corresponding reshape of ``x``.
    """
    x = as_tensor(x)
    if exact is None:
        exact = eps is None
    if not exact and (eps is None or eps < 0):
        raise ValueError("eps must be a nonnegative relative accuracy")
    shape = x.shape
    n_modes = len(shape)
    if n_modes == 1:
        return TtCores([x.reshape(1, shape[0], 1).copy()])
    delta = 0.0 if exact else eps * float(np.linalg.norm(x.ravel())) / sqrt(n_modes - 1)
    cores = []
    c = x.reshape(-1, order="F")
    r_prev = 1
    for n in range(n_modes - 1):
        m = c.reshape(r_prev * shape[n], prod(shape[n + 1 :]), order="F")
        if m.size == 0 or r_prev == 0:
            u = np.zeros((m.shape[0], 0))
            r = 0
            c = np.zeros((0, m.shape[1]))
        else:
            u, s, vt = np.linalg.svd(m, full_matrices=False)
            if exact:
                r = _count_above(s, tol, max(prod(shape[: n + 1]), prod(shape[n + 1 :])))
            else:
                tail = np.sqrt(np.cumsum((s**2)[::-1]))[::-1]  # tail[k] = ||s[k:]||
                r = int(np.count_nonzero(tail > delta))
                if s.size and s[0] > 0:
                    r = max(r, 1)
            u = u[:, :r]
            c = s[:r, None] * vt[:r]
        cores.append(u.reshape(r_prev, shape[n], r, order="F"))
        r_prev = r
    cores.append(c.reshape(r_prev, shape[-1], 1, order="F"))
    return TtCores(cores)


def tt_to_full(t: TtCores) -> np.ndarray:
    cores = t.cores
    res = cores[0]
    for c in cores[1:]:
        res = np.tensordot(res, c, axes=(-1, 0))
    return res.reshape(res.shape[1:-1])


def _qr_pos(m):
    q, r = np.linalg.qr(m)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s, s[:, None] * r


def tt_left_orthonormalize(t: TtCores, upto: int | None = None) -> TtCores:
    """Make cores ``1..upto`` left-orthonormal by a QR sweep (1-based, default ``N-1``)."""
    cores = [c.copy() for c in t.cores]
    n_modes = len(cores)
    upto = n_modes - 1 if upto is None else int(upto)
    if not 0 <= upto <= n_modes - 1:
        raise ShapeError(f"upto must lie in 0..{n_modes - 1}")
    for n in range(upto):
        r0, j, r1 = cores[n].shape
        q, r = _qr_pos(cores[n].reshape(r0 * j, r1, order="F"))
        cores[n] = q.reshape(r0, j, q.shape[1], order="F")
        cores[n + 1] = np.tensordot(r, cores[n + 1], axes=(1, 0))
    return TtCores(cores)


def tt_right_orthonormalize(t: TtCores, downto: int | None = None) -> TtCores:
    """Make cores ``downto..N`` right-orthonormal by an LQ sweep (1-based, default 2)."""
    cores = [c.copy() for c in t.cores]
    n_modes = len(cores)
    downto = 2 if downto is None else int(downto)
    if not 2 <= downto <= n_modes + 1:
        raise ShapeError(f"downto must lie in 2..{n_modes + 1}")
    for n in range(n_modes - 1, downto - 2, -1):
        r0, j, r1 = cores[n].shape
        q, r = _qr_pos(cores[n].reshape(r0, j * r1, order="F").T)
        cores[n] = q.T.reshape(q.shape[1], j, r1, order="F")
        cores[n - 1] = np.tensordot(cores[n - 1], r.T, axes=(-1, 0))
    return TtCores(cores)


# ---------------------------------------------------------------------------
# generalized formats for paired tensors
# ---------------------------------------------------------------------------


def _merged(a: EvenPairedTensor) -> np.ndarray:
    return a.data.reshape([j * i for j, i in a.pairs], order="F")


def generalized_cpd(a, rank: int, **opts) -> GenCpFactors:
    """Kronecker-rank-``rank`` decomposition ``sum_r A1[r] o ... o AN[r]``.

    Runs :func:`cp_als` on the ``(J1 I1, ..., JN IN)`` reshape and folds each
    factor column back into a ``Jn x In`` slice scaled by ``weight**(1/N)``.
    """
    a = _ensure(a)
    cp = cp_als(_merged(a), rank, **opts)
    n = a.order
    scale = cp.weights ** (1.0 / n)
    comps = []
    for (j, i), f in zip(a.pairs, cp.factors):
        comps.append((f * scale).T.reshape(-1, j, i, order="F"))
    return GenCpFactors(comps, cp.fit)


def gen_cpd_to_full(f: GenCpFactors) -> EvenPairedTensor:
    pairs = f.pairs
    r = f.kronecker_rank
    mats = [c.reshape(r, -1, order="F").T for c in f.components]
    full = cp_to_full(np.ones(r), mats)
    return EvenPairedTensor(full.reshape([d for p in pairs for d in p], order="F"))


def generalized_ttd(a, eps: float | None = None, exact: bool | None = None, tol: float = RANK_TOL) -> GenTtCores:
    """Generalized TTD: TT-SVD of the ``(J1 I1, ..., JN IN)`` reshape, folded back."""
    a = _ensure(a)
    tt = tt_svd(_merged(a), eps=eps, exact=exact, tol=tol)
    cores = [
        c.reshape(c.shape[0], j, i, c.shape[2], order="F") for c, (j, i) in zip(tt.cores, a.pairs)
    ]
    return GenTtCores(cores)


def gen_ttd_to_full(t: GenTtCores) -> EvenPairedTensor:
    flat = TtCores([c.reshape(c.shape[0], -1, c.shape[3], order="F") for c in t.cores])
    full = tt_to_full(flat)
    return EvenPairedTensor(full.reshape([d for p in t.pairs for d in p], order="F"))


def gen_ttd_apply(t: GenTtCores, x) -> np.ndarray:
    """Einstein product ``a * x`` with ``a`` in generalized TT format (no reconstruction)."""
    x = np.asarray(x, dtype=float)
    pairs = t.pairs
    if x.shape != tuple(i for _, i in pairs):
        raise ShapeError(f"operand shape {x.shape} does not match column shape")
    res = x[None, ...]
    for n, core in enumerate(t.cores, start=1):
        y = np.tensordot(res, core, axes=([0, n], [0, 2]))
        res = np.moveaxis(y, [-1, -2], [0, n])
    return res[0]


def einstein_compose_cpd(a: GenCpFactors, b: GenCpFactors) -> GenCpFactors:
    """``a * b`` in generalized CP format; slice ``t = r + R s`` is ``A[r] @ B[s]``."""
    if len(a.components) != len(b.components):
        raise ShapeError("operands have different numbers of pairs")
    comps = []
    for ca, cb in zip(a.components, b.components):
        if ca.shape[2] != cb.shape[1]:
            raise ShapeError(f"slice shapes {ca.shape[1:]} and {cb.shape[1:]} not conformable")
        e = np.einsum("rji,sik->srjk", ca, cb)
        comps.append(e.reshape(-1, ca.shape[1], cb.shape[2]))
    return GenCpFactors(comps)


def einstein_compose_ttd(a: GenTtCores, b: GenTtCores) -> GenTtCores:
    """``a * b`` in generalized TT format; TT-ranks multiply core by core."""
    if len(a.cores) != len(b.cores):
        raise ShapeError("operands have different numbers of pairs")
    cores = []
    for ca, cb in zip(a.cores, b.cores):
        if ca.shape[2] != cb.shape[1]:
            raise ShapeError(f"core slices {ca.shape[1:3]} and {cb.shape[1:3]} not conformable")
        e = np.einsum("ajib,cikd->acjkbd", ca, cb)
        s = e.shape
        cores.append(e.reshape(s[0] * s[1], s[2], s[3], s[4] * s[5]))
    return GenTtCores(cores)


def ttd_permuted(a, eps: float | None = None, exact: bool | None = None, tol: float = RANK_TOL) -> TtCores:
    """TT-SVD of the mode permutation ``(J1, ..., JN, I1, ..., IN)`` of a paired tensor.

    The ``N``-th TT-rank of the result equals the unfolding rank of ``a``.
    The permutation is done on the reconstructed dense tensor.
    """
    if isinstance(a, GenTtCores):
        a = gen_ttd_to_full(a)
    elif isinstance(a, GenCpFactors):
        a = gen_cpd_to_full(a)
    a = _ensure(a)
    n = a.order
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return tt_svd(np.transpose(a.data, perm), eps=eps, exact=exact, tol=tol)


def unfolding_rank_via_ttd(a, tol: float = RANK_TOL) -> int:
    """Unfolding rank read off as the middle TT-rank of :func:`ttd_permuted`."""
    if isinstance(a, (GenTtCores, GenCpFactors)):
        n = len(a.pairs)
    else:
        n = _ensure(a).order
    return ttd_permuted(a, exact=True, tol=tol).ranks[n]


# ---------------------------------------------------------------------------
# k-rank and the CPD certificate
# ---------------------------------------------------------------------------


def k_rank(a, tol: float = RANK_TOL, max_cols: int = 20) -> int:
    """Largest ``k`` such that every set of ``k`` columns is linearly independent."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeError("k_rank expects a matrix")
    ncols = a.shape[1]
    if ncols > max_cols:
        raise CapabilityError(f"k_rank enumerates column subsets; {ncols} > {max_cols} columns")
    k = 0
    for size in range(1, min(a.shape) + 1):
        if all(numerical_rank(a[:, list(c)], tol) == size for c in combinations(range(ncols), size)):
            k = size
        else:
            break
    return k


def _rank_one_split(slices, tol):
    """Split ``(R, J, I)`` slices into ``u`` (J x R) and ``v`` (I x R), or ``None``."""
    us, vs = [], []
    for m in slices:
        u, s, vt = np.linalg.svd(m)
        if s[0] == 0.0 or _count_above(s, tol, max(m.shape)) != 1:
            return None
        us.append(u[:, 0] * s[0])
        vs.append(vt[0])
    return np.array(us).T, np.array(vs).T


def cpd_rank_certificate(f, tol: float = RANK_TOL, max_cols: int = 20) -> int | None:
    """Certify ``rank_U = R`` from k-ranks of a CP factorization, or return ``None``.

    Accepts a :class:`CpFactors` of an order-``2N`` paired tensor or a
    :class:`GenCpFactors`.  The certificate holds when both the row-mode
    (odd) and column-mode (even) factor k-ranks sum to at least ``R + N - 1``
    with every k-rank positive.  The condition is sufficient only; failing it
    yields ``None`` (inconclusive).  Generalized factors are usable only when
    every slice has rank one, since only then do they define an order-``2N``
    CP factorization.
    """
    if isinstance(f, GenCpFactors):
        odd, even = [], []
        for c in f.components:
            split = _rank_one_split(c, tol)
            if split is None:
                return None
            odd.append(split[0])
            even.append(split[1])
        r = f.kronecker_rank
    elif isinstance(f, CpFactors):
        if len(f.factors) % 2:
            raise ShapeError("CP factors must describe an even-order paired tensor")
        if np.any(f.weights == 0):
            return None
        odd, even = list(f.factors[0::2]), list(f.factors[1::2])
        r = f.rank
    else:
        raise TypeError("expected CpFactors or GenCpFactors")
    n = len(odd)
    k_odd = [k_rank(m, tol, max_cols) for m in odd]
    k_even = [k_rank(m, tol, max_cols) for m in even]
    if min(k_odd + k_even) < 1:
        return None
    if sum(k_odd) >= r + n - 1 and sum(k_even) >= r + n - 1:
        return r
    return None
