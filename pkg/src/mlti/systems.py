"""Multilinear time-invariant (MLTI) systems.

A discrete-time MLTI system evolves a tensor state through the Einstein
product::

    X[t+1] = A * X[t] + B * U[t],     Y[t] = C * X[t]

with ``A`` square on the state shape ``J``, ``B`` of paired shape ``(J, K)``
and ``C`` of paired shape ``(I, J)``.  Unfolding every tensor with ``phi``
gives an ordinary LTI system of order ``prod(J)``; the tensor-native
routines here are checked against that matrix picture throughout the tests.

Stability can be decided by the iff eigenvalue criterion
(:func:`stability_eigen`) or by one of several one-sided sufficient
criteria that work from decompositions.  A one-sided criterion only ever
answers "asymptotically stable" or "inconclusive" (the Tucker spectral
product is exact and gives the full trichotomy); all of them compare their
bound against ``1 - tol`` with a tolerance no smaller than the eigen
criterion's, so they can never claim asymptotic stability when the eigen
criterion does not.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .block_tensor import mode_col_block, mode_row_block
from .decomp import (
    CpFactors,
    GenCpFactors,
    TtCores,
    GenTtCores,
    cp_als,
    cpd_rank_certificate,
    gen_cpd_to_full,
    gen_ttd_apply,
    gen_ttd_to_full,
    generalized_cpd,
    generalized_ttd,
    hosvd,
    multilinear_ranks,
    tt_left_orthonormalize,
    tt_right_orthonormalize,
    ttd_permuted,
    unfolding_rank_via_ttd,
)
from .einstein import (
    EvenPairedTensor,
    _ensure,
    einstein_apply,
    einstein_compose,
    is_u_positive_definite,
    paired_outer,
    phi,
    phi_inverse,
    u_identity,
    unfolding_rank,
)
from .errors import ConvergenceError, PoleError, PreconditionError, ShapeError
from .tensor_core import RANK_TOL, _count_above, as_tensor, numerical_rank, tucker_product

__all__ = [
    "MltiSystem",
    "TuckerSystem",
    "FactoredMltiSystem",
    "Stability",
    "StabilityVerdict",
    "Answer",
    "Decision",
    "BalancedTruncation",
    "tucker_to_einstein",
    "simulate",
    "transfer_eval",
    "hinf_norm",
    "hinf_relative_error",
    "stability_tolerance",
    "stability_eigen",
    "stability_hosvd",
    "stability_cpd",
    "stability_ttd",
    "stability_factored",
    "stability_tucker",
    "reach_gramian",
    "obs_gramian",
    "lyapunov_solve",
    "reachability_tensor",
    "observability_tensor",
    "is_reachable",
    "is_observable",
    "compress",
    "factored_simulate",
    "unfold_to_lti",
    "balanced_truncation_baseline",
]


# ---------------------------------------------------------------------------
# system types
# ---------------------------------------------------------------------------


@dataclass
class MltiSystem:
    """``(A, B, C)`` with ``A: J x J``, ``B: J x K``, ``C: I x J`` paired tensors."""

    a: EvenPairedTensor
    b: EvenPairedTensor
    c: EvenPairedTensor

    def __post_init__(self):
        self.a, self.b, self.c = _ensure(self.a), _ensure(self.b), _ensure(self.c)
        a, b, c = self.a, self.b, self.c
        if not (a.order == b.order == c.order):
            raise ShapeError("A, B and C must have the same number of index pairs")
        if not a.is_square:
            raise ShapeError(f"A must be square, got pairs {a.pairs}")
        if b.row_shape != a.row_shape:
            raise ShapeError(f"B rows {b.row_shape} do not match state shape {a.row_shape}")
        if c.col_shape != a.row_shape:
            raise ShapeError(f"C columns {c.col_shape} do not match state shape {a.row_shape}")

    @property
    def state_shape(self) -> tuple[int, ...]:
        return self.a.row_shape

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.b.col_shape

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.c.row_shape

    @property
    def order(self) -> int:
        return self.a.order

    def parameter_count(self) -> int:
        return self.a.data.size + self.b.data.size + self.c.data.size

    def transposed(self) -> "MltiSystem":
        """Dual system ``(A^T, C^T, B^T)``."""
        return MltiSystem(self.a.T, self.c.T, self.b.T)


@dataclass
class TuckerSystem:
    """System whose tensors are outer products of per-mode matrices."""

    a_mats: list[np.ndarray]
    b_mats: list[np.ndarray]
    c_mats: list[np.ndarray]

    def __post_init__(self):
        self.a_mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in self.a_mats]
        self.b_mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in self.b_mats]
        self.c_mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in self.c_mats]
        if not (len(self.a_mats) == len(self.b_mats) == len(self.c_mats)):
            raise ShapeError("need the same number of A, B and C matrices")
        for n, (a, b, c) in enumerate(zip(self.a_mats, self.b_mats, self.c_mats), start=1):
            if a.shape[0] != a.shape[1] or b.shape[0] != a.shape[0] or c.shape[1] != a.shape[0]:
                raise ShapeError(f"mode {n}: shapes {a.shape}, {b.shape}, {c.shape} not conformable")


@dataclass
class FactoredMltiSystem:
    """System with ``A``, ``B``, ``C`` stored in generalized CP or TT format."""

    a: GenCpFactors | GenTtCores
    b: GenCpFactors | GenTtCores
    c: GenCpFactors | GenTtCores
    hinf_error: float | None = None

    @property
    def format(self) -> str:
        kinds = {type(x) for x in (self.a, self.b, self.c)}
        if kinds == {GenCpFactors}:
            return "cpd"
        if kinds == {GenTtCores}:
            return "ttd"
        return "mixed"

    @property
    def ranks(self):
        """``(R1, R2, R3)`` Kronecker ranks, or the three TT-rank vectors."""
        return tuple(
            x.kronecker_rank if isinstance(x, GenCpFactors) else x.ranks for x in (self.a, self.b, self.c)
        )

    def parameter_count(self) -> int:
        return self.a.parameter_count() + self.b.parameter_count() + self.c.parameter_count()

    def to_system(self) -> MltiSystem:
        return MltiSystem(self.a.to_full(), self.b.to_full(), self.c.to_full())


# ---------------------------------------------------------------------------
# verdict types
# ---------------------------------------------------------------------------


class Stability(str, Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically_stable"
    STABLE = "stable"
    STABLE_MARGINAL = "stable_marginal"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"
    INCONCLUSIVE_PRECONDITION = "inconclusive_precondition"


@dataclass(frozen=True)
class StabilityVerdict:
    """Verdict of one criterion with the quantity it was decided on."""

    verdict: Stability
    criterion: str
    witness: float

    @property
    def is_asymptotically_stable(self) -> bool:
        return self.verdict is Stability.ASYMPTOTICALLY_STABLE


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Decision:
    """Reachability/observability answer; ``witness`` is a rank or eigenvalue."""

    answer: Answer
    method: str
    witness: float | int | None = None


# ---------------------------------------------------------------------------
# construction and simulation
# ---------------------------------------------------------------------------


def tucker_to_einstein(s: TuckerSystem) -> MltiSystem:
    """Paired tensors ``A = A1 o ... o AN`` etc., so that ``A * X = X x {A1, ..., AN}``."""
    return MltiSystem(paired_outer(s.a_mats), paired_outer(s.b_mats), paired_outer(s.c_mats))


def _as_system(s) -> MltiSystem:
    if isinstance(s, MltiSystem):
        return s
    if isinstance(s, TuckerSystem):
        return tucker_to_einstein(s)
    if isinstance(s, FactoredMltiSystem):
        return s.to_system()
    raise TypeError(f"expected a system, got {type(s).__name__}")


def simulate(s, x0, inputs=None, k: int | None = None):
    """Run ``k`` steps; returns ``(states, outputs)`` lists of length ``k + 1``.

    ``inputs`` is a sequence of input tensors (at least ``k`` of them) or
    ``None`` for the unforced response.
    """
    s = _as_system(s)
    x = as_tensor(x0)
    if x.shape != s.state_shape:
        raise ShapeError(f"initial state has shape {x.shape}, expected {s.state_shape}")
    if k is None:
        if inputs is None:
            raise ValueError("give the step count k when there are no inputs")
        k = len(inputs)
    if inputs is not None and len(inputs) < k:
        raise ShapeError(f"need {k} inputs, got {len(inputs)}")
    states, outputs = [x], [einstein_apply(s.c, x)]
    for t in range(k):
        nxt = einstein_apply(s.a, x)
        if inputs is not None:
            u = as_tensor(inputs[t])
            if u.shape != s.input_shape:
                raise ShapeError(f"input {t} has shape {u.shape}, expected {s.input_shape}")
            nxt = nxt + einstein_apply(s.b, u)
        x = nxt
        states.append(x)
        outputs.append(einstein_apply(s.c, x))
    return states, outputs


def unfold_to_lti(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense ``(phi(A), phi(B), phi(C))``.

    Factored systems are unfolded slice by slice through Kronecker products
    (``sum_r A_r^(N) (x) ... (x) A_r^(1)``) without reconstructing the paired
    tensors.
    """
    if isinstance(s, FactoredMltiSystem):
        return tuple(_unfold_factored(x) for x in (s.a, s.b, s.c))
    if isinstance(s, TuckerSystem):
        return tuple(_kron_rev(m) for m in (s.a_mats, s.b_mats, s.c_mats))
    s = _as_system(s)
    return phi(s.a), phi(s.b), phi(s.c)


def _kron_rev(mats):
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(m, out)
    return out


def _unfold_factored(f) -> np.ndarray:
    if isinstance(f, GenCpFactors):
        r = f.kronecker_rank
        return sum(_kron_rev([c[k] for c in f.components]) for k in range(r))
    # TT: M_n[r_n] = sum_{r_{n-1}} core_n[r_{n-1}, :, :, r_n] (x) M_{n-1}[r_{n-1}]
    prev = [np.ones((1, 1))]
    for core in f.cores:
        cur = []
        for rn in range(core.shape[3]):
            cur.append(sum(np.kron(core[rp, :, :, rn], prev[rp]) for rp in range(core.shape[0])))
        prev = cur
    return prev[0]


# ---------------------------------------------------------------------------
# transfer function and H-infinity norm
# ---------------------------------------------------------------------------


def _lti_of(s):
    if isinstance(s, tuple) and len(s) == 3:
        return tuple(np.asarray(m, dtype=float) for m in s)
    return unfold_to_lti(s)


def transfer_eval(s, z: complex, cond_limit: float = 1e12) -> np.ndarray:
    """Unfolded transfer matrix ``phi(C) (z I - phi(A))^-1 phi(B)``.

    Raises :class:`PoleError` when the resolvent's condition number exceeds
    ``cond_limit``.
    """
    af, bf, cf = _lti_of(s)
    n = af.shape[0]
    m = complex(z) * np.eye(n) - af
    if n:
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > cond_limit:
            raise PoleError(f"z = {z} is (numerically) a pole", condition=float(cond))
        return cf @ np.linalg.solve(m, bf)
    return np.zeros((cf.shape[0], bf.shape[1]), dtype=complex)


class _FrequencyResponse:
    """Evaluates ``sigma_max(G(e^{i w}))`` via one complex Schur form."""

    def __init__(self, lti):
        af, bf, cf = lti
        self.n = af.shape[0]
        self.d = np.zeros((cf.shape[0], bf.shape[1]))
        if self.n:
            t, z = sla.schur(af.astype(complex), output="complex")
            self.t = t
            self.cz = cf @ z
            self.zb = z.conj().T @ bf
            self.diag = np.diag(t)

    def matrix(self, w: float) -> np.ndarray:
        if not self.n:
            return self.d.astype(complex)
        zc = np.exp(1j * w)
        gap = np.min(np.abs(zc - self.diag))
        if gap < 1e-13 * max(1.0, np.max(np.abs(self.diag))):
            raise PoleError(f"frequency {w} hits a pole", condition=float("inf"))
        m = zc * np.eye(self.n) - self.t
        return self.cz @ sla.solve_triangular(m, self.zb)


def _sigma_max(g: np.ndarray) -> float:
    if g.size == 0:
        return 0.0
    return float(np.linalg.norm(g, 2))


def _grid(grid_size: int) -> np.ndarray:
    return np.linspace(0.0, np.pi, int(grid_size))


def _safe_grid_values(evaluate, grid: np.ndarray) -> np.ndarray:
    """Evaluate on the grid; a pole hit is shifted by half a grid step (with a warning)."""
    step = grid[1] - grid[0] if grid.size > 1 else np.pi
    rows = []
    for w in grid:
        try:
            rows.append(evaluate(w))
        except PoleError:
            warnings.warn(f"pole near frequency {w:.6g}; shifted by half a grid step", stacklevel=4)
            rows.append(evaluate(w + 0.5 * step if w + 0.5 * step <= np.pi else w - 0.5 * step))
    return np.asarray(rows, dtype=float)


def _refine(evaluate, grid: np.ndarray, vals: np.ndarray) -> float:
    """Bounded scalar maximization around the best grid point."""
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if hi > lo:
        try:
            res = minimize_scalar(
                lambda w: -evaluate(w), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
            )
            best = max(best, float(-res.fun))
        except PoleError:
            pass
    return best


def _peak(evaluate, grid_size: int) -> float:
    """Maximum of ``evaluate`` over ``[0, pi]``: grid plus bounded local refinement."""
    grid = _grid(grid_size)
    return _refine(evaluate, grid, _safe_grid_values(evaluate, grid))


def hinf_norm(s, grid_size: int = 512) -> float:
    """Estimate of ``max_w sigma_max(G(e^{iw}))`` (grid of ``grid_size`` points on ``[0, pi]``)."""
    fr = _FrequencyResponse(_lti_of(s))
    return _peak(lambda w: _sigma_max(fr.matrix(w)), grid_size)


def hinf_relative_error(full, reduced, grid_size: int = 512) -> float:
    """``||G_full - G_reduced||_inf / ||G_full||_inf`` on the unit circle.

    ``reduced`` may be any system type or a dense ``(A, B, C)`` triple (for
    instance a balanced-truncation model).  Both peaks are estimated on the
    same frequency grid and then refined locally.
    """
    lf, lr = _lti_of(full), _lti_of(reduced)
    if lf[1].shape[1] != lr[1].shape[1] or lf[2].shape[0] != lr[2].shape[0]:
        raise ShapeError("full and reduced systems have different input/output sizes")
    for lti in (lf, lr):
        if lti[0].size and np.max(np.abs(np.linalg.eigvals(lti[0]))) >= 1.0:
            warnings.warn("system is not asymptotically stable; H-inf values are not norms", stacklevel=2)
    ff, fr = _FrequencyResponse(lf), _FrequencyResponse(lr)

    def both(w):
        gf = ff.matrix(w)
        return _sigma_max(gf), _sigma_max(gf - fr.matrix(w))

    grid = _grid(grid_size)
    vals = _safe_grid_values(both, grid)
    den = _refine(lambda w: _sigma_max(ff.matrix(w)), grid, vals[:, 0])
    if den == 0.0:
        return 0.0 if not np.any(vals[:, 1]) else float("inf")
    num = _refine(lambda w: _sigma_max(ff.matrix(w) - fr.matrix(w)), grid, vals[:, 1])
    return num / den


# ---------------------------------------------------------------------------
# stability criteria
# ---------------------------------------------------------------------------


def stability_tolerance(norm_bound: float) -> float:
    """Boundary tolerance ``1e-9 (1 + ||A||)`` used to compare magnitudes with 1."""
    return 1e-9 * (1.0 + float(norm_bound))


def _a_of(s) -> EvenPairedTensor:
    if isinstance(s, (MltiSystem, TuckerSystem, FactoredMltiSystem)):
        return _as_system(s).a
    return _ensure(s)


def _multiplicities_equal(m: np.ndarray, lams: np.ndarray, scale: float) -> bool:
    radius = 1e-6 * (1.0 + scale)
    seen: list[complex] = []
    for lam in lams:
        if any(abs(lam - mu) <= radius for mu in seen):
            continue
        seen.append(lam)
        alg = int(np.count_nonzero(np.abs(lams - lam) <= radius))
        s = np.linalg.svd(m - lam * np.eye(m.shape[0]), compute_uv=False)
        geo = int(np.count_nonzero(s <= 1e-8 * (1.0 + scale)))
        if geo != alg:
            return False
    return True


def stability_eigen(s) -> StabilityVerdict:
    """Iff criterion on the U-eigenvalues (eigenvalues of ``phi(A)``).

    Asymptotically stable when every ``|lambda| < 1 - tol``, unstable when
    some ``|lambda| > 1 + tol``.  On the boundary the unit-modulus clusters
    are checked for equal algebraic and geometric multiplicity: ``stable`` if
    they match, otherwise ``stable_marginal`` (the check is not trusted under
    rounding, so no instability is claimed).
    """
    a = _a_of(s)
    m = phi(a)
    lams = np.linalg.eigvals(m)
    rho = float(np.max(np.abs(lams))) if lams.size else 0.0
    tol = stability_tolerance(a.norm())
    if rho < 1.0 - tol:
        v = Stability.ASYMPTOTICALLY_STABLE
    elif rho > 1.0 + tol:
        v = Stability.UNSTABLE
    else:
        unit = lams[np.abs(np.abs(lams) - 1.0) <= tol]
        v = Stability.STABLE if _multiplicities_equal(m, unit, a.norm()) else Stability.STABLE_MARGINAL
    return StabilityVerdict(v, "eigen", rho)


def _one_sided(bound: float, norm_bound: float, criterion: str) -> StabilityVerdict:
    tol = stability_tolerance(norm_bound)
    v = Stability.ASYMPTOTICALLY_STABLE if bound < 1.0 - tol else Stability.INCONCLUSIVE
    return StabilityVerdict(v, criterion, float(bound))


def stability_hosvd(s) -> StabilityVerdict:
    """Sufficient criterion: the squared mode-``n`` singular values sum below 1.

    The sum equals ``||A||^2`` for every mode, so one mode suffices.  The
    witness is that sum.
    """
    a = _a_of(s)
    g = hosvd(a.data).singular_values[0]
    total = float(np.sum(g**2))
    nrm = np.sqrt(total)
    v = _one_sided(nrm, nrm, "hosvd")
    return StabilityVerdict(v.verdict, "hosvd", total)


def _orthonormal_columns(f: np.ndarray, tol: float = 1e-10) -> bool:
    if f.shape[1] > f.shape[0]:
        return False
    return float(np.linalg.norm(f.T @ f - np.eye(f.shape[1]))) <= tol


def _order2n_factors(f):
    """``(weights, odd factors, even factors)`` from CpFactors or rank-one GenCpFactors."""
    if isinstance(f, CpFactors):
        if len(f.factors) % 2:
            raise ShapeError("CP factors must describe an even-order paired tensor")
        return np.asarray(f.weights, dtype=float), list(f.factors[0::2]), list(f.factors[1::2])
    r = f.kronecker_rank
    weights = np.ones(r)
    odd, even = [], []
    for comp in f.components:
        us, vs = [], []
        for k in range(r):
            u, sv, vt = np.linalg.svd(comp[k])
            if _count_above(sv, RANK_TOL, max(comp[k].shape)) > 1:
                return None
            us.append(u[:, 0])
            vs.append(vt[0])
            weights[k] *= sv[0]
        odd.append(np.array(us).T)
        even.append(np.array(vs).T)
    return weights, odd, even


def stability_cpd(f) -> StabilityVerdict:
    """Sufficient criterion from a CPD of ``A`` whose largest weight is below 1.

    Requires at least one row-mode (odd) and one column-mode (even) factor
    matrix with orthonormal columns; then the weights are the singular values
    of ``phi(A)``.  Otherwise the verdict is ``inconclusive_precondition``.
    Accepts :class:`CpFactors` of the order-``2N`` tensor or
    :class:`GenCpFactors` with rank-one slices.
    """
    parts = _order2n_factors(f)
    if parts is None:
        return StabilityVerdict(Stability.INCONCLUSIVE_PRECONDITION, "cpd", float("nan"))
    w, odd, even = parts
    lam1 = float(np.max(np.abs(w))) if w.size else 0.0
    if not (any(_orthonormal_columns(m) for m in odd) and any(_orthonormal_columns(m) for m in even)):
        return StabilityVerdict(Stability.INCONCLUSIVE_PRECONDITION, "cpd", lam1)
    # ||A||_F <= sum of |weights| since each rank-one term has unit norm
    return _one_sided(lam1, float(np.sum(np.abs(w))), "cpd")


def _ttd_sigma(a):
    """``(sigma_max(phi(A)), ||A||_F)`` from the orthonormalized TTD of the permuted tensor."""
    if isinstance(a, GenTtCores):
        n = len(a.pairs)
    else:
        a = _a_of(a)
        n = a.order
    t = ttd_permuted(a, exact=True)
    t = tt_left_orthonormalize(t, n - 1)
    t = tt_right_orthonormalize(t, n + 1)
    core = t.cores[n - 1]
    m = core.reshape(core.shape[0] * core.shape[1], core.shape[2], order="F")
    if m.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(m, 2)), float(np.linalg.norm(m))


def stability_ttd(a) -> StabilityVerdict:
    """Sufficient criterion ``sigma_max(phi(A)) < 1`` computed in TT format.

    Builds the TTD of the permuted tensor (row modes first), left-orthonormalizes
    cores ``1..N-1`` and right-orthonormalizes cores ``N+1..2N``; the largest
    singular value of the reshaped ``N``-th core is then ``sigma_max(phi(A))``.
    """
    sig, fro = _ttd_sigma(a)
    return _one_sided(sig, fro, "ttd")


def stability_factored(f) -> StabilityVerdict:
    """Lyapunov-type bound ``sum_r prod_n sigma_max(A_r^(n))`` for CPD-format ``A``.

    Below 1: asymptotically stable.  Equal to 1 (within tolerance):
    stable_marginal.  Otherwise inconclusive.
    """
    comps = f.a if isinstance(f, FactoredMltiSystem) else f
    if not isinstance(comps, GenCpFactors):
        raise TypeError("stability_factored needs A in generalized CP format")
    r = comps.kronecker_rank
    bound = 0.0
    fro = 0.0
    for k in range(r):
        bound += prod(float(np.linalg.norm(c[k], 2)) for c in comps.components)
        fro += prod(float(np.linalg.norm(c[k])) for c in comps.components)
    tol = stability_tolerance(fro)
    if bound < 1.0 - tol:
        v = Stability.ASYMPTOTICALLY_STABLE
    elif bound <= 1.0 + tol:
        v = Stability.STABLE_MARGINAL
    else:
        v = Stability.INCONCLUSIVE
    return StabilityVerdict(v, "factored", bound)


def stability_tucker(s) -> StabilityVerdict:
    """Exact criterion for Tucker-form ``A``: product of per-mode spectral radii.

    Accepts a :class:`TuckerSystem`, a list of matrices, or a factored system
    with Kronecker rank 1.  On the boundary the multiplicity check is run on
    the Kronecker product when it has at most 4096 rows; larger cases report
    ``stable_marginal``.
    """
    if isinstance(s, TuckerSystem):
        mats = s.a_mats
    elif isinstance(s, FactoredMltiSystem) or isinstance(s, GenCpFactors):
        comps = s.a if isinstance(s, FactoredMltiSystem) else s
        if not isinstance(comps, GenCpFactors) or comps.kronecker_rank != 1:
            raise PreconditionError("stability_tucker needs Kronecker rank 1")
        mats = [c[0] for c in comps.components]
    else:
        mats = [np.asarray(m, dtype=float) for m in s]
    rho = prod(float(np.max(np.abs(np.linalg.eigvals(m)))) for m in mats)
    fro = prod(float(np.linalg.norm(m)) for m in mats)
    tol = stability_tolerance(fro)
    if rho < 1.0 - tol:
        v = Stability.ASYMPTOTICALLY_STABLE
    elif rho > 1.0 + tol:
        v = Stability.UNSTABLE
    elif prod(m.shape[0] for m in mats) <= 4096:
        big = _kron_rev(mats)
        lams = np.linalg.eigvals(big)
        unit = lams[np.abs(np.abs(lams) - 1.0) <= tol]
        v = Stability.STABLE if _multiplicities_equal(big, unit, fro) else Stability.STABLE_MARGINAL
    else:
        v = Stability.STABLE_MARGINAL
    return StabilityVerdict(v, "tucker", rho)


# ---------------------------------------------------------------------------
# Gramians and Lyapunov equations
# ---------------------------------------------------------------------------


def reach_gramian(s, t0: int, t1: int) -> EvenPairedTensor:
    """``sum_{t=t0}^{t1-1} A^(t1-t-1) * B * B^T * (A^T)^(t1-t-1)``."""
    s = _as_system(s)
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    term = einstein_compose(s.b, s.b.T)
    w = term
    for _ in range(t1 - t0 - 1):
        term = einstein_compose(einstein_compose(s.a, term), s.a.T)
        w = w + term
    return w


def obs_gramian(s, t0: int, t1: int) -> EvenPairedTensor:
    """``sum_{t=t0}^{t1-1} (A^T)^(t-t0) * C^T * C * A^(t-t0)``."""
    s = _as_system(s)
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    term = einstein_compose(s.c.T, s.c)
    w = term
    for _ in range(t1 - t0 - 1):
        term = einstein_compose(einstein_compose(s.a.T, term), s.a)
        w = w + term
    return w


def _stein_residual(a, w, q):
    r = w - a @ w @ a.T - q
    return float(np.linalg.norm(r)) / max(float(np.linalg.norm(w)), float(np.linalg.norm(q)), 1e-300)


def _smith(a, q, tol, max_iter):
    w = q.copy()
    ak = a.copy()
    for _ in range(max_iter):
        inc = ak @ w @ ak.T
        w = w + inc
        ak = ak @ ak
        if np.linalg.norm(inc) <= tol * np.linalg.norm(w) or not np.all(np.isfinite(ak)):
            break
    return 0.5 * (w + w.T)


def lyapunov_solve(s, kind: str = "reach", tol: float = 1e-10, max_iter: int = 100) -> EvenPairedTensor:
    """Infinite-horizon Gramian from the tensor Lyapunov (Stein) equation.

    ``kind="reach"`` solves ``W - A*W*A^T = B*B^T``; ``kind="obs"`` solves
    ``A^T*W*A - W = -C^T*C``.  Requires asymptotic stability.  Smith doubling
    on the unfolded equation, with a dense Kronecker solve when
    ``prod(J) <= 64`` and the doubling residual exceeds ``tol``.
    """
    s = _as_system(s)
    if not stability_eigen(s).is_asymptotically_stable:
        raise PreconditionError("Lyapunov Gramians need an asymptotically stable A")
    af = phi(s.a)
    if kind == "reach":
        bf = phi(s.b)
        a_eff, q = af, bf @ bf.T
    elif kind == "obs":
        cf = phi(s.c)
        a_eff, q = af.T, cf.T @ cf
    else:
        raise ValueError("kind must be 'reach' or 'obs'")
    w = _smith(a_eff, q, np.finfo(float).eps, max_iter)
    res = _stein_residual(a_eff, w, q)
    if res > tol and af.shape[0] <= 64:
        w = sla.solve_discrete_lyapunov(a_eff, q, method="direct")
        w = 0.5 * (w + w.T)
        res = _stein_residual(a_eff, w, q)
    if res > tol or not np.all(np.isfinite(w)):
        raise ConvergenceError(f"Lyapunov residual {res:.3g} above {tol:g}", residual=res)
    j = s.state_shape
    return phi_inverse(w, list(zip(j, j)))


# ---------------------------------------------------------------------------
# reachability and observability
# ---------------------------------------------------------------------------


def reachability_tensor(s) -> EvenPairedTensor:
    """Mode row block of ``B, A*B, ..., A^(P-1)*B`` with ``P = prod(J)``.

    Blocks are arranged with factorization ``(J1, ..., JN)``, block ``k``
    at block coordinates ``ivec^-1(k, J)``; paired shape
    ``J1 x J1K1 x ... x JN x JNKN``.
    """
    s = _as_system(s)
    j = s.state_shape
    blocks, x = [], s.b
    for _ in range(prod(j)):
        blocks.append(x)
        x = einstein_compose(s.a, x)
    return mode_row_block(blocks, j)


def observability_tensor(s) -> EvenPairedTensor:
    """Mode column block of ``C, C*A, ..., C*A^(P-1)``; paired shape ``J1I1 x J1 x ...``.

    The state index is the column (even) index of every pair, so observability
    is read off even-mode ranks.
    """
    s = _as_system(s)
    j = s.state_shape
    blocks, x = [], s.c
    for _ in range(prod(j)):
        blocks.append(x)
        x = einstein_compose(x, s.a)
    return mode_col_block(blocks, j)


_METHODS = ("rank_u", "gramian", "ttd", "cpd_cert", "mlrank_neg", "hosvd_neg")


def _rank_decision(t: EvenPairedTensor, full: int, method: str, state_modes: int, s, kind, tol):
    """Shared logic; ``state_modes`` is 0 for odd (row) or 1 for even (column) modes."""
    if method == "rank_u":
        r = unfolding_rank(t, tol)
        return Decision(Answer.YES if r == full else Answer.NO, method, r)
    if method == "ttd":
        r = unfolding_rank_via_ttd(t, tol)
        return Decision(Answer.YES if r == full else Answer.NO, method, r)
    if method == "gramian":
        w = lyapunov_solve(s, kind)
        ok = is_u_positive_definite(w)
        eig = float(np.min(np.linalg.eigvalsh(0.5 * (phi(w) + phi(w).T))))
        return Decision(Answer.YES if ok else Answer.NO, method, eig)
    if method == "cpd_cert":
        if not np.any(t.data):
            return Decision(Answer.NO, method, 0)
        cp = cp_als(t.data, full)
        if cp.fit < 1.0 - 1e-8:
            return Decision(Answer.INCONCLUSIVE, method, None)
        r = cpd_rank_certificate(cp)
        return Decision(Answer.YES if r == full else Answer.INCONCLUSIVE, method, r)
    if method == "mlrank_neg":
        ranks = multilinear_ranks(t.data, tol)
        state = ranks[state_modes::2]
        j = t.data.shape[state_modes::2]
        bad = [r for r, jn in zip(state, j) if r != jn]
        return Decision(Answer.NO if bad else Answer.INCONCLUSIVE, method, min(state))
    if method == "hosvd_neg":
        h = hosvd(t.data)
        for n in range(state_modes, t.data.ndim, 2):
            g = h.singular_values[n]
            m = t.data.shape[n]
            other = t.data.size // m
            if _count_above(g, tol, max(m, other)) < m:
                return Decision(Answer.NO, method, float(g[-1]))
        return Decision(Answer.INCONCLUSIVE, method, None)
    raise ValueError(f"unknown method {method!r}; choose from {_METHODS}")


def is_reachable(s, method: str = "rank_u", tol: float = RANK_TOL) -> Decision:
    """Reachability of ``(A, B)`` by one of ``rank_u``, ``gramian``, ``ttd``,
    ``cpd_cert``, ``mlrank_neg`` or ``hosvd_neg``.

    ``rank_u``/``ttd``/``gramian`` are iff tests; ``cpd_cert`` can only confirm
    (or answer no for a zero tensor); the two ``*_neg`` methods can only refute.
    ``gramian`` raises :class:`PreconditionError` for systems that are not
    asymptotically stable.
    """
    s = _as_system(s)
    full = prod(s.state_shape)
    return _rank_decision(reachability_tensor(s), full, method, 0, s, "reach", tol)


def is_observable(s, method: str = "rank_u", tol: float = RANK_TOL) -> Decision:
    """Observability of ``(A, C)``; the exact dual of :func:`is_reachable`."""
    s = _as_system(s)
    full = prod(s.state_shape)
    return _rank_decision(observability_tensor(s), full, method, 1, s, "obs", tol)


# ---------------------------------------------------------------------------
# compression and factored systems
# ---------------------------------------------------------------------------


def compress(
    s,
    format: str = "ttd",
    ranks=None,
    eps: float | None = None,
    max_ranks=None,
    evaluate: bool = True,
    grid_size: int = 512,
    **cp_opts,
) -> FactoredMltiSystem:
    """Decompose ``A``, ``B``, ``C`` in generalized CP or TT format.

    ``format="cpd"`` needs Kronecker ranks ``(R1, R2, R3)``.  ``format="ttd"``
    uses exact TT-SVD unless ``eps`` (relative accuracy) or ``max_ranks`` (one
    TT-rank cap vector per tensor, or ``None`` entries) is given.  When
    ``evaluate`` is true the H-infinity relative error against ``s`` is stored
    in ``hinf_error``.
    """
    s = _as_system(s)
    parts = (s.a, s.b, s.c)
    if format == "cpd":
        if ranks is None or len(ranks) != 3:
            raise ValueError("cpd compression needs three Kronecker ranks")
        facs = [generalized_cpd(x, int(r), **cp_opts) for x, r in zip(parts, ranks)]
    elif format == "ttd":
        caps = max_ranks if max_ranks is not None else (None, None, None)
        facs = [_gen_ttd_capped(x, eps, cap) for x, cap in zip(parts, caps)]
    else:
        raise ValueError("format must be 'cpd' or 'ttd'")
    f = FactoredMltiSystem(*facs)
    if evaluate:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f.hinf_error = hinf_relative_error(s, f, grid_size)
    return f


def _gen_ttd_capped(x, eps, cap) -> GenTtCores:
    t = generalized_ttd(x, eps=eps, exact=eps is None)
    if cap is None:
        return t
    return _tt_round(t, cap)


def _tt_round(t: GenTtCores, cap) -> GenTtCores:
    """Truncate TT-ranks to ``cap`` by a right-to-left orthonormalization and SVD sweep."""
    n = len(t.cores)
    cap = list(cap)
    if len(cap) != n - 1:
        raise ShapeError(f"need {n - 1} TT-rank caps, got {len(cap)}")
    flat = TtCores([c.reshape(c.shape[0], -1, c.shape[3], order="F") for c in t.cores])
    flat = tt_right_orthonormalize(flat, 2)
    cores = [c.copy() for c in flat.cores]
    for k in range(n - 1):
        r0, m, r1 = cores[k].shape
        u, sv, vt = np.linalg.svd(cores[k].reshape(r0 * m, r1, order="F"), full_matrices=False)
        r = min(int(cap[k]), sv.size)
        cores[k] = u[:, :r].reshape(r0, m, r, order="F")
        cores[k + 1] = np.tensordot(sv[:r, None] * vt[:r], cores[k + 1], axes=(1, 0))
    out = [
        c.reshape(c.shape[0], j, i, c.shape[2], order="F") for c, (j, i) in zip(cores, t.pairs)
    ]
    return GenTtCores(out)


def _apply_factored(f, x):
    if isinstance(f, GenTtCores):
        return gen_ttd_apply(f, x)
    out = 0.0
    for k in range(f.kronecker_rank):
        out = out + tucker_product(x, [c[k] for c in f.components])
    return out


def _cpd_power_expansion(a: GenCpFactors, x, k: int):
    """``A^k * X`` as ``sum_{r1..rk} X x {A_{r1}^(n) ... A_{rk}^(n)}`` over all index tuples."""
    r = a.kronecker_rank
    n_modes = len(a.components)
    total = np.zeros_like(x)

    def rec(depth, mats):
        nonlocal total
        if depth == k:
            total = total + tucker_product(x, mats)
            return
        for ri in range(r):
            rec(depth + 1, [mats[n] @ a.components[n][ri] for n in range(n_modes)])

    rec(0, [np.eye(a.components[n].shape[1]) for n in range(n_modes)])
    return total


def factored_simulate(f: FactoredMltiSystem, x0, inputs=None, k: int | None = None, expansion_limit: int = 10**6):
    """Simulate directly from factored ``A``, ``B``, ``C``.

    For CPD-format ``A`` the unforced response ``A^t * X0`` is formed from
    the ``R1^t``-term expansion in products of slices while ``R1^t`` stays
    within ``expansion_limit``; beyond that (and for TT format) it is
    propagated step by step.  Inputs enter through per-step Tucker sums.
    Returns ``(states, outputs)`` like :func:`simulate`.
    """
    x0 = as_tensor(x0)
    if k is None:
        if inputs is None:
            raise ValueError("give the step count k when there are no inputs")
        k = len(inputs)
    if inputs is not None and len(inputs) < k:
        raise ShapeError(f"need {k} inputs, got {len(inputs)}")
    use_expansion = isinstance(f.a, GenCpFactors)
    free = x0
    forced = np.zeros_like(x0)
    states = [x0]
    for t in range(1, k + 1):
        if use_expansion and f.a.kronecker_rank**t <= expansion_limit:
            free = _cpd_power_expansion(f.a, x0, t)
        else:
            use_expansion = False
            free = _apply_factored(f.a, free)
        forced = _apply_factored(f.a, forced)
        if inputs is not None:
            forced = forced + _apply_factored(f.b, as_tensor(inputs[t - 1]))
        states.append(free + forced)
    outputs = [_apply_factored(f.c, x) for x in states]
    return states, outputs


# ---------------------------------------------------------------------------
# balanced truncation baseline
# ---------------------------------------------------------------------------


@dataclass
class BalancedTruncation:
    """Reduced dense LTI model from square-root balanced truncation."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    hankel_singular_values: np.ndarray
    hinf_error: float
    keep: int

    @property
    def lti(self):
        return self.a, self.b, self.c

    def parameter_count(self) -> int:
        return self.a.size + self.b.size + self.c.size


def _psd_sqrt(w):
    vals, vecs = np.linalg.eigh(0.5 * (w + w.T))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def balanced_truncation_baseline(s, keep: int, grid_size: int = 512) -> BalancedTruncation:
    """Classical discrete-time balanced truncation of the unfolded system.

    Keeps ``keep`` states.  The parameter count is that of the dense reduced
    matrices, ``keep^2 + keep * (inputs + outputs)``.
    """
    af, bf, cf = _lti_of(s)
    n = af.shape[0]
    if not 0 <= keep <= n:
        raise ValueError(f"keep must lie in 0..{n}")
    if af.size and np.max(np.abs(np.linalg.eigvals(af))) >= 1.0:
        raise PreconditionError("balanced truncation needs an asymptotically stable system")
    wr = sla.solve_discrete_lyapunov(af, bf @ bf.T)
    wo = sla.solve_discrete_lyapunov(af.T, cf.T @ cf)
    lr, lo = _psd_sqrt(wr), _psd_sqrt(wo)
    u, hsv, vt = np.linalg.svd(lo.T @ lr)
    k = int(keep)
    if k and hsv[k - 1] <= 0:
        raise PreconditionError("requested order exceeds the minimal realization order")
    if k:
        sk = 1.0 / np.sqrt(hsv[:k])
        t = lr @ vt[:k].T * sk
        ti = (sk[:, None] * u[:, :k].T) @ lo.T
        ar, br, cr = ti @ af @ t, ti @ bf, cf @ t
    else:
        ar = np.zeros((0, 0))
        br = np.zeros((0, bf.shape[1]))
        cr = np.zeros((cf.shape[0], 0))
    err = hinf_relative_error((af, bf, cf), (ar, br, cr), grid_size)
    return BalancedTruncation(ar, br, cr, hsv, err, k)
