"""Even-order paired tensors and the Einstein product.

An :class:`EvenPairedTensor` stores a ``2N``-th order array with interleaved
extents ``(J1, I1, ..., JN, IN)``.  The unfolding :func:`phi` relabels it as a
``prod(J) x prod(I)`` matrix with rows and columns in ivec order; it turns the
Einstein product into the matrix product, which is how the matrix-like
"U-notions" (transpose, inverse, rank, determinant, eigenvalues, positive
definiteness) are defined.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import prod
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, ShapeError, SingularTensorError
from .tensor_core import RANK_TOL, as_tensor, numerical_rank, outer, vec

__all__ = [
    "EvenPairedTensor",
    "UEigenPair",
    "ProbeOutcome",
    "einstein_apply",
    "einstein_compose",
    "phi",
    "phi_inverse",
    "u_transpose",
    "u_identity",
    "u_diagonal",
    "u_inverse",
    "u_power",
    "unfolding_rank",
    "unfolding_det",
    "is_u_positive_definite",
    "m_positive_probe",
    "u_eigen",
    "hobg_solve",
    "horqi",
    "paired_outer",
]


class EvenPairedTensor:
    """Order-``2N`` tensor with pairwise indices ``(j1, i1, ..., jN, iN)``.

    Parameters
    ----------
    data : array_like
        Array of even order with interleaved extents ``(J1, I1, ..., JN, IN)``.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        data = as_tensor(data)
        if data.ndim == 0 or data.ndim % 2:
            raise ShapeError(f"even-order paired tensor needs even order >= 2, got {data.ndim}")
        data.flags.writeable = False
        self.data = data

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, int]], fill=0.0):
        shape = tuple(int(e) for pair in pairs for e in pair)
        return cls(np.full(shape, fill, dtype=float))

    @property
    def order(self) -> int:
        """``N``, the number of index pairs."""
        return self.data.ndim // 2

    @property
    def row_shape(self) -> tuple[int, ...]:
        return self.data.shape[0::2]

    @property
    def col_shape(self) -> tuple[int, ...]:
        return self.data.shape[1::2]

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.row_shape, self.col_shape))

    @property
    def is_square(self) -> bool:
        return self.row_shape == self.col_shape

    @property
    def T(self) -> "EvenPairedTensor":
        return u_transpose(self)

    def phi(self) -> np.ndarray:
        return phi(self)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data.ravel()))

    def __matmul__(self, other):
        if isinstance(other, EvenPairedTensor):
            return einstein_compose(self, other)
        return einstein_apply(self, other)

    def __add__(self, other):
        return EvenPairedTensor(self.data + _data(other))

    def __sub__(self, other):
        return EvenPairedTensor(self.data - _data(other))

    def __neg__(self):
        return EvenPairedTensor(-self.data)

    def __mul__(self, scalar):
        return EvenPairedTensor(self.data * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, EvenPairedTensor) and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self):
        return f"EvenPairedTensor(pairs={self.pairs})"


def _data(a):
    return a.data if isinstance(a, EvenPairedTensor) else np.asarray(a, dtype=float)


def _ensure(a) -> EvenPairedTensor:
    return a if isinstance(a, EvenPairedTensor) else EvenPairedTensor(a)


def paired_outer(mats: Sequence) -> EvenPairedTensor:
    """Paired tensor ``M1 ∘ M2 ∘ ... ∘ MN`` from matrices ``Mn`` of shape ``Jn x In``."""
    if not mats:
        raise ShapeError("need at least one matrix")
    out = np.asarray(mats[0], dtype=float)
    for m in mats[1:]:
        out = outer(out, np.asarray(m, dtype=float))
    if out.ndim != 2 * len(mats):
        raise ShapeError("paired_outer expects 2-D matrices")
    return EvenPairedTensor(out)


def einstein_apply(a: EvenPairedTensor, x) -> np.ndarray:
    """``a * x``: contract the second index of each pair of ``a`` with ``x``."""
    a = _ensure(a)
    x = np.asarray(x, dtype=float)
    n = a.order
    if x.shape != a.col_shape:
        raise ShapeError(f"operand shape {x.shape} does not match column shape {a.col_shape}")
    return np.tensordot(a.data, x, axes=(list(range(1, 2 * n, 2)), list(range(n))))


def _interleave(n: int) -> list[int]:
    # (j1..jN, i1..iN) -> (j1, i1, ..., jN, iN)
    return [k for pair in zip(range(n), range(n, 2 * n)) for k in pair]


def einstein_compose(a: EvenPairedTensor, b: EvenPairedTensor) -> EvenPairedTensor:
    """``a * b`` for paired tensors with ``a.col_shape == b.row_shape``."""
    a, b = _ensure(a), _ensure(b)
    n = a.order
    if b.order != n or a.col_shape != b.row_shape:
        raise ShapeError(f"cannot compose {a.pairs} with {b.pairs}")
    c = np.tensordot(a.data, b.data, axes=(list(range(1, 2 * n, 2)), list(range(0, 2 * n, 2))))
    return EvenPairedTensor(np.transpose(c, _interleave(n)))


def phi(a: EvenPairedTensor) -> np.ndarray:
    """Unfold to the ``prod(J) x prod(I)`` matrix with ivec-ordered rows and columns."""
    a = _ensure(a)
    n = a.order
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return np.transpose(a.data, perm).reshape(prod(a.row_shape), prod(a.col_shape), order="F")


def phi_inverse(m, pairs: Sequence[tuple[int, int]]) -> EvenPairedTensor:
    m = np.asarray(m, dtype=float)
    rows = tuple(int(p[0]) for p in pairs)
    cols = tuple(int(p[1]) for p in pairs)
    if m.shape != (prod(rows), prod(cols)):
        raise ShapeError(f"matrix shape {m.shape} inconsistent with pairs {tuple(pairs)}")
    n = len(rows)
    t = m.reshape(rows + cols, order="F")
    return EvenPairedTensor(np.transpose(t, _interleave(n)))


def u_transpose(a: EvenPairedTensor) -> EvenPairedTensor:
    a = _ensure(a)
    perm = [k ^ 1 for k in range(a.data.ndim)]
    return EvenPairedTensor(np.transpose(a.data, perm))


def u_identity(shape: Sequence[int]) -> EvenPairedTensor:
    shape = tuple(int(s) for s in shape)
    return phi_inverse(np.eye(prod(shape)), [(s, s) for s in shape])


def u_diagonal(diag) -> EvenPairedTensor:
    """U-diagonal tensor with ``D[j1 j1 ... jN jN] = diag[j1 ... jN]``."""
    diag = np.asarray(diag, dtype=float)
    return phi_inverse(np.diag(vec(diag)), [(s, s) for s in diag.shape])


def _require_square(a: EvenPairedTensor):
    if not a.is_square:
        raise ShapeError(f"operation needs a square paired tensor, got {a.pairs}")


def u_inverse(a: EvenPairedTensor, rcond: float | None = None) -> EvenPairedTensor:
    """U-inverse; raises :class:`SingularTensorError` if the unfolding is numerically singular."""
    a = _ensure(a)
    _require_square(a)
    m = phi(a)
    s = np.linalg.svd(m, compute_uv=False)
    if rcond is None:
        rcond = m.shape[0] * np.finfo(float).eps
    if s[0] == 0.0 or s[-1] <= rcond * s[0]:
        cond = np.inf if s[-1] == 0.0 else s[0] / s[-1]
        raise SingularTensorError(f"tensor is numerically singular (condition {cond:.3e})")
    return phi_inverse(np.linalg.inv(m), a.pairs)


def u_power(a: EvenPairedTensor, k: int) -> EvenPairedTensor:
    """``a * a * ... * a`` (``k`` factors); ``k = 0`` gives the U-identity."""
    a = _ensure(a)
    _require_square(a)
    out = u_identity(a.row_shape)
    base = a
    while k > 0:
        if k & 1:
            out = einstein_compose(out, base)
        k >>= 1
        if k:
            base = einstein_compose(base, base)
    return out


def unfolding_rank(a: EvenPairedTensor, tol: float = RANK_TOL) -> int:
    return numerical_rank(phi(a), tol)


def unfolding_det(a: EvenPairedTensor) -> float:
    a = _ensure(a)
    _require_square(a)
    return float(np.linalg.det(phi(a)))


def is_u_positive_definite(a: EvenPairedTensor, tol: float = 1e-10) -> bool:
    """Whether ``X^T * a * X > 0`` for every nonzero ``X``.

    Decided on the symmetric part of the unfolding.  ``tol`` is relative: the
    smallest eigenvalue must exceed ``tol`` times the largest eigenvalue
    magnitude (and be positive).
    """
    a = _ensure(a)
    _require_square(a)
    m = phi(a)
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    scale = np.max(np.abs(w))
    return bool(scale > 0 and w[0] > tol * scale)


class ProbeOutcome(str, Enum):
    FALSIFIED = "falsified"
    NOT_FALSIFIED = "not_falsified"


def m_positive_probe(a: EvenPairedTensor, trials: int = 1000, rng_seed=None) -> ProbeOutcome:
    """One-sided M-positive-definiteness test on random rank-one tensors.

    Evaluates ``a × {x1^T, x1^T, ..., xN^T, xN^T}`` for ``trials`` random
    Gaussian vectors ``xn``; any nonpositive value falsifies.
    """
    a = _ensure(a)
    _require_square(a)
    rng = np.random.default_rng(rng_seed)
    data = a.data
    n = a.order
    for _ in range(trials):
        val = data
        for k in range(n):
            x = rng.standard_normal(a.row_shape[k])
            # contract the leading pair (j_k, i_k) with x on both sides
            val = np.tensordot(x, np.tensordot(x, val, axes=(0, 0)), axes=(0, 0))
        if float(val) <= 0.0:
            return ProbeOutcome.FALSIFIED
    return ProbeOutcome.NOT_FALSIFIED


@dataclass(frozen=True)
class UEigenPair:
    """U-eigenvalue with its unit-norm eigentensor split into real and imaginary parts."""

    value: complex
    real: np.ndarray
    imag: np.ndarray

    @property
    def tensor(self) -> np.ndarray:
        return self.real + 1j * self.imag


def _eig_order(w: np.ndarray) -> np.ndarray:
    # descending |λ|, then descending real part, then descending imaginary part
    return np.lexsort((-w.imag, -w.real, -np.abs(w)))


def u_eigen(a: EvenPairedTensor) -> list[UEigenPair]:
    """All U-eigenpairs, sorted by descending modulus (ties: real, then imaginary part)."""
    a = _ensure(a)
    _require_square(a)
    try:
        w, v = np.linalg.eig(phi(a))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    shape = a.row_shape
    pairs = []
    for k in _eig_order(w):
        vk = v[:, k] / np.linalg.norm(v[:, k])
        t = vk.reshape(shape, order="F")
        pairs.append(UEigenPair(complex(w[k]), t.real.copy(), t.imag.copy()))
    return pairs


def hobg_solve(a: EvenPairedTensor, rhs, tol: float = 1e-10, max_iter: int | None = None, x0=None):
    """Solve ``a * x = rhs`` by a matrix-free biconjugate gradient iteration.

    Only Einstein products with ``a`` and its U-transpose are used.  On a
    (near) breakdown, or when the residual blows up, the iteration restarts
    from the best iterate so far with a fresh pseudo-random shadow residual.
    Raises :class:`ConvergenceError` once ``max_iter`` products are spent.
    """
    a = _ensure(a)
    _require_square(a)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != a.row_shape:
        raise ShapeError(f"rhs shape {rhs.shape} does not match {a.row_shape}")
    at = u_transpose(a)
    size = prod(a.row_shape)
    if max_iter is None:
        max_iter = 10 * size
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros_like(rhs)

    eps = np.finfo(float).eps
    rng = np.random.default_rng(size)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    r = rhs - einstein_apply(a, x)
    best_x, best_res = x, np.linalg.norm(r) / bnorm
    it = 0
    cycle = 0
    while it < max_iter:
        if best_res <= tol:
            return best_x
        x = best_x
        r = rhs - einstein_apply(a, x)
        rt = r.copy() if cycle == 0 else rng.standard_normal(r.shape)
        cycle += 1
        p = pt = None
        rho_old = 1.0
        while it < max_iter:
            it += 1
            rho = np.vdot(rt, r)
            if abs(rho) <= eps * np.linalg.norm(rt) * np.linalg.norm(r):
                break
            if p is None:
                p, pt = r.copy(), rt.copy()
            else:
                beta = rho / rho_old
                p = r + beta * p
                pt = rt + beta * pt
            q = einstein_apply(a, p)
            qt = einstein_apply(at, pt)
            sigma = np.vdot(pt, q)
            if abs(sigma) <= eps * np.linalg.norm(pt) * np.linalg.norm(q):
                break
            alpha = rho / sigma
            x = x + alpha * p
            r = r - alpha * q
            rt = rt - alpha * qt
            rho_old = rho
            res = np.linalg.norm(r) / bnorm
            if res <= tol:
                # the recursive residual drifts; confirm with the true one
                true_res = np.linalg.norm(rhs - einstein_apply(a, x)) / bnorm
                if true_res < best_res:
                    best_x, best_res = x, true_res
                break
            if res < best_res:
                best_x, best_res = x, res
            elif res > 1e8 * best_res:
                break
    if best_res <= tol:
        return best_x
    raise ConvergenceError(f"HOBG did not converge in {max_iter} iterations", best_res, best_x)


def _rayleigh(a: EvenPairedTensor, x: np.ndarray) -> float:
    return float(np.vdot(x, einstein_apply(a, x)))


def horqi(a: EvenPairedTensor, x0, tol: float = 1e-10, max_iter: int = 30):
    """Higher-order Rayleigh quotient iteration for a real U-eigenpair.

    Each step solves ``(a - λ I) * Y = X`` with :func:`hobg_solve`, normalizes
    ``Y`` and updates ``λ = X^T * a * X``.  The shifted operator becomes
    singular as the iteration converges; on a solver breakdown the shift is
    nudged by ``1e-10 * (1 + |λ|)`` and the solve retried, and if that also
    fails the last usable iterate is kept.

    Returns
    -------
    (UEigenPair, int)
        The eigenpair and the number of iterations taken.
    """
    a = _ensure(a)
    _require_square(a)
    x = np.asarray(x0, dtype=float)
    if x.shape != a.row_shape:
        raise ShapeError(f"start tensor shape {x.shape} does not match {a.row_shape}")
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("start tensor must be nonzero")
    x = x / nrm
    lam = _rayleigh(a, x)
    ident = u_identity(a.row_shape)
    anorm = a.norm()

    def residual(x, lam):
        return float(np.linalg.norm(einstein_apply(a, x) - lam * x))

    res = residual(x, lam)
    for k in range(1, max_iter + 1):
        if res <= tol * max(1.0, anorm):
            return UEigenPair(complex(lam), x, np.zeros_like(x)), k - 1
        y = _shifted_solve(a, ident, lam, x)
        if y is None:
            # shifted operator exactly singular along x: x is already an eigentensor
            return UEigenPair(complex(lam), x, np.zeros_like(x)), k - 1
        x = y / np.linalg.norm(y)
        lam = _rayleigh(a, x)
        res = residual(x, lam)
    if res <= tol * max(1.0, anorm):
        return UEigenPair(complex(lam), x, np.zeros_like(x)), max_iter
    raise ConvergenceError(f"HORQI did not converge in {max_iter} iterations", res, x)


def _shifted_solve(a, ident, lam, x):
    shift = 1e-10 * (1.0 + abs(lam))
    last = None
    for mu in (lam, lam + shift):
        shifted = EvenPairedTensor(a.data - mu * ident.data)
        try:
            return hobg_solve(shifted, x, tol=1e-12)
        except ConvergenceError as exc:
            if exc.iterate is not None and np.all(np.isfinite(exc.iterate)):
                last = exc.iterate
    if last is not None and np.linalg.norm(last) > 0.0:
        # near a singular shift the unconverged iterate is dominated by the eigentensor
        return last
    return None
