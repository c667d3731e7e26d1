"""
Even-order paired tensors behave like matrices
==============================================

An order-2N tensor with shape ``J1 x I1 x ... x JN x IN`` unfolds to a
``prod(J) x prod(I)`` matrix, and that unfolding turns the Einstein
product into the ordinary matrix product.  Every matrix notion -- transpose,
inverse, rank, determinant, eigenpairs -- carries over through it.

This script checks the homomorphism on random tensors, exercises the
U-notions, and finds an eigenpair without forming the unfolding by
higher-order Rayleigh quotient iteration.
"""
from __future__ import annotations

import numpy as np

from mlti import (
    einstein_compose,
    horqi,
    phi,
    phi_inverse,
    u_eigen,
    u_inverse,
    u_transpose,
    unfolding_det,
    unfolding_rank,
)
from mlti.generators import random_paired, symmetric_paired

rng = np.random.default_rng(0)

a = random_paired((2, 3), (3, 2), rng)
b = random_paired((3, 2), (2, 4), rng)
c = einstein_compose(a, b)
print("a:", a.pairs, " b:", b.pairs, " a*b:", c.pairs)
print("||phi(a*b) - phi(a) phi(b)|| =", np.linalg.norm(phi(c) - phi(a) @ phi(b)))
print("round trip is exact:", np.array_equal(phi_inverse(phi(a), a.pairs).data, a.data))

# %%
# U-notions are the matrix notions of the unfolding.
sq = random_paired((2, 3), (2, 3), rng)
print("U-transpose unfolds to the transpose:", np.array_equal(phi(u_transpose(sq)), phi(sq).T))
print("U-inverse error:", np.linalg.norm(phi(u_inverse(sq)) @ phi(sq) - np.eye(6)))
print("U-rank", unfolding_rank(sq), " U-det", unfolding_det(sq), " det(phi)", np.linalg.det(phi(sq)))

# %%
# Rayleigh quotient iteration with a tensor-native Krylov solve for the
# shifted systems.  Each run lands on some eigenvalue of the unfolding.
s = symmetric_paired((2, 2, 2), rng)
eigs = np.sort(np.array([p.value.real for p in u_eigen(s)]))
print("U-eigenvalues:", np.round(eigs, 6))
for trial in range(4):
    pair, iters = horqi(s, rng.standard_normal((2, 2, 2)))
    print(f"start {trial}: lambda = {pair.value.real:+.10f} after {iters} iterations")
