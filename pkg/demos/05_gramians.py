"""
Gramians and the Kalman rank test agree
=======================================

A stable pair ``(A, B)`` is reachable exactly when the infinite-horizon
reachability Gramian -- the solution of ``W = A*W*A^T + B*B^T`` -- is
U-positive definite, and exactly when the reachability tensor has full
unfolding rank.

This script solves the tensor Lyapunov equation for a reachable system and
for one whose input only drives an invariant subspace, and compares both
tests.
"""
from __future__ import annotations

from math import prod

import numpy as np

from mlti import (
    is_u_positive_definite,
    lyapunov_solve,
    phi,
    reach_gramian,
    reachability_tensor,
    unfolding_rank,
)
from mlti.generators import random_system, unreachable_system

rng = np.random.default_rng(2)
systems = {
    "reachable": random_system((2, 3), (1, 2), (1, 1), rng, radius=0.8),
    "unreachable": unreachable_system((2, 3), (1, 2), (1, 1), reachable_dim=3, seed=rng, radius=0.8),
}

for name, s in systems.items():
    w = lyapunov_solve(s)
    af, bf = phi(s.a), phi(s.b)
    residual = np.linalg.norm(phi(w) - af @ phi(w) @ af.T - bf @ bf.T)
    eig = np.linalg.eigvalsh(phi(w))
    rank = unfolding_rank(reachability_tensor(s))
    print(f"{name}:")
    print(f"  Lyapunov residual {residual:.1e}, Gramian eigenvalues {np.array2string(eig, precision=2)}")
    print(f"  U-positive definite: {is_u_positive_definite(w)};  rank of R: {rank} of {prod(s.state_shape)}")
    # the finite-horizon Gramian converges to the Lyapunov solution
    for horizon in (5, 20, 80):
        gap = np.linalg.norm(reach_gramian(s, 0, horizon).data - w.data)
        print(f"  horizon {horizon:3d}: distance to limit {gap:.1e}")
