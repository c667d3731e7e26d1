"""
Cheap stability certificates versus the spectrum
================================================

Deciding stability exactly needs the eigenvalues of the unfolded ``A``,
which is ``prod(J) x prod(J)``.  Bounds that come from tensor
decompositions -- HOSVD singular values, the largest singular value read off
an orthonormalized TT, the Kronecker-term bound of a CP format -- are much
cheaper but one-sided: they may say "inconclusive" for a stable system, and
must never say "stable" for an unstable one.

This script sweeps the spectral radius across 1 and tabulates what each
criterion says.
"""
from __future__ import annotations

import numpy as np

from mlti import (
    compress,
    stability_eigen,
    stability_factored,
    stability_hosvd,
    stability_ttd,
    stability_tucker,
    tucker_to_einstein,
)
from mlti.generators import random_system, random_tucker_system

rng = np.random.default_rng(1)

print(f"{'radius':>7} {'eigen':>22} {'hosvd':>22} {'ttd':>22}")
for radius in (0.2, 0.5, 0.9, 0.99, 1.01, 1.3):
    s = random_system((2, 2, 2), (1, 1, 1), (1, 1, 1), rng, radius=radius)
    row = [stability_eigen(s), stability_hosvd(s), stability_ttd(s)]
    print(f"{radius:7.2f} " + " ".join(f"{v.verdict.value:>22}" for v in row))

# %%
# For Kronecker-rank-one A the product of per-factor spectral radii is exact.
print()
for radius in (0.7, 1.2):
    ts = random_tucker_system((3, 4), (1, 1), (1, 1), rng, radius=radius)
    v = stability_tucker(ts)
    e = stability_eigen(tucker_to_einstein(ts))
    print(f"Tucker radius {radius}: product {v.witness:.6f} -> {v.verdict.value}; eigen says {e.verdict.value}")

# %%
# In CP format, sum_r prod_n sigma_max(A_r^(n)) bounds the growth of the state.
ts = random_tucker_system((3, 4), (1, 1), (1, 1), rng, radius=0.6)
f = compress(tucker_to_einstein(ts), "cpd", ranks=(1, 1, 1), evaluate=False)
v = stability_factored(f)
print(f"factored bound {v.witness:.4f} -> {v.verdict.value}")
