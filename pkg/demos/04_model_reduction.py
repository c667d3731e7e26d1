"""
Compressing an MLTI system
==========================

An MLTI system stores ``A``, ``B`` and ``C`` as dense paired tensors.
Writing each in a generalized CP (sums of Kronecker products) or generalized
TT format keeps the system exact when the ranks are exact and trades
accuracy for size when they are cut.  Accuracy is measured by the relative
H-infinity error of the transfer function.

The first part compresses a planted low-TT-rank system exactly and compares
with balanced truncation of the unfolded state space.  The second part cuts
the TT ranks of a random sparse system one step at a time.
"""
from __future__ import annotations

import numpy as np

from mlti import balanced_truncation_baseline, compress
from mlti.experiments import sparse_system_3x3x3
from mlti.generators import planted_tt_system

s = planted_tt_system((4, 4, 4), (4, 4, 4), (4, 4, 4), (3, 3), seed=np.random.default_rng(5))
print("planted system: state", s.state_shape, " parameters", s.parameter_count())

f = compress(s, "ttd")
print("exact generalized TTD ranks", [t.ranks for t in (f.a, f.b, f.c)])
print(f"  parameters {f.parameter_count()}, H-inf relative error {f.hinf_error:.2e}")

for keep in (32, 16, 8):
    bt = balanced_truncation_baseline(s, keep)
    print(f"balanced truncation to {keep:3d} states: parameters {bt.parameter_count():6d}, error {bt.hinf_error:.3e}")

# %%
# Truncating the last TT rank of A on a random sparse 3^6 system.  The error
# is not guaranteed to grow monotonically as the rank drops.
s = sparse_system_3x3x3(seed=0)
exact = compress(s, "ttd")
ra = exact.a.ranks[1:-1]
print("\nsparse system parameters", s.parameter_count(), " exact TT ranks of A", ra)
for last in range(ra[-1], 0, -2):
    g = compress(s, "ttd", max_ranks=((*ra[:-1], last), exact.b.ranks[1:-1], exact.c.ranks[1:-1]))
    print(f"  ranks {g.a.ranks[1:-1]}: parameters {g.parameter_count():4d}, error {g.hinf_error:.3e}")
