"""Desk-scale benchmark harnesses.

Each harness returns a list of flat records (dicts) so that the CLI can emit
CSV and the tests can assert on the numbers.  Timing values live under keys
ending in ``_seconds``.

* :func:`worked_example` -- the 3 x 2 state Tucker system: rank tensors,
  spectral-radius product and verdicts.
* :func:`sigma_max_timing` -- largest singular value of ``phi(A)`` through the
  TT pipeline versus a dense SVD, for ``A`` with ``n`` pairs of extent 2.
* :func:`rank_truncation` -- generalized CPD/TTD truncation sweep on a
  sparse 3^6 SISO system.
* :func:`tt_vs_balanced_truncation` -- planted low-TT-rank 6^6 system versus
  unfolding-based balanced truncation.
"""
from __future__ import annotations

import time
import warnings
from math import prod

import numpy as np

from .decomp import GenTtCores, gen_ttd_to_full
from .einstein import phi, unfolding_rank
from .generators import (
    example_tucker_system,
    planted_tt_system,
    random_gen_tt,
    random_system,
)
from .systems import (
    FactoredMltiSystem,
    MltiSystem,
    _ttd_sigma,
    balanced_truncation_baseline,
    compress,
    hinf_relative_error,
    is_observable,
    is_reachable,
    observability_tensor,
    reachability_tensor,
    stability_eigen,
    stability_tolerance,
    stability_tucker,
    tucker_to_einstein,
)

__all__ = [
    "worked_example",
    "sigma_max_timing",
    "sparse_system_3x3x3",
    "rank_truncation",
    "cpd_parameter_count",
    "tt_vs_balanced_truncation",
]


def worked_example() -> list[dict]:
    ts = example_tucker_system()
    s = tucker_to_einstein(ts)
    t0 = time.perf_counter()
    r = reachability_tensor(s)
    o = observability_tensor(s)
    eig = stability_eigen(s)
    tuck = stability_tucker(ts)
    reach = is_reachable(s, "ttd")
    obs = is_observable(s, "ttd")
    elapsed = time.perf_counter() - t0
    return [
        {
            "rank_reachability": unfolding_rank(r),
            "rank_observability": unfolding_rank(o),
            "rank_reachability_ttd": reach.witness,
            "rank_observability_ttd": obs.witness,
            "spectral_radius_product": tuck.witness,
            "stability": eig.verdict.value,
            "reachable": reach.answer.value,
            "observable": obs.answer.value,
            "elapsed_seconds": elapsed,
        }
    ]


def _sigma_instance(n: int, seed: int, rank: int = 2, fill: float = 0.5):
    rng = np.random.default_rng([seed, n])
    t = random_gen_tt([2] * n, [2] * n, [rank] * (n - 1), rng, fill=fill)
    # unit-norm cores give ||A||_F <= 1, so sigma_max(phi(A)) <= 0.9 after scaling
    cores = [c / max(float(np.linalg.norm(c)), 1e-300) for c in t.cores]
    cores[0] = 0.9 * cores[0]
    return GenTtCores(cores)


def sigma_max_timing(sizes=(6, 8, 10), seed: int = 0) -> list[dict]:
    """``sigma_max(phi(A))`` via the orthonormalized TTD versus a dense SVD.

    ``A`` is a random sparse tensor given in generalized TT format with
    ``n`` pairs of extent 2, so ``phi(A)`` is ``2^n x 2^n``.  The TT timing
    includes the conversion to the permuted TTD and both orthonormalization
    sweeps; the SVD timing includes forming ``phi(A)`` from the same cores.
    """
    rows = []
    for n in sizes:
        cores = _sigma_instance(int(n), seed)
        t0 = time.perf_counter()
        sig_tt, _ = _ttd_sigma(cores)
        t_tt = time.perf_counter() - t0
        t0 = time.perf_counter()
        m = phi(gen_ttd_to_full(cores))
        sig_svd = float(np.linalg.svd(m, compute_uv=False)[0])
        t_svd = time.perf_counter() - t0
        rows.append(
            {
                "n": int(n),
                "sigma_max_ttd": sig_tt,
                "sigma_max_svd": sig_svd,
                "relative_error": abs(sig_tt - sig_svd) / sig_svd,
                "stability": "asymptotically_stable" if sig_tt < 1.0 - stability_tolerance(sig_tt) else "inconclusive",
                "ttd_seconds": t_tt,
                "svd_seconds": t_svd,
            }
        )
    return rows


def sparse_system_3x3x3(seed: int = 0, fill: float = 0.3) -> MltiSystem:
    """SISO system with state ``3 x 3 x 3`` and Bernoulli-sparse entries (783 parameters)."""
    return random_system((3, 3, 3), (1, 1, 1), (1, 1, 1), seed=np.random.default_rng([seed, 73]), fill=fill)


def cpd_parameter_count(s: MltiSystem, ranks) -> int:
    """Parameter count ``R1 sum Jn^2 + R2 sum Jn Kn + R3 sum In Jn`` of a generalized CPD."""
    r1, r2, r3 = ranks
    return (
        r1 * sum(j * i for j, i in s.a.pairs)
        + r2 * sum(j * k for j, k in s.b.pairs)
        + r3 * sum(i * j for i, j in s.c.pairs)
    )


def rank_truncation(seed: int = 0, cpd_ranks=((49, 2, 2), (20, 2, 2), (10, 2, 2)), run_cpd: bool = True) -> list[dict]:
    """Generalized CPD and TTD truncation sweep on :func:`sparse_system_3x3x3`."""
    s = sparse_system_3x3x3(seed)
    rows = [{"method": "full", "ranks": "-", "parameters": s.parameter_count(), "hinf_error": 0.0}]
    exact = compress(s, "ttd")
    ra = exact.a.ranks[1:-1]
    rows.append(
        {
            "method": "ttd",
            "ranks": _fmt_ranks(exact),
            "parameters": exact.parameter_count(),
            "hinf_error": exact.hinf_error,
        }
    )
    # truncate the last inner TT-rank of A one step at a time
    caps_b = exact.b.ranks[1:-1]
    caps_c = exact.c.ranks[1:-1]
    for last in range(ra[-1] - 1, 0, -1):
        f = compress(s, "ttd", max_ranks=((*ra[:-1], last), caps_b, caps_c))
        rows.append(
            {
                "method": "ttd",
                "ranks": _fmt_ranks(f),
                "parameters": f.parameter_count(),
                "hinf_error": f.hinf_error,
            }
        )
    for ranks in cpd_ranks:
        row = {"method": "cpd", "ranks": ",".join(str(r) for r in ranks), "parameters": cpd_parameter_count(s, ranks)}
        if run_cpd:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = compress(s, "cpd", ranks=ranks, seed=seed)
            assert f.parameter_count() == row["parameters"]
            row["hinf_error"] = f.hinf_error
        else:
            row["hinf_error"] = float("nan")
        rows.append(row)
    return rows


def _fmt_ranks(f: FactoredMltiSystem) -> str:
    return " ".join("{" + ",".join(str(r) for r in x.ranks[1:-1]) + "}" for x in (f.a, f.b, f.c))


def tt_vs_balanced_truncation(seed: int = 0, keeps=(200, 100, 40), extent: int = 6, ranks=(6, 6)) -> list[dict]:
    """Exact generalized TTD of a planted low-TT-rank system versus balanced truncation."""
    dims = (extent,) * 3
    s = planted_tt_system(dims, dims, dims, ranks, seed=np.random.default_rng([seed, 74]))
    t0 = time.perf_counter()
    f = compress(s, "ttd")
    t_tt = time.perf_counter() - t0
    rows = [
        {"method": "full", "ranks": "-", "parameters": s.parameter_count(), "hinf_error": 0.0, "elapsed_seconds": 0.0},
        {
            "method": "ttd",
            "ranks": _fmt_ranks(f),
            "parameters": f.parameter_count(),
            "hinf_error": f.hinf_error,
            "elapsed_seconds": t_tt,
        },
    ]
    for k in keeps:
        t0 = time.perf_counter()
        bt = balanced_truncation_baseline(s, int(k))
        rows.append(
            {
                "method": "balanced_truncation",
                "ranks": str(int(k)),
                "parameters": bt.parameter_count(),
                "hinf_error": bt.hinf_error,
                "elapsed_seconds": time.perf_counter() - t0,
            }
        )
    return rows
