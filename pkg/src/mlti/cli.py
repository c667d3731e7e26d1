"""Command-line front end: ``mlti analyze | compress | bode | bench``.

Exit codes: 0 success, 1 input error (unreadable or malformed files, bad
flags), 2 a ``--strict`` run found an ``unstable`` or ``no`` verdict,
3 numerical failure (non-convergence, singular solves, poles).

The default seed is 0; the ``MLTI_SEED`` environment variable overrides it
and ``--seed`` overrides both.  CSV output has a header row, floats carry 17
significant digits, and timings sit in their own ``*_seconds`` columns.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import warnings
from math import prod
from pathlib import Path

import numpy as np

from . import experiments
from .decomp import cp_als
from .einstein import EvenPairedTensor
from .errors import (
    CapabilityError,
    ConvergenceError,
    PoleError,
    PreconditionError,
    ShapeError,
    SingularTensorError,
)
from .io import FormatError, read_system, write_system
from .systems import (
    Answer,
    FactoredMltiSystem,
    Stability,
    StabilityVerdict,
    _FrequencyResponse,
    _lti_of,
    compress,
    is_observable,
    is_reachable,
    stability_cpd,
    stability_eigen,
    stability_factored,
    stability_hosvd,
    stability_ttd,
    stability_tucker,
)

EXIT_OK, EXIT_INPUT, EXIT_STRICT, EXIT_NUMERICAL = 0, 1, 2, 3

CRITERIA = ("eigen", "hosvd", "ttd", "cpd", "factored", "tucker")
METHODS = ("rank_u", "ttd", "gramian", "cpd_cert", "mlrank_neg", "hosvd_neg")
EXPERIMENTS = {
    "worked-example": "3 x 2 Tucker system: rank tensors, spectral radius, verdicts",
    "sigma-timing": "sigma_max(phi(A)) by the TT pipeline vs dense SVD",
    "rank-truncation": "generalized CPD/TTD truncation sweep on a sparse 3^6 system",
    "tt-vs-bt": "planted low-TT-rank 6^6 system vs balanced truncation",
}


class InputError(Exception):
    """Bad command-line input (mapped to exit code 1)."""


def default_seed() -> int:
    raw = os.environ.get("MLTI_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"MLTI_SEED must be an integer, got {raw!r}") from exc


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return v


def _write_csv(rows: list[dict], out) -> None:
    if not rows:
        return
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    # timings go last so golden diffs can cut them off
    keys = [k for k in keys if not k.endswith("_seconds")] + [k for k in keys if k.endswith("_seconds")]
    w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in keys})


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _parse_list(text: str, allowed, what: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in allowed]
    if bad:
        raise InputError(f"unknown {what} {', '.join(bad)}; choose from {', '.join(allowed)}")
    return items


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _run_criterion(name: str, system, full) -> StabilityVerdict:
    if name == "eigen":
        return stability_eigen(full)
    if name == "hosvd":
        return stability_hosvd(full)
    if name == "ttd":
        if isinstance(system, FactoredMltiSystem) and system.format == "ttd":
            return stability_ttd(system.a)
        return stability_ttd(full)
    if name == "cpd":
        if isinstance(system, FactoredMltiSystem) and system.format == "cpd":
            return stability_cpd(system.a)
        a = full.a
        r = int(prod(a.row_shape))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return stability_cpd(cp_als(a.data, r))
    if name == "factored":
        if isinstance(system, FactoredMltiSystem) and system.format == "cpd":
            return stability_factored(system)
        return StabilityVerdict(Stability.INCONCLUSIVE_PRECONDITION, "factored", float("nan"))
    if name == "tucker":
        if isinstance(system, FactoredMltiSystem) and system.format == "cpd" and system.a.kronecker_rank == 1:
            return stability_tucker(system)
        return StabilityVerdict(Stability.INCONCLUSIVE_PRECONDITION, "tucker", float("nan"))
    raise InputError(f"unknown criterion {name}")


def cmd_analyze(args) -> int:
    system = read_system(args.manifest)
    full = system.to_system() if isinstance(system, FactoredMltiSystem) else system
    criteria = _parse_list(args.criteria, CRITERIA, "criterion")
    methods = _parse_list(args.methods, METHODS, "method")
    records = []
    for name in criteria:
        t0 = time.perf_counter()
        v = _run_criterion(name, system, full)
        records.append(
            {
                "kind": "stability",
                "criterion": v.criterion,
                "verdict": v.verdict.value,
                "witness": v.witness,
                "elapsed_seconds": time.perf_counter() - t0,
            }
        )
    for kind, fn in (("reachability", is_reachable), ("observability", is_observable)):
        for m in methods:
            t0 = time.perf_counter()
            try:
                d = fn(full, m, tol=args.tol)
                verdict, witness = d.answer.value, d.witness
            except PreconditionError as exc:
                verdict, witness = "inconclusive_precondition", str(exc)
            records.append(
                {
                    "kind": kind,
                    "criterion": m,
                    "verdict": verdict,
                    "witness": witness,
                    "elapsed_seconds": time.perf_counter() - t0,
                }
            )
    report = {
        "system": str(args.manifest),
        "state_shape": list(full.state_shape),
        "parameters": system.parameter_count(),
        "records": records,
    }
    _emit_json(report, args.out)
    failed = any(r["verdict"] in (Stability.UNSTABLE.value, Answer.NO.value) for r in records)
    return EXIT_STRICT if (args.strict and failed) else EXIT_OK


def _clean(o):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.generic):
        o = o.item()
    if isinstance(o, float) and not np.isfinite(o):
        return None
    return o


def _emit_json(obj, out):
    text = json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------
# compress
# ---------------------------------------------------------------------------


def _parse_ranks(text: str | None):
    if text is None:
        return None
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--ranks must be comma-separated integers, got {text!r}") from exc
    if len(vals) != 3 or any(v < 1 for v in vals):
        raise InputError("--ranks needs three positive Kronecker ranks R1,R2,R3")
    return vals


def cmd_compress(args) -> int:
    from .decomp import estimate_cp_rank

    system = read_system(args.manifest)
    full = system.to_system() if isinstance(system, FactoredMltiSystem) else system
    ranks = _parse_ranks(args.ranks)
    estimated = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.format == "cpd":
            if ranks is None:
                from .decomp import _merged

                estimated = [
                    estimate_cp_rank(_merged(x), seed=args.seed)[0] for x in (full.a, full.b, full.c)
                ]
                ranks = estimated
            f = compress(full, "cpd", ranks=ranks, seed=args.seed, grid_size=args.points)
        else:
            if ranks is not None:
                raise InputError("--ranks applies to --format cpd; use --eps for ttd")
            f = compress(full, "ttd", eps=args.eps, grid_size=args.points)
    if args.out:
        write_system(args.out, f)
    report = {
        "system": str(args.manifest),
        "format": args.format,
        "ranks": [list(r) if isinstance(r, tuple) else r for r in f.ranks],
        "parameters_full": full.parameter_count(),
        "parameters": f.parameter_count(),
        "hinf_relative_error": f.hinf_error,
    }
    if estimated is not None:
        report["estimated_kronecker_ranks"] = estimated
    _emit_json(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bode
# ---------------------------------------------------------------------------


def cmd_bode(args) -> int:
    system = read_system(args.manifest)
    if args.points < 1:
        raise InputError("--points must be positive")
    if not args.force and not stability_eigen(system).is_asymptotically_stable:
        raise PreconditionError("system is not asymptotically stable (use --force to emit anyway)")
    fr = _FrequencyResponse(_lti_of(system))
    rows = []
    for w in np.linspace(0.0, np.pi, args.points):
        g = fr.matrix(float(w))
        rows.append({"omega": float(w), "sigma_max": float(np.linalg.norm(g, 2)) if g.size else 0.0})
    out, close = _open_out(args.out)
    try:
        _write_csv(rows, out)
    finally:
        if close:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def cmd_bench(args) -> int:
    name = args.experiment
    if name == "worked-example":
        rows = experiments.worked_example()
        r = rows[0]
        ok = (
            r["rank_reachability"] == 6
            and r["rank_observability"] == 6
            and r["stability"] == "asymptotically_stable"
            and r["reachable"] == "yes"
            and r["observable"] == "yes"
        )
        r["status"] = "PASS" if ok else "FAIL"
    elif name == "sigma-timing":
        sizes = [int(t) for t in args.sizes.split(",")] if args.sizes else [6, 8, 10]
        rows = experiments.sigma_max_timing(sizes, seed=args.seed)
    elif name == "rank-truncation":
        rows = experiments.rank_truncation(seed=args.seed)
    elif name == "tt-vs-bt":
        rows = experiments.tt_vs_balanced_truncation(seed=args.seed)
    else:  # argparse restricts choices
        raise InputError(f"unknown experiment {name}")
    out, close = _open_out(args.out)
    try:
        _write_csv(rows, out)
    finally:
        if close:
            out.close()
    if args.strict and name == "worked-example" and rows[0]["status"] != "PASS":
        return EXIT_STRICT
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlti", description="Analyze, compress and benchmark MLTI systems.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="stability, reachability and observability report (JSON)")
    a.add_argument("manifest")
    a.add_argument("--criteria", default="eigen,hosvd,ttd", help=f"comma list from {','.join(CRITERIA)}")
    a.add_argument("--methods", default="rank_u,ttd", help=f"comma list from {','.join(METHODS)}")
    a.add_argument("--tol", type=float, default=2.0**-45, help="relative rank tolerance")
    a.add_argument("--strict", action="store_true", help="exit 2 on any unstable/no verdict")
    a.add_argument("--out", help="report path (default stdout)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compress", help="generalized CPD/TTD compression")
    c.add_argument("manifest")
    c.add_argument("--format", choices=("cpd", "ttd"), default="ttd")
    c.add_argument("--ranks", help="R1,R2,R3 Kronecker ranks (cpd; estimated when omitted)")
    c.add_argument("--eps", type=float, default=None, help="relative TT accuracy (ttd; exact when omitted)")
    c.add_argument("--points", type=int, default=512, help="frequency grid size for the H-inf error")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", help="factored system manifest to write")
    c.add_argument("--report", help="report path (default stdout)")
    c.set_defaults(func=cmd_compress)

    b = sub.add_parser("bode", help="CSV of (omega, sigma_max(G(e^{i omega})))")
    b.add_argument("manifest")
    b.add_argument("--points", type=int, default=256)
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--force", action="store_true", help="emit data for systems that are not stable")
    b.set_defaults(func=cmd_bode)

    e = sub.add_parser("bench", help="desk-scale experiments (CSV)")
    e.add_argument("--experiment", choices=sorted(EXPERIMENTS), required=True)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--sizes", help="comma list of n for sigma-timing")
    e.add_argument("--strict", action="store_true")
    e.add_argument("--out", help="CSV path (default stdout)")
    e.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = default_seed()
        return args.func(args)
    except (InputError, FormatError, ShapeError) as exc:
        print(f"mlti: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        ConvergenceError,
        SingularTensorError,
        PoleError,
        PreconditionError,
        CapabilityError,
        np.linalg.LinAlgError,
        FloatingPointError,
    ) as exc:
        print(f"mlti: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
