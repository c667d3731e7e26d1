from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from mlti import MltiSystem, phi_inverse, tucker_to_einstein
from mlti.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_STRICT, main
from mlti.generators import example_tucker_system
from mlti.io import write_system


@pytest.fixture
def manifest(tmp_path):
    path = tmp_path / "example.json"
    write_system(path, tucker_to_einstein(example_tucker_system()))
    return path


@pytest.fixture
def unstable_manifest(tmp_path):
    a = phi_inverse(np.diag([1.5, 0.2]), [(2, 2)])
    b = phi_inverse(np.ones((2, 1)), [(2, 1)])
    c = phi_inverse(np.ones((1, 2)), [(1, 2)])
    path = tmp_path / "unstable.json"
    write_system(path, MltiSystem(a, b, c))
    return path


def test_analyze_report(manifest, capsys):
    code = main(["analyze", str(manifest), "--criteria", "eigen,hosvd,ttd,tucker", "--methods", "rank_u,ttd,gramian"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["state_shape"] == [3, 2]
    rec = {(r["kind"], r["criterion"]): r for r in report["records"]}
    assert rec[("stability", "eigen")]["verdict"] == "asymptotically_stable"
    assert rec[("stability", "eigen")]["witness"] == pytest.approx(0.9207, abs=1e-3)
    # not in Tucker form on disk, so the Tucker criterion is not applicable
    assert rec[("stability", "tucker")]["verdict"] == "inconclusive_precondition"
    assert rec[("stability", "tucker")]["witness"] is None
    for method in ("rank_u", "ttd", "gramian"):
        assert rec[("reachability", method)]["verdict"] == "yes"
        assert rec[("observability", method)]["verdict"] == "yes"
    assert all("elapsed_seconds" in r for r in report["records"])


def test_analyze_strict(unstable_manifest, tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", str(unstable_manifest), "--out", str(out)]) == EXIT_OK
    assert main(["analyze", str(unstable_manifest), "--strict", "--out", str(out)]) == EXIT_STRICT
    report = json.loads(out.read_text())
    assert any(r["verdict"] == "unstable" for r in report["records"])


def test_input_errors(tmp_path, manifest, capsys):
    assert main(["analyze", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert "missing.json" in capsys.readouterr().err
    assert main(["analyze", str(manifest), "--criteria", "bogus"]) == EXIT_INPUT
    assert main(["compress", str(manifest), "--format", "cpd", "--ranks", "1,2"]) == EXIT_INPUT
    assert main(["nonsense"]) == EXIT_INPUT


def test_compress_cpd_and_reanalyze(manifest, tmp_path, capsys):
    out = tmp_path / "reduced.json"
    code = main(["compress", str(manifest), "--format", "cpd", "--ranks", "1,1,1", "--out", str(out), "--points", "64"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["parameters"] == 23
    assert report["hinf_relative_error"] <= 1e-10
    assert main(["analyze", str(out), "--criteria", "tucker,factored"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)["records"]
    assert rec[0]["verdict"] == "asymptotically_stable"


def test_compress_ttd(manifest, capsys):
    assert main(["compress", str(manifest), "--points", "64"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["format"] == "ttd"
    assert report["hinf_relative_error"] <= 1e-10


def test_compress_estimates_ranks(manifest, capsys, monkeypatch):
    monkeypatch.setenv("MLTI_SEED", "3")
    assert main(["compress", str(manifest), "--format", "cpd", "--points", "32"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["estimated_kronecker_ranks"] == [1, 1, 1]


def test_bad_seed_environment(manifest, monkeypatch):
    monkeypatch.setenv("MLTI_SEED", "abc")
    assert main(["compress", str(manifest)]) == EXIT_INPUT


def test_bode(manifest, unstable_manifest, capsys):
    assert main(["bode", str(manifest), "--points", "5"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 5
    assert list(rows[0]) == ["omega", "sigma_max"]
    assert float(rows[-1]["omega"]) == pytest.approx(np.pi)
    # 17 significant digits
    assert len(rows[1]["omega"].replace(".", "").lstrip("0")) >= 15
    assert main(["bode", str(unstable_manifest)]) == EXIT_NUMERICAL
    assert main(["bode", str(unstable_manifest), "--force", "--points", "3"]) == EXIT_OK


def test_bench_worked_example(capsys):
    assert main(["bench", "--experiment", "worked-example", "--strict"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["status"] == "PASS"
    assert list(rows[0])[-1] == "elapsed_seconds"


def test_bench_sigma_timing(capsys):
    assert main(["bench", "--experiment", "sigma-timing", "--sizes", "4,6"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [int(r["n"]) for r in rows] == [4, 6]
    assert all(float(r["relative_error"]) <= 1e-10 for r in rows)
    assert list(rows[0])[-2:] == ["ttd_seconds", "svd_seconds"]
