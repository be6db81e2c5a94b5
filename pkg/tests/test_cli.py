import json
import subprocess
import sys

from oversmoothing.cli import main


def test_run_plot_roundtrip(tmp_path, capsys):
    csv, svg, summary = tmp_path / "r.csv", tmp_path / "r.svg", tmp_path / "s.json"
    code = main(["run", "--methods", "gcn,gcn_pairnorm", "--depth", "4", "--seeds", "2",
                 "--dim", "8", "--out", str(csv), "--summary", str(summary)])
    assert code == 0
    assert "gcn_pairnorm" in capsys.readouterr().out
    assert set(json.loads(summary.read_text())) == {"gcn", "gcn_pairnorm"}
    assert main(["plot", str(csv), "--metric", "energy_unnorm", "--out", str(svg)]) == 0
    assert svg.read_text().startswith("<svg")


def test_run_custom_dataset(tmp_path):
    edges = tmp_path / "g.txt"
    edges.write_text("0 1\n1 2\n2 3\n3 0\n0 2\n")
    csv = tmp_path / "r.csv"
    assert main(["run", "--methods", "sage", "--depth", "3", "--seeds", "1", "--dim", "4",
                 "--dataset", str(edges), "--renormalize", "--out", str(csv)]) == 0
    assert len(csv.read_text().splitlines()) == 4


def test_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main(["run", "--methods", "nope", "--out", out]) == 2
    assert main(["run", "--depth", "0", "--out", out]) == 2
    assert main(["frobnicate"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 2\n")
    assert main(["run", "--dataset", str(bad), "--depth", "1", "--seeds", "1", "--out", out]) == 2
    assert "line 1" in capsys.readouterr().err


def test_plot_missing_file(tmp_path):
    assert main(["plot", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x.svg")]) == 1


def test_verify_exit_codes(tmp_path):
    report = tmp_path / "v.json"
    assert main(["verify", "--out", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert payload["passed"] and len(payload["checks"]) == 7
    assert main(["verify", "--out", str(report), "--sabotage", "kron"]) == 1
    assert not json.loads(report.read_text())["passed"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "oversmoothing", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verify" in proc.stdout
