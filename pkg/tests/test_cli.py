import csv
import json

import pytest

from fracstable.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return main(list(argv) + ["--out", str(out)]), out


def write_cfg(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return str(path)


def test_verify_mass_suite(tmp_path):
    cfg = write_cfg(tmp_path, {"task": "verify"})
    code, out = run(tmp_path, "verify", "--suite", "mass", "--config", cfg)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    mass_checks = [c for c in report["checks"] if "mass" in c["name"]]
    assert len(mass_checks) >= 2
    assert all(c["passed"] for c in mass_checks)
    manifest = json.loads((out / "manifest.json").read_text())
    assert "report.json" in manifest["checksums"]


def test_malformed_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run(tmp_path, "verify", "--config", str(bad))
    assert code == 2


def test_unknown_key_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"task": "verify", "bogus": 1})
    code, _ = run(tmp_path, "verify", "--config", cfg)
    assert code == 2


def test_task_mismatch_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"task": "solve"})
    code, _ = run(tmp_path, "verify", "--config", cfg)
    assert code == 2


def test_insufficient_fit_points_exit_1(tmp_path):
    cfg = write_cfg(tmp_path, {"task": "fit-decay", "times": [1.0, 2.0, 4.0]})
    code, out = run(tmp_path, "fit-decay", "--config", cfg)
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert report["error"] == "InsufficientPoints"


def test_ml_eval_csv(tmp_path):
    cfg = write_cfg(tmp_path, {"task": "ml-eval", "alpha": 0.5, "delta": 1.0,
                               "arguments": [0.5, 100.0]})
    code, out = run(tmp_path, "ml-eval", "--config", cfg, "--emit-csv")
    assert code == 0
    with open(out / "ml-eval.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    regimes = {r["regime"] for r in rows}
    assert "series" in regimes and "asymptotic" in regimes


def test_simulate_deterministic_manifest(tmp_path):
    args = ["simulate", "--alpha", "0.5", "--beta", "1.0", "--t", "1.0",
            "--n", "20000", "--seed", "123"]
    code1, out1 = main(args + ["--out", str(tmp_path / "a")]), tmp_path / "a"
    code2, out2 = main(args + ["--out", str(tmp_path / "b")]), tmp_path / "b"
    assert code1 == 0 and code2 == 0
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["checksums"] == m2["checksums"]


def test_strict_failure_exit_1(tmp_path):
    # the coarse level list leaves the subcritical norm still changing by
    # more than 1%, so the classification mismatch trips strict mode
    cfg = write_cfg(tmp_path, {"task": "scan-critical",
                               "params": {"alpha": 0.5, "beta": 1.5, "gamma": 2.0,
                                          "lambda": 0.0, "dimension": 2},
                               "p_list": [2.0],
                               "levels": [64, 256, 1024]})
    code, out = run(tmp_path, "scan-critical", "--config", cfg, "--strict")
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is False
    assert code == 1
