import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from odometer_oe.cli import main
from odometer_oe.reporting import load_schema


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def plan_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("plan")
    assert main(["plan", "--target-x", "2^inf", "--target-y", "3^inf", "--depth", "6", "--out", str(out)]) == 0
    return out


def test_plan_outputs(plan_dir):
    jsonschema.validate(read_json(plan_dir / "plan.json"), load_schema("plan"))
    jsonschema.validate(read_json(plan_dir / "certificate.json"), load_schema("certificate"))
    jsonschema.validate(read_json(plan_dir / "manifest.json"), load_schema("manifest"))
    assert read_json(plan_dir / "certificate.json")["passed"] is True


def test_plan_stdout(capsys):
    assert main(["plan", "--target-x", "2^inf", "--target-y", "3^inf", "--depth", "3", "--delta", "1000000"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["plan"]["ks"] == ["1", "1", "2", "3", "8"]
    assert obj["certificate"]["passed"] is True


def test_plan_exit_codes(tmp_path):
    base = ["plan", "--target-x", "2^inf", "--target-y", "3^inf"]
    assert main(base + ["--omega", "power:1"]) == 2
    assert main(["plan", "--target-x", "2^2", "--target-y", "3^inf", "--out", str(tmp_path)]) == 4
    assert main(base + ["--depth", "1"]) == 64
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--target-x", "2^inf"])
    assert exc.value.code == 64


def test_verify_reference(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--ks", "2,3,8,27", "--omega", "power:1/2", "--omega", "log", "--out", str(out)]) == 0
    for name in ("report.json", "report.csv", "defect_vs_level.csv", "norm_vs_level.csv", "manifest.json"):
        assert (out / name).exists()
    jsonschema.validate(read_json(out / "report.json"), load_schema("report"))
    with open(out / "defect_vs_level.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    diag = [r for r in rows if r["kind"] == "diagram_defect" and r["level"] == "2"]
    assert diag and diag[0]["measure"] == "1/6" and diag[0]["bound"] == "2/3"


def test_verify_names_violation(tmp_path, capsys):
    assert main(["verify", "--ks", "2,3,4,27", "--out", str(tmp_path)]) == 1
    rep = read_json(tmp_path / "report.json")
    assert any(c["name"] == "k_{n+1} > k_{n-1}k_n" and not c["passed"] for c in rep["checks"])


def test_verify_strict_cap(tmp_path):
    args = ["verify", "--ks", "2,3,8,27", "--max-enumeration", "50", "--out", str(tmp_path)]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 3


def test_simulate_and_report(plan_dir, tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["simulate", "--plan", str(plan_dir / "plan.json"), "--samples", "500", "--seed", "1",
                 "--out", str(out)]) == 0
    summary = read_json(out / "summary.json")
    jsonschema.validate(summary, load_schema("summary"))
    assert summary["passed"] is True
    with open(out / "samples.csv", newline="") as fh:
        assert len(list(csv.DictReader(fh))) == 1000
    capsys.readouterr()
    assert main(["report", "--dir", str(out)]) == 0
    assert "simulate" in capsys.readouterr().out
    assert main(["report", "--dir", str(tmp_path / "missing")]) == 64


def test_simulate_rejects_bare_sequence(tmp_path):
    path = tmp_path / "ks.json"
    path.write_text(json.dumps(["1", "1", "2", "3", "8", "27", "224"]))
    assert main(["simulate", "--plan", str(path), "--out", str(tmp_path / "o")]) == 64


def test_fuzz_subcommand(tmp_path):
    assert main(["fuzz", "--count", "5", "--seed", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fuzz.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "odometer_oe.cli", "verify", "--ks", "2,3,8,27",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_simulate_zero_samples(plan_dir, tmp_path):
    out = tmp_path / "z"
    assert main(["simulate", "--plan", str(plan_dir / "plan.json"), "--samples", "0", "--out", str(out)]) == 0
    with open(out / "samples.csv", newline="") as fh:
        assert list(csv.DictReader(fh)) == []
    assert read_json(out / "summary.json")["estimates"] == {}
