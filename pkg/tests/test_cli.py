import csv
import io
import json
import subprocess
import sys

import pytest

from simpsons import datasets
from simpsons.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main

PAPER_ARGS = ["--counts", "--treatment", "Drug:Yes:No", "--outcome", "Recovered:Yes"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--format", "json")
    assert code == EXIT_OK, err
    return json.loads(out)


@pytest.fixture
def table_csv(tmp_path):
    def copy(name):
        path = tmp_path / f"{name}.csv"
        path.write_text(datasets.data_path(name).read_text())
        return path

    return copy


def test_analyze_table4(table_csv):
    code, out, _ = run("analyze", table_csv("table4"), *PAPER_ARGS, "--strata", "Sex")
    assert code == EXIT_OK
    assert "200/400 50.0%" in out and "160/400 40.0%" in out
    assert "20/100 20.0%" in out and "90/300 30.0%" in out
    assert "180/300 60.0%" in out and "70/100 70.0%" in out
    assert "full reversal: true" in out


def test_analyze_table6_json(table_csv):
    doc = run_json("analyze", table_csv("table6"), *PAPER_ARGS, "--strata", "Sex,Age")
    res = doc["results"]
    assert res["full_reversal"] is True
    rates = sorted((s["treated_rate"], s["control_rate"]) for s in res["strata"])
    assert rates == pytest.approx([(0.3, 0.4), (0.4, 0.5), (0.6, 0.7), (0.8, 0.9)])


def test_analyze_aggregate_only(table_csv):
    code, out, _ = run("analyze", table_csv("table6"), *PAPER_ARGS)
    assert code == EXIT_OK
    assert "full reversal" not in out
    doc = run_json("analyze", table_csv("table6"), *PAPER_ARGS)
    assert doc["results"]["strata"] == [] and doc["results"]["full_reversal"] is False


def test_analyze_errors(tmp_path, table_csv):
    code, _, err = run("analyze", table_csv("table4"), *PAPER_ARGS, "--strata", "Age")
    assert code == EXIT_DATA and "Age" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("Drug,Recovered\nYes,No\nYes\n")
    code, _, err = run("analyze", bad, "--treatment", "Drug:Yes:No", "--outcome", "Recovered:Yes")
    assert code == EXIT_DATA and "row 2" in err
    empty_arm = tmp_path / "arm.csv"
    empty_arm.write_text("Drug,Recovered\nYes,No\nYes,Yes\n")
    code, _, err = run("analyze", empty_arm, "--treatment", "Drug:Yes:No", "--outcome", "Recovered:Yes")
    assert code == EXIT_DATA and "undefined" in err
    code, _, _ = run("analyze", tmp_path / "missing.csv")
    assert code == EXIT_DATA
    code, _, _ = run("analyze", table_csv("table4"), "--treatment", "Drug:Yes")
    assert code == EXIT_USAGE


def test_scan(table_csv):
    doc = run_json("scan", table_csv("table6"), *PAPER_ARGS, "--max-subset-size", 2)
    assert [h["subset"] for h in doc["results"]["hits"]] == [["Age"], ["Age", "Sex"]]
    doc = run_json("scan", table_csv("table4"), *PAPER_ARGS, "--max-subset-size", 1)
    assert [h["subset"] for h in doc["results"]["hits"]] == [["Sex"]]
    doc = run_json("scan", table_csv("table3"), *PAPER_ARGS, "--max-subset-size", 3)
    assert doc["results"]["hits"] == []
    assert run("scan", table_csv("table6"), *PAPER_ARGS, "--max-subset-size", 0)[0] == EXIT_USAGE


def test_generate_n3(tmp_path):
    npt = tmp_path / "npt.csv"
    doc = run_json("generate", "--n", 3, "--npt-out", npt)
    assert doc["results"]["certificate"]["paradox"] is True
    rows = list(csv.reader(npt.open()))
    assert [float(v) for v in rows[-1][1:]] == [0.52] * 4 + [0.9] * 4 + [0.48] * 4 + [0.8] * 4


def test_generate_spec_file_and_overrides(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n": 1, "p": 0.5, "q": 0.5}))
    doc = run_json("generate", "--spec", spec)
    assert doc["results"]["certificate"]["paradox"] is False
    assert doc["results"]["regime_warnings"]
    doc = run_json("generate", "--n", 1, "--p", 0.5, "--q", 0.5)
    assert doc["results"]["certificate"]["paradox"] is False


def test_generate_invalid_probability():
    code, _, err = run("generate", "--p1", 1.2)
    assert code == EXIT_USAGE and "p1" in err


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["--case", "2", "--d", "true"], 0.79968),
        (["--case", "1", "--xn", "true", "--d", "false"], 0.9),
        (["--case", "2", "--d", "false"], 0.52038),
    ],
)
def test_infer(argv, expected):
    doc = run_json("infer", *argv)
    assert doc["results"]["probability"] == pytest.approx(expected, abs=1e-12)


def test_infer_missing_args():
    assert run("infer", "--case", "1", "--d", "true")[0] == EXIT_USAGE
    assert run("infer", "--case", "3", "--d", "true")[0] == EXIT_USAGE


def test_simulate(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, err = run("simulate", "--n", 2, "--size", 800, "--seed", 42, "--out", path)
        assert code == EXIT_OK, err
    lines = a.read_text().splitlines()
    assert lines[0] == "X1,X2,Drug,Recovered" and len(lines) == 801
    assert a.read_bytes() == b.read_bytes()
    code, _, _ = run("simulate", "--size", 0, "--out", tmp_path / "c.csv")
    assert code == EXIT_USAGE


def test_simulate_output_feeds_analyze(tmp_path):
    path = tmp_path / "sim.csv"
    assert run("simulate", "--n", 1, "--size", 4000, "--seed", 0, "--out", path)[0] == EXIT_OK
    doc = run_json("analyze", path, "--strata", "X1")
    assert doc["results"]["aggregate"]["treated_total"] + doc["results"]["aggregate"]["control_total"] == 4000


def test_design():
    factors = [f"f{i}:2" for i in range(20)]
    doc = run_json("design", *factors, "--min-per-group", 50)
    assert doc["results"] == {"group_count": 1_048_576, "subjects_required": 52_428_800}
    doc = run_json("design", *factors[:19], "age:10", "--min-per-group", 50)
    assert doc["results"]["subjects_required"] == 262_144_000
    code, out, _ = run("design", *factors[:19], "age:10")
    assert "262,144,000" in out


def test_design_allocation(tmp_path):
    plan_csv = tmp_path / "plan.csv"
    doc = run_json("design", "drug:2", "sex:2", "--total", 800, "--plan-out", plan_csv)
    assert [g["size"] for g in doc["results"]["groups"]] == [200] * 4
    assert plan_csv.read_text().splitlines()[0] == "drug,sex,size"
    code, _, err = run("design", "drug:2", "sex:2", "--total", 801)
    assert code == EXIT_USAGE and "remainder 1" in err
    assert run("design", "drug:1")[0] == EXIT_USAGE
    assert run("design")[0] == EXIT_USAGE


def test_design_spec_file(tmp_path):
    spec = tmp_path / "design.json"
    spec.write_text(json.dumps({"factors": [{"name": "drug", "states": ["drug", "placebo"]}, {"name": "sex", "cardinality": 2}], "min_per_group": 200}))
    doc = run_json("design", "--spec", spec)
    assert doc["results"]["subjects_required"] == 800


@pytest.mark.parametrize(
    "argv",
    [
        ["generate", "--n", "3"],
        ["infer", "--case", "2", "--d", "true"],
        ["design", "drug:2", "sex:2", "--total", "800"],
    ],
)
def test_json_report_round_trip(argv):
    code, out, _ = run(*argv, "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert json.dumps(doc, indent=2, sort_keys=True) == out.rstrip("\n")
    assert set(doc) == {"command", "format", "inputs", "results"}


def test_unknown_command():
    assert run("frobnicate")[0] == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "simpsons", "infer", "--case", "1", "--xn", "true", "--d", "true"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "= 0.8" in proc.stdout
