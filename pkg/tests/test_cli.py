import csv
import io
import json

import pytest

from prp.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({
        "grid": {"k": 5, "d": 100}, "nodes": 50,
        "random_traffic": {"count": 4, "start": 1.5, "spacing": 0.1},
        "duration": 3.0,
    }))
    return path


def test_paths_listing(capsys):
    code, out, _ = run_cli(capsys, "paths", "0,0", "5,2", "--k", "10")
    assert code == EXIT_OK
    assert "case 1" in out.splitlines()[0]
    assert out.count("moves:") == 8
    assert "disjoint: true" in out
    assert "feasible: 3 of 8" in out


def test_paths_unbounded_all_feasible(capsys):
    code, out, _ = run_cli(capsys, "paths", "3,3", "6,4")
    assert code == EXIT_OK and "feasible: 8 of 8" in out and "[leaves grid]" not in out


def test_paths_small_grid(capsys):
    _, out, _ = run_cli(capsys, "paths", "0,0", "1,0", "--k", "2")
    assert "feasible: 3 of 8" in out


def test_paths_same_cell(capsys):
    code, _, err = run_cli(capsys, "paths", "3,3", "3,3")
    assert code == EXIT_USAGE and "same cell" in err


def test_paths_bad_cell(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["paths", "3;3", "1,1"])
    assert exc.value.code == EXIT_USAGE


def test_analyze_exit_prob(capsys):
    code, out, _ = run_cli(capsys, "analyze", "exit-prob", "--d", "100", "--s", "1", "--t", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK and rows[0] == ["p"]
    assert float(rows[1][0]) == pytest.approx(0.014, abs=5e-4)


def test_analyze_exit_prob_assumption(capsys):
    code, _, err = run_cli(capsys, "analyze", "exit-prob", "--d", "100", "--s", "100", "--t", "1")
    assert code == EXIT_USAGE and err


def test_analyze_figure(capsys):
    code, out, _ = run_cli(capsys, "analyze", "fig9")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0].startswith("#")
    assert lines[1] == "density,Pd_k10,Pd_k15,Pd_k20"


def test_analyze_all(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "analyze", "all", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"fig{i}.csv" for i in (10, 11, 12, 13, 9)]


def test_analyze_unknown(capsys):
    code, _, err = run_cli(capsys, "analyze", "fig99")
    assert code == EXIT_USAGE and "fig99" in err


def test_simulate(scenario, tmp_path, capsys):
    out_csv, trace = tmp_path / "m.csv", tmp_path / "t.jsonl"
    code, _, _ = run_cli(capsys, "simulate", str(scenario), "--seed", "4", "--out", str(out_csv),
                         "--trace", "--trace-file", str(trace))
    assert code == EXIT_OK
    row = next(csv.DictReader(out_csv.open()))
    assert row["seed"] == "4" and int(row["payloads_sent"]) == 32
    first = json.loads(trace.read_text().splitlines()[0])
    assert {"t", "node", "event"} <= first.keys()


def test_simulate_is_deterministic(scenario, capsys):
    a = run_cli(capsys, "simulate", str(scenario), "--trace")
    b = run_cli(capsys, "simulate", str(scenario), "--trace")
    assert a == b


def test_simulate_bad_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"grid": {"k": 5, "d": 100}, "loss": 2}))
    code, _, err = run_cli(capsys, "simulate", str(bad))
    assert code == EXIT_USAGE and "loss" in err


def test_sweep(scenario, capsys):
    code, out, _ = run_cli(capsys, "sweep", str(scenario), "--axis", "density", "--values", "1,2", "--seeds", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and [r["value"] for r in rows] == ["1.0", "2.0"]
    assert all(r["bound_static"] and r["message_ratio_mean"] for r in rows)


def test_sweep_non_numeric_axis(scenario, capsys):
    code, _, err = run_cli(capsys, "sweep", str(scenario), "--axis", "placement", "--values", "1")
    assert code == EXIT_USAGE and "placement" in err


def test_verify_subset(capsys):
    code, out, _ = run_cli(capsys, "verify", "--only", "1,3,5")
    assert code == EXIT_OK
    assert [line[:6] for line in out.splitlines()[:3]] == ["[PASS]"] * 3


def test_verify_reports_failure(capsys):
    code, out, _ = run_cli(capsys, "verify", "--only", "6")
    assert code == EXIT_VERIFY and out.startswith("[FAIL]")


def test_verify_unknown_check(capsys):
    code, _, _ = run_cli(capsys, "verify", "--only", "42")
    assert code == EXIT_USAGE


def test_missing_subcommand():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE
