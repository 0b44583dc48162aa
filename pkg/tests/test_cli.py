import csv
import json

import pytest

from detcp.cli import EXIT_NONDETERMINISM, main
from detcp.corpus import instance_path


def _run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_queens4(capsys):
    code, out, _ = _run(capsys, "solve", instance_path("queens4"), "--mode", "first", "--strategy", "spd",
                        "--workers", 4)
    assert code == 0
    assert out == "SAT;;q0=1,q1=3,q2=0,q3=2;10\n"


def test_missing_file(capsys, tmp_path):
    code, _, err = _run(capsys, "solve", tmp_path / "nosuch.dfzn")
    assert code == 3
    assert "nosuch.dfzn" in err


def test_parse_error_is_located(capsys, tmp_path):
    p = tmp_path / "bad.dfzn"
    p.write_text("var 0..3: x\nsolve satisfy;\n")
    code, _, err = _run(capsys, "solve", p)
    assert code == 3
    assert err.strip() == f"{p}:2:1: syntax error: expected ';', found 'solve'"


def test_unsat(capsys):
    code, out, _ = _run(capsys, "solve", instance_path("queens3_unsat"), "--mode", "first")
    assert (code, out) == (0, "UNSAT;;;\n")


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "x.dfzn", "--mode", "sideways"])
    assert exc.value.code == 2


def test_optimize_with_reports(capsys, tmp_path):
    stats, report = tmp_path / "s.csv", tmp_path / "r.json"
    code, out, _ = _run(capsys, "solve", instance_path("min_xy"), "--mode", "opt", "--workers", 3,
                        "--threshold", 2, "--stats-csv", stats, "--report-json", report, "--baseline")
    assert code == 0
    assert out == "OPTIMAL;0;x=0,y=3;0\n"
    assert len(list(csv.reader(stats.open()))) == 4
    data = json.loads(report.read_text())
    assert data["model"] == "min_xy" and data["workers"] == 3
    assert data["seq_wall_ns"] > 0 and data["speedup"] > 0


def test_all_mode_prints_every_solution(capsys):
    code, out, _ = _run(capsys, "solve", instance_path("queens4"), "--mode", "all", "--strategy", "seq")
    assert code == 0
    assert out.splitlines() == ["SAT;;q0=1,q1=3,q2=0,q3=2;10", "SAT;;q0=2,q1=0,q2=3,q3=1;110"]


def test_synth_best(capsys):
    code, out, _ = _run(capsys, "synth", "--shape", "best", "--depth", 6, "--workers", 2)
    assert code == 0
    assert out.strip().endswith(";111111")


def test_synth_bad_depth(capsys):
    code, _, err = _run(capsys, "synth", "--shape", "worst", "--depth", 31)
    assert code == 2
    assert "depth" in err


def test_imbalance_env(capsys, monkeypatch):
    monkeypatch.setenv("DETCP_IMBALANCE_MS", "nope")
    code, _, err = _run(capsys, "synth", "--shape", "worst", "--depth", 3)
    assert code == 2 and "DETCP_IMBALANCE_MS" in err
    monkeypatch.setenv("DETCP_IMBALANCE_MS", "2.5")
    code, _, _ = _run(capsys, "synth", "--shape", "worst", "--depth", 3)
    assert code == 0


def test_bench_matrix_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({
        "models": [str(instance_path("queens4"))], "workers": [1, 4], "strategies": ["spd"],
        "reps": 3, "csv_path": "out.csv",
    }))
    code, out, _ = _run(capsys, "bench", "--manifest", manifest)
    assert code == 0
    assert out.startswith("6 runs, 2 rows")
    assert len(list(csv.DictReader((tmp_path / "out.csv").open()))) == 2


def test_bench_single_run_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({
        "model_path": str(instance_path("min_xy")), "strategy": "spd", "mode": "opt", "workers": 2,
        "threshold_S0": 4, "imbalance_window_ms": 10, "stats_csv_path": "stats.csv",
    }))
    code, out, _ = _run(capsys, "bench", "--manifest", manifest)
    assert (code, out) == (0, "OPTIMAL;0;x=0,y=3;0\n")
    assert (tmp_path / "stats.csv").exists()


def test_bench_empty_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text('{"models": []}')
    code, out, _ = _run(capsys, "bench", "--manifest", manifest)
    assert code == 0 and out.startswith("0 runs, 0 rows")


def test_bench_bad_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text("{")
    code, _, err = _run(capsys, "bench", "--manifest", manifest)
    assert code == 3 and "invalid manifest" in err


def test_bench_determinism_violation_exit(capsys, tmp_path, monkeypatch):
    import detcp.bench as bench_mod

    real = bench_mod.run

    def tampered(problem, mode, strategy="spd", workers=4, cfg=None):
        out = real(problem, mode, strategy, workers, cfg)
        if strategy == "spd":
            out.solutions = []
        return out

    monkeypatch.setattr(bench_mod, "run", tampered)
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"models": [str(instance_path("queens4"))], "workers": [2]}))
    code, _, err = _run(capsys, "bench", "--manifest", manifest)
    assert code == EXIT_NONDETERMINISM
    assert "differs from sequential" in err
