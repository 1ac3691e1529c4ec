import csv
import json

import pytest

from rabigates.cli import main
from rabigates.config import build_config
from rabigates.experiments import (
    CONVERGENCE_COLUMNS,
    max_workers,
    run_scenario,
)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def small_convergence(out, **extra):
    values = {"chi": [0.2, 0.1], "rounds": [20, 10], "dim": 40, "out": str(out)}
    values.update(extra)
    return build_config("convergence", values)


def test_convergence_output_format(tmp_path):
    res = run_scenario(small_convergence(tmp_path))
    path = tmp_path / "convergence.csv"
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    rows = read_rows(path)
    assert tuple(rows[0]) == CONVERGENCE_COLUMNS
    # sorted by parameter tuple regardless of the order given
    assert [(r["chi"], r["R"]) for r in rows] == [("0.10000000000000001", "10"), ("0.10000000000000001", "20"),
                                                  ("0.20000000000000001", "10"), ("0.20000000000000001", "20")]
    assert all(float(r["F"]) > 0.99 for r in rows)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["files"] == ["convergence.csv"]
    assert man["qubit_convention"] == {"ground_is_plus_z": True}
    assert len(man["points"]) == 4 and {"t1", "t2", "chi", "R"} <= set(man["points"][0])
    assert res.ok


def test_rows_are_bit_identical_across_worker_counts(tmp_path, monkeypatch):
    monkeypatch.setenv("RABIGATES_MAX_WORKERS", "1")
    run_scenario(small_convergence(tmp_path / "a"))
    monkeypatch.setenv("RABIGATES_MAX_WORKERS", "3")
    run_scenario(small_convergence(tmp_path / "b"))
    a = (tmp_path / "a" / "convergence.csv").read_bytes()
    assert a == (tmp_path / "b" / "convergence.csv").read_bytes()


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("RABIGATES_MAX_WORKERS", "2")
    assert max_workers() == 2
    monkeypatch.setenv("RABIGATES_MAX_WORKERS", "many")
    assert max_workers() >= 1


def test_row_errors_do_not_stop_the_run(tmp_path):
    res = run_scenario(small_convergence(tmp_path, chi=[10.0, 0.1], rounds=[1]))
    rows = read_rows(tmp_path / "convergence.csv")
    bad = [r for r in rows if r["error"]]
    assert len(bad) == 1 and "StrengthOutOfRange" in bad[0]["error"] and bad[0]["trusted"] == "0"
    assert float([r for r in rows if not r["error"]][0]["F"]) > 0.9
    assert not res.ok


def test_region_map_excludes_untrusted_cells(tmp_path):
    cfg = build_config("region_map", {"alpha": [0.0, 2.0], "chi": [0.1], "rounds": [10, 20], "dim": 20,
                                      "guard": 4, "out": str(tmp_path)})
    res = run_scenario(cfg)
    rows = read_rows(tmp_path / "region_map.csv")
    far = [r for r in rows if r["alpha"] == "2"]
    assert far and all(r["trusted"] == "0" and "ExcessLeakage" in r["error"] for r in far)
    counts = read_rows(tmp_path / "region_counts.csv")
    assert [c["trusted_cells"] for c in counts] == ["1", "1"]
    assert res.extra["counts"][0]["pass_F_count"] <= 1


def test_region_map_vacuum_column_equals_convergence(tmp_path):
    common = {"chi": [0.2], "rounds": [20], "dim": 40}
    run_scenario(build_config("region_map", {**common, "alpha": [0.0], "out": str(tmp_path / "m")}))
    run_scenario(build_config("convergence", {**common, "out": str(tmp_path / "c")}))
    m = read_rows(tmp_path / "m" / "region_map.csv")[0]
    c = read_rows(tmp_path / "c" / "convergence.csv")[0]
    assert (m["F"], m["F_perp"]) == (c["F"], c["F_perp"])


def test_wigner_cuts_files(tmp_path):
    cfg = build_config("wigner_cuts", {"chi": [0.2], "rounds": [18], "dim": 60, "n_p": 81, "out": str(tmp_path)})
    res = run_scenario(cfg)
    cut = read_rows(tmp_path / "cut_chi0.2_R18.csv")
    assert list(cut[0]) == ["p", "W_ideal", "W_engineered"] and len(cut) == 81
    assert min(float(r["W_engineered"]) for r in cut) < 0
    summary = read_rows(tmp_path / "wigner_summary.csv")[0]
    assert float(summary["Linf_cut_distance"]) < 0.1 / 3.14159
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(man["files"]) == ["cut_chi0.2_R18.csv", "wigner_summary.csv"]
    assert res.rows[0]["trusted"]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["convergence", "--rounds", "0", "--out", str(tmp_path)]) == 2
    assert main(["convergence", "--dim", "ten", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as err:
        main(["convergence", "--unknown-flag"])
    assert err.value.code == 2
    assert main(["convergence", "--chi", "0.1", "--rounds", "10", "--dim", "30", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "convergence.csv").exists()


def test_cli_config_file_with_override(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text(f'chi = [0.3]\nrounds = [10]\ndim = 30\nout = "{tmp_path / "x"}"\n')
    assert main(["convergence", "--config", str(conf), "--chi", "0.1", "--ground-minus-z"]) == 0
    man = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert man["config"]["chi"] == [0.1] and man["qubit_convention"]["ground_is_plus_z"] is False


@pytest.mark.slow
def test_verify_default_passes(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    assert "all invariants pass" in capsys.readouterr().out


def test_verify_reports_leakage_at_tiny_cutoff(tmp_path, capsys):
    code = main(["verify", "--dim", "8", "--alpha", "2", "--trials", "5", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL  coherent_state[alpha=2]" in out and "ExcessLeakage" in out


def test_verify_flags_tampered_convention(tmp_path, capsys):
    run_scenario(small_convergence(tmp_path / "run"))
    path = tmp_path / "run" / "manifest.json"
    assert main(["verify", "--trials", "5", "--manifest", str(path), "--out", str(tmp_path / "v1")]) == 0
    man = json.loads(path.read_text())
    man["qubit_convention"]["ground_is_plus_z"] = False
    path.write_text(json.dumps(man))
    capsys.readouterr()
    assert main(["verify", "--trials", "5", "--manifest", str(path), "--out", str(tmp_path / "v2")]) == 1
    assert "chi-sign inconsistency" in capsys.readouterr().out


@pytest.mark.slow
def test_half_ratio_clears_coherent_window(tmp_path):
    # |t2/t1| = 1/2 cancels the leading fifth-order phase error of each round
    grid = build_config("region_map")
    cfg = build_config("region_map", {
        "alpha": [a for a in grid.alpha if a <= 1.0],
        "chi": [c for c in grid.chi if c <= 0.3],
        "rounds": [100], "ratio": 0.5, "out": str(tmp_path),
    })
    rows = run_scenario(cfg).rows
    assert len(rows) == 77
    assert min(r["F"] for r in rows) > 0.99
