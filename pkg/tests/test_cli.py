import json

import pytest

from factorbreaks.cli import main
from factorbreaks.montecarlo import DGPConfig, simulate_dgp


@pytest.fixture
def panel_csv(tmp_path):
    """Small two-regime panel written in the raw CSV layout (tcode row of 1s)."""
    cfg = DGPConfig(N=12, T=90, r=2, theta=1.0, break_type="W_ONLY",
                    omega=1.0, seed=21)
    panel, _ = simulate_dgp(cfg)
    path = tmp_path / "panel.csv"
    with open(path, "w") as fh:
        fh.write("date," + ",".join(panel.series_ids) + "\n")
        fh.write("," + ",".join(["1"] * 12) + "\n")
        for label, row in zip(panel.time_index, panel.values):
            fh.write(label + "," + ",".join(f"{x:.8f}" for x in row) + "\n")
    return path, cfg.k


def test_ingest(tmp_path, panel_csv):
    path, _ = panel_csv
    out = tmp_path / "out"
    assert main(["ingest", "--input", str(path), "--out", str(out)]) == 0
    assert (out / "panel.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "ingest"
    assert "version" in manifest


def test_test_command(tmp_path, panel_csv):
    path, k = panel_csv
    out = tmp_path / "run"
    code = main(["test", "--input", str(path), "--break", str(k),
                 "--factors", "2", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["r1"] == 2
    assert 0.0 <= report["factor_variance_test"]["p_value"] <= 1.0
    assert (out / "series.csv").exists()
    assert "Trace ratio" in (out / "summary.txt").read_text()


def test_test_command_break_label(tmp_path, panel_csv):
    path, k = panel_csv
    out = tmp_path / "run_label"
    # label of the k-th period (1-based k = index k-1 in the time index)
    label = f"t{k:04d}"
    code = main(["test", "--input", str(path), "--break", label,
                 "--factors", "2", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["break"]["k"] == k
    assert report["break"]["label"] == label


def test_test_command_rectangular(tmp_path, panel_csv):
    path, k = panel_csv
    out = tmp_path / "rect"
    code = main(["test", "--input", str(path), "--break", str(k),
                 "--factors", "3,2", "--out", str(out)])
    assert code == 0
    assert "rectangular" in (out / "summary.txt").read_text()


def test_missing_break_flag_exits_two(panel_csv):
    path, _ = panel_csv
    with pytest.raises(SystemExit) as exc:
        main(["test", "--input", str(path), "--factors", "2"])
    assert exc.value.code == 2


def test_bad_factors_exits_two(tmp_path, panel_csv):
    path, k = panel_csv
    code = main(["test", "--input", str(path), "--break", str(k),
                 "--factors", "two", "--out", str(tmp_path / "x")])
    assert code == 2


def test_numerical_failure_exit_one(tmp_path, panel_csv):
    path, k = panel_csv
    # request more factors than the cross-section supports
    code = main(["test", "--input", str(path), "--break", str(k),
                 "--factors", "12", "--out", str(tmp_path / "y")])
    assert code == 1


def test_simulate_json_grid(tmp_path):
    grid = {"level": 0.05,
            "cells": [{"N": 30, "T": 60, "r": 2, "break_type": "NONE"}]}
    gpath = tmp_path / "grid.json"
    gpath.write_text(json.dumps(grid))
    out = tmp_path / "sim"
    code = main(["simulate", "--grid", str(gpath), "--reps", "4",
                 "--threads", "1", "--out", str(out), "--r-max", "4"])
    assert code == 0
    rows = (out / "results.csv").read_text().strip().splitlines()
    assert len(rows) == 2


def test_simulate_reproducible(tmp_path):
    grid = {"cells": [{"N": 30, "T": 60, "r": 2, "break_type": "W_ONLY",
                       "omega": 1.0}]}
    gpath = tmp_path / "grid.json"
    gpath.write_text(json.dumps(grid))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["simulate", "--grid", str(gpath), "--reps", "4",
                     "--threads", "1", "--seed", "5", "--out", str(out),
                     "--r-max", "4"]) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_simulate_bundled_toml_grid(tmp_path):
    # bare file names fall back to the grids shipped with the package
    out = tmp_path / "t1"
    code = main(["simulate", "--grid", "table1.toml", "--reps", "2",
                 "--threads", "1", "--out", str(out), "--r-max", "4"])
    assert code == 0
    rows = (out / "results.csv").read_text().strip().splitlines()
    assert len(rows) == 9  # header + the 8 size cells


def test_simulate_bad_grid_exits_two(tmp_path):
    gpath = tmp_path / "grid.txt"
    gpath.write_text("nope")
    assert main(["simulate", "--grid", str(gpath), "--reps", "2",
                 "--out", str(tmp_path / "z")]) == 2
    assert main(["simulate", "--grid", str(tmp_path / "absent.json"),
                 "--reps", "2", "--out", str(tmp_path / "z2")]) == 2


def test_bootstrap_ci_command(tmp_path, panel_csv):
    path, k = panel_csv
    out = tmp_path / "ci"
    code = main(["bootstrap-ci", "--input", str(path), "--break", str(k),
                 "--factors", "2", "--reps", "100", "--seed", "3",
                 "--out", str(out)])
    assert code == 0
    ci = json.loads((out / "ci.json").read_text())
    assert ci["lower"] <= ci["upper"]
    assert ci["replications"] == 100


def test_r2_report(tmp_path, panel_csv):
    path, k = panel_csv
    cats = tmp_path / "cats.csv"
    lines = ["series_id,category"]
    for i in range(12):
        lines.append(f"s{i + 1:03d},{'real' if i < 6 else 'prices'}")
    cats.write_text("\n".join(lines) + "\n")
    out = tmp_path / "r2"
    code = main(["r2-report", "--input", str(path), "--break", str(k),
                 "--factors", "2", "--categories", str(cats), "--out", str(out)])
    assert code == 0
    table = (out / "r2.csv").read_text().strip().splitlines()
    assert table[0] == "category,n_series,r2_unrestricted,r2_restricted,gap"
    assert len(table) == 3
    series = (out / "r2_series.csv").read_text().strip().splitlines()
    assert len(series) == 13


def test_r2_report_missing_series_exits_two(tmp_path, panel_csv):
    path, k = panel_csv
    cats = tmp_path / "cats.csv"
    cats.write_text("series_id,category\ns001,real\n")
    code = main(["r2-report", "--input", str(path), "--break", str(k),
                 "--factors", "2", "--categories", str(cats),
                 "--out", str(tmp_path / "r2x")])
    assert code == 2


def test_missing_input_file_exits_two(tmp_path):
    code = main(["ingest", "--input", str(tmp_path / "ghost.csv"),
                 "--out", str(tmp_path / "o")])
    assert code == 2
