"""End-to-end CLI contract: files, formats, exit codes, concurrency caps."""

import json
import os

import numpy as np
import pytest

from habitpath.cli import RunRecord, main, path_csv_text, read_path_csv
from habitpath.presets import figure_preset
from habitpath.svg import render_chart

BASELINE = {"horizon_N": 20, "rho": 0.03, "W0": 1e6, "c0": 1e5,
            "utility": {"family": "MULT_HABIT", "gamma": 0.5, "beta": 1.0}}


def write_cfg(tmp_path, payload, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload), encoding="utf-8")
    return str(p)


def test_solve_writes_artifacts_and_exits_zero(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    out = tmp_path / "out"
    assert main(["solve", cfg, "-o", str(out), "--svg"]) == 0
    assert (out / "path.csv").exists()
    assert (out / "result.json").exists()
    assert (out / "plot.svg").exists()

    rec = json.loads((out / "result.json").read_text())
    assert rec["result"]["converged"] is True
    assert len(rec["result"]["path"]) == 20
    assert set(rec["metrics"]) == {"first_jump", "last_jump", "argmax_t", "unimodal",
                                   "trough_t", "end_mass", "slope", "slope_residual"}

    text = (out / "path.csv").read_bytes()
    assert b"\r" not in text  # LF only
    header = text.decode().splitlines()[0]
    assert header == "t,c_t,habit_t,C_t,felicity_t,discount_t"
    assert len(text.decode().splitlines()) == 21


def test_path_csv_round_trips_bit_exactly(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    out = tmp_path / "out"
    main(["solve", cfg, "-o", str(out)])
    rec = json.loads((out / "result.json").read_text())
    reread = read_path_csv(str(out / "path.csv"))
    np.testing.assert_array_equal(reread, np.array(rec["result"]["path"]))


def test_solve_config_error_names_field(tmp_path, capsys):
    bad = dict(BASELINE, horizon_N=0)
    cfg = write_cfg(tmp_path, bad)
    assert main(["solve", cfg, "-o", str(tmp_path / "o")]) == 1
    assert "horizon_N" in capsys.readouterr().err


def test_solve_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.json"), "-o", str(tmp_path)]) == 1


def test_solve_infeasible_start(tmp_path, capsys):
    bad = dict(BASELINE,
               utility={"family": "ADD_HABIT_CRRA", "gamma": 0.5, "b": 5.0})
    cfg = write_cfg(tmp_path, bad)
    out = tmp_path / "out"
    assert main(["solve", cfg, "-o", str(out)]) == 2
    assert "period 1" in capsys.readouterr().err
    rec = json.loads((out / "result.json").read_text())
    assert rec["result"]["error"] == "INFEASIBLE_START"
    assert rec["result"]["converged"] is False
    assert rec["result"]["domain_hits"] > 0
    assert not (out / "path.csv").exists()


def test_svg_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["solve", cfg, "-o", str(a), "--svg"])
    main(["solve", cfg, "-o", str(b), "--svg"])
    assert (a / "plot.svg").read_bytes() == (b / "plot.svg").read_bytes()

    t = np.arange(1, 6, dtype=float)
    c1 = render_chart("x", "t", "c", [("k", t, t * 2.0)])
    c2 = render_chart("x", "t", "c", [("k", t, t * 2.0)])
    assert c1 == c2
    assert "timestamp" not in c1.lower()


def test_figure_four_passes(tmp_path):
    out = tmp_path / "fig4"
    assert main(["figure", "4", "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["all_passed"] is True
    assert len(summary["curves"]) == 3
    assert (out / "figure4.svg").exists()
    for entry in summary["curves"]:
        assert (out / entry["csv"]).exists()


def test_figure_three_reports_infeasible_curve(tmp_path):
    out = tmp_path / "fig3"
    assert main(["figure", "3", "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    by_label = {e["label"]: e for e in summary["curves"]}
    assert by_label["CRRA b=5"]["error"] == "INFEASIBLE_START"
    assert by_label["CRRA b=5"]["passed"] is True  # flagged curve fails honestly
    assert "csv" not in by_label["CRRA b=5"]
    assert by_label["CARA b=1"]["converged"] is True


def test_figure_one_flags_pathological_curves(tmp_path):
    out = tmp_path / "fig1"
    assert main(["figure", "1", "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    flags = {e["label"]: e["pathological"] for e in summary["curves"]}
    assert flags == {"d=0": False, "d=0.25": True, "d=0.5": True,
                     "d=0.75": True, "d=1": True}
    assert all(e["passed"] for e in summary["curves"])


def test_figure_bad_id(tmp_path, capsys):
    assert main(["figure", "9", "-o", str(tmp_path)]) == 1
    assert "figure id" in capsys.readouterr().err


def test_all_presets_validate():
    for fid in range(1, 8):
        preset = figure_preset(fid)
        assert preset.id == fid and len(preset.curves) >= 2
        for curve in preset.curves:
            assert curve.scenario.resolved


def test_sweep_rows_and_lossless_records(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    out = tmp_path / "sw"
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "0,0.5,1,2", "-o", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 5
    assert lines[0].startswith("index,utility.beta,converged,iterations,objective")

    raw = json.loads((out / "records.json").read_text())
    assert len(raw) == 4
    records = [RunRecord.from_dict(r) for r in raw]
    assert [r.to_dict() for r in records] == raw  # lossless round trip
    assert all(r.result.converged for r in records)


def test_sweep_single_value_matches_solve(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    solo, sw = tmp_path / "solo", tmp_path / "sw1"
    main(["solve", cfg, "-o", str(solo)])
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "1", "-o", str(sw)]) == 0
    solve_rec = json.loads((solo / "result.json").read_text())
    sweep_rec = json.loads((sw / "records.json").read_text())[0]
    assert sweep_rec["result"]["path"] == solve_rec["result"]["path"]
    assert sweep_rec["result"]["objective"] == solve_rec["result"]["objective"]


def test_sweep_fails_fast_before_solving(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASELINE)
    out = tmp_path / "sw_bad"
    # second value is invalid (beta < 0): nothing gets written
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "1,-2", "-o", str(out)]) == 1
    assert "utility.beta" in capsys.readouterr().err
    assert not out.exists()


def test_sweep_unknown_param(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASELINE)
    assert main(["sweep", cfg, "--param", "utility.zeta",
                 "--values", "1", "-o", str(tmp_path / "x")]) == 1
    assert "utility.zeta" in capsys.readouterr().err


def test_sweep_peer_exponent_ordering(tmp_path):
    payload = {"horizon_N": 20, "rho": 0.03, "W0": 1e6, "c0": 1e5,
               "utility": {"family": "CUJ_MULT", "gamma": 0.5, "D": 0.0},
               "percapita": {"kind": "LINEAR", "C0": 1e5, "doubling_years": 30.0}}
    cfg = write_cfg(tmp_path, payload)
    out = tmp_path / "swD"
    assert main(["sweep", cfg, "--param", "utility.D",
                 "--values", "0,0.5,1", "-o", str(out)]) == 0
    recs = json.loads((out / "records.json").read_text())
    paths = [np.array(r["result"]["path"]) for r in recs]
    # stronger peer reference tilts consumption toward early years
    assert paths[0][-1] > paths[1][-1] > paths[2][-1]
    assert paths[0][0] < paths[1][0] < paths[2][0]


def test_threads_env_cap(tmp_path, monkeypatch, capsys):
    cfg = write_cfg(tmp_path, BASELINE)
    monkeypatch.setenv("HABITPATH_THREADS", "junk")
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "1,2", "-o", str(tmp_path / "t1")]) == 1
    assert "HABITPATH_THREADS" in capsys.readouterr().err

    monkeypatch.setenv("HABITPATH_THREADS", "0")
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "1,2", "-o", str(tmp_path / "t2")]) == 1

    monkeypatch.setenv("HABITPATH_THREADS", "1")
    out = tmp_path / "t3"
    assert main(["sweep", cfg, "--param", "utility.beta",
                 "--values", "1,2", "-o", str(out)]) == 0
    assert (out / "sweep.csv").exists()


def test_parallel_and_serial_outputs_agree(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, BASELINE)
    serial, parallel = tmp_path / "s", tmp_path / "p"
    monkeypatch.setenv("HABITPATH_THREADS", "1")
    main(["sweep", cfg, "--param", "utility.beta", "--values", "0.5,1,2",
          "-o", str(serial)])
    monkeypatch.setenv("HABITPATH_THREADS", "3")
    main(["sweep", cfg, "--param", "utility.beta", "--values", "0.5,1,2",
          "-o", str(parallel)])
    a = json.loads((serial / "records.json").read_text())
    b = json.loads((parallel / "records.json").read_text())
    for ra, rb in zip(a, b):
        assert ra["result"]["path"] == rb["result"]["path"]


def test_nonconverged_solve_exits_two(tmp_path, capsys):
    payload = {"horizon_N": 20, "rho": 0.0, "W0": 1e6, "c0": 1e5,
               "utility": {"family": "SHORT_MEMORY", "gamma": 0.5, "d": 1.0}}
    cfg = write_cfg(tmp_path, payload)
    out = tmp_path / "o"
    assert main(["solve", cfg, "-o", str(out)]) == 2
    assert "NOT_CONVERGED" in capsys.readouterr().err
    rec = json.loads((out / "result.json").read_text())
    assert rec["result"]["converged"] is False
    assert (out / "path.csv").exists()  # best path still reported


def test_csv_text_single_row_scenario(tmp_path):
    from habitpath.core import ScenarioConfig, UtilitySpec, validate_config
    cfg = validate_config(ScenarioConfig(
        horizon_N=1, rho=0.03, W0=1e6, c0=1e5,
        utility=UtilitySpec(family="SEPARABLE_CRRA", gamma=0.5)))
    text = path_csv_text(cfg, np.array([1e6]))
    assert text.count("\n") == 2
    assert text.splitlines()[1].startswith("1,1000000")
    p = tmp_path / "one.csv"
    p.write_text(text, encoding="utf-8")
    np.testing.assert_array_equal(read_path_csv(str(p)), np.array([1e6]))
