import json

import pytest

import app


def _files(directory):
    return sorted(p.name for p in directory.iterdir())


def test_verify_writes_a_passing_report(tmp_path):
    code = app.main(["verify", "flat_sheet", "--out", str(tmp_path)])
    assert code == 0
    assert {"report.json", "report.txt", "report.svg"} <= set(_files(tmp_path))
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is True
    assert "duration_s" not in report
    assert (tmp_path / "report.svg").read_text().startswith("<svg")


def test_verify_dump_writes_frames_and_stress(tmp_path):
    assert app.main(["verify", "circle", "--dump", "--out", str(tmp_path)]) == 0
    for name in ("tangents.csv", "normals.csv", "stress.csv"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "normals.csv").read_text().splitlines()[0] == "point,I,mu,value"


def test_zero_step_run_writes_one_row(tmp_path):
    code = app.main(["run", "straight_string", "--n", "32", "--steps", "0", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "charges.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("tau,P0,P1,P2,P3,M01")
    diagnostics = (tmp_path / "diagnostics.csv").read_text().splitlines()
    assert diagnostics[0].split(",")[:3] == ["tau", "step", "constraint_plus"]
    assert json.loads((tmp_path / "config.json").read_text())["steps"] == 0


def test_runs_are_byte_identical(tmp_path):
    outputs = []
    for name in ("first", "second"):
        directory = tmp_path / name
        app.main(["run", "straight_string", "--n", "32", "--steps", "4", "--cadence", "2", "--out", str(directory)])
        outputs.append(
            [(directory / f).read_bytes() for f in ("config.json", "charges.csv", "diagnostics.csv", "report.json")]
        )
    assert outputs[0] == outputs[1]


def test_report_reassembles_a_run(tmp_path):
    app.main(["run", "straight_string", "--n", "32", "--steps", "2", "--out", str(tmp_path)])
    first = json.loads((tmp_path / "report.json").read_text())
    assert app.main(["report", str(tmp_path)]) == 0
    second = json.loads((tmp_path / "report.json").read_text())
    assert second["command"] == "report"
    assert second["checks"] == first["checks"]


def test_config_file_argument(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "flat_sheet", "n": 32}))
    assert app.main(["verify", str(cfg), "--out", str(tmp_path / "out")]) == 0


def test_sweep_writes_table(tmp_path):
    code = app.main(["sweep", "circle", "--grids", "16,32,64", "--out", str(tmp_path)])
    assert code == 0
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header == "quantity,n,h,error,order_fit,order_pairwise"
    assert (tmp_path / "sweep.svg").exists()


def test_cfl_violation_fails_the_run(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "straight_string", "n": 32, "dtau": 1.0, "steps": 1}))
    assert app.main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 1
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "exceeds" in report["error"]


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        app.main(["explode"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        app.main(["verify", "flat_sheet", "--frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        app.main(["sweep", "circle", "--grids", "64"])
    assert exc.value.code == 2
    assert app.main(["verify", "no_such_scenario", "--out", str(tmp_path)]) == 2
