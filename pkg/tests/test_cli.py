import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import photonfilter.cli as cli
from photonfilter.config import RunConfig
from photonfilter.errors import InvariantViolationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="module")
def homodyne_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("hd")
    rc = cli.main(["--config", str(CONFIGS / "homodyne_clean.cfg"),
                   "--out", str(out), "--trajectories", "6", "--seed", "5",
                   "--quiet"])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def counting_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("pc")
    rc = cli.main(["--config", str(CONFIGS / "counting_mixed.cfg"),
                   "--out", str(out), "--trajectories", "5", "--seed", "1",
                   "--quiet"])
    assert rc == 0
    return out


def test_master_only_bundle(tmp_path, capsys):
    rc = cli.main(["--config", str(CONFIGS / "homodyne_clean.cfg"),
                   "--out", str(tmp_path), "--master-only"])
    assert rc == 0
    lines = (tmp_path / "trajectories.csv").read_text().splitlines()
    assert lines[0] == "t, pe_master"
    assert len(lines) == 10002
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["master_only"] is True
    assert summary["peak_master_pe"] == pytest.approx(0.80, abs=0.01)
    assert summary["peak_master_time"] == pytest.approx(5.0, abs=0.05)
    assert not (tmp_path / "jumps.csv").exists()
    assert "peak master pe" in capsys.readouterr().out


def test_trajectory_csv_shape(homodyne_run):
    lines = (homodyne_run / "trajectories.csv").read_text().splitlines()
    header = lines[0].split(", ")
    assert header == (["t", "pe_mean", "pe_stderr", "pe_master"]
                      + [f"pe_traj_{i}" for i in range(6)])
    assert len(lines) == 10002
    for line in lines[1:]:
        cells = line.split(", ")
        assert len(cells) == 4 + 6
        values = [float(c) for c in cells]
        assert all(np.isfinite(values))
    # 9-significant-digit float format
    row = lines[5000].split(", ")
    assert all(c == f"{float(c):.9g}" for c in row)


def test_summary_echo_reparses_identically(homodyne_run):
    summary = json.loads((homodyne_run / "summary.json").read_text())
    echoed = RunConfig.from_dict(summary["config"])
    want = RunConfig.load(CONFIGS / "homodyne_clean.cfg").with_overrides(
        n_traj=6, seed=5)
    assert echoed == want
    assert summary["aborted"] == 0
    assert summary["n_trajectories"] == 6
    assert summary["wall_time_s"] > 0


def test_no_click_file_for_pure_homodyne(homodyne_run):
    assert not (homodyne_run / "jumps.csv").exists()


def test_click_file_shape(counting_run):
    lines = (counting_run / "jumps.csv").read_text().splitlines()
    assert lines[0] == "traj_index, jump_time"
    summary = json.loads((counting_run / "summary.json").read_text())
    assert summary["jumps"]["total"] == len(lines) - 1
    for line in lines[1:]:
        idx, t = line.split(", ")
        assert 0 <= int(idx) < 5
        assert 0.0 < float(t) < 10.0


def test_counting_summary_statistics(counting_run):
    summary = json.loads((counting_run / "summary.json").read_text())
    js = summary["jumps"]
    assert js["min"] <= js["mean"] <= js["max"]
    assert summary["expected_jumps"] == pytest.approx(0.4946, abs=0.01)


def test_invalid_scheme_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(json.dumps({"scheme": "teleport"}))
    rc = cli.main(["--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1
    assert "scheme" in capsys.readouterr().err


def test_malformed_json_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("{")
    rc = cli.main(["--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_missing_required_flag_exits_1():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1


def test_unknown_scheme_flag_exits_1():
    with pytest.raises(SystemExit) as exc:
        cli.main(["--config", "x.cfg", "--scheme", "teleport"])
    assert exc.value.code == 1


def test_runtime_invariant_violation_exits_2(tmp_path, monkeypatch, capsys):
    def explode(*args, **kwargs):
        raise InvariantViolationError("synthetic failure", step=3)

    monkeypatch.setattr(cli, "run_ensemble", explode)
    rc = cli.main(["--config", str(CONFIGS / "homodyne_clean.cfg"),
                   "--out", str(tmp_path)])
    assert rc == 2
    assert "invariant" in capsys.readouterr().err


def test_unwritable_output_exits_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("data")
    rc = cli.main(["--config", str(CONFIGS / "homodyne_clean.cfg"),
                   "--out", str(blocker / "sub")])
    assert rc == 3
    assert "I/O" in capsys.readouterr().err


def test_missing_config_file_exits_3(tmp_path, capsys):
    rc = cli.main(["--config", str(tmp_path / "nope.cfg"),
                   "--out", str(tmp_path)])
    assert rc == 3


def test_quiet_suppresses_stdout(tmp_path, capsys):
    rc = cli.main(["--config", str(CONFIGS / "homodyne_clean.cfg"),
                   "--out", str(tmp_path), "--master-only", "--quiet"])
    assert rc == 0
    assert capsys.readouterr().out == ""


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        ["photonfilter", "--config", str(CONFIGS / "homodyne_clean.cfg"),
         "--out", str(tmp_path), "--master-only", "--quiet"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "summary.json").exists()


def test_all_shipped_configs_parse():
    for name in ("homodyne_clean", "homodyne_mixed", "counting_mixed",
                 "counting_pure"):
        cfg = RunConfig.load(CONFIGS / f"{name}.cfg")
        assert cfg.dim == 2
        assert cfg.observables == ("pe",)
