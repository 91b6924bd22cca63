import json

from lindbench.cli import main
from lindbench.lattice import CATALOG

CONFIG = """
seed = 1
boxes = [2]
analyses = ["gap", "fixed_point"]

[model]
name = "independent_amplitude_damping"
"""


def _write(tmp_path, text=CONFIG):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return p


def test_list_models(capsys):
    assert main(["list-models"]) == 0
    out = capsys.readouterr().out
    for name in CATALOG:
        assert name in out


def test_run_writes_report(tmp_path, capsys):
    cfg = _write(tmp_path)
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "out")]) == 0
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert abs(data["analyses"]["gap"]["boxes"]["2"]["gap"] - 0.5) < 1e-10
    assert "gap: info" in capsys.readouterr().out


def test_out_dir_environment_override(tmp_path, monkeypatch):
    cfg = _write(tmp_path)
    monkeypatch.setenv("LINDBENCH_OUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_seed_and_tol_scale_are_recorded(tmp_path):
    cfg = _write(tmp_path)
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o"), "--seed", "9", "--tol-scale", "2"]) == 0
    data = json.loads((tmp_path / "o" / "report.json").read_text())
    assert data["config"]["seed"] == 9
    assert data["config"]["tol_scale"] == 2.0


def test_unknown_id_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, CONFIG.replace('"fixed_point"', '"nope"'))
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o")]) == 2
    assert "line 4" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "absent.toml")]) == 2


def test_freeze_then_run_against_targets(tmp_path):
    reg = tmp_path / "reg.json"
    cfg = _write(tmp_path, f'regressions = "{reg}"\n' + CONFIG)
    assert main(["freeze-regressions", str(cfg)]) == 0
    assert reg.exists()
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    data = json.loads((tmp_path / "o" / "report.json").read_text())
    assert data["analyses"]["regressions"]["status"] == "pass"


def test_explain(capsys):
    assert main(["explain", "gap"]) == 0
    assert "formula" in capsys.readouterr().out
    assert main(["explain", "nope"]) == 2


def test_repeated_cli_runs_are_byte_identical(tmp_path):
    cfg = _write(tmp_path)
    for name in ("a", "b"):
        assert main(["run", str(cfg), "--out-dir", str(tmp_path / name), "--jobs", "2"]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
