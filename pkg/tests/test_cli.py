import json
import subprocess
import sys

import pytest

from stabledegen import cli


def _write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_graphs_command(tmp_path):
    cfg = _write_cfg(tmp_path, {"genus": 2})
    code = cli.run_config("graphs", cfg, str(tmp_path / "out"))
    assert code == cli.EXIT_OK
    payload = json.loads((tmp_path / "out" / "graphs.json").read_text())
    assert payload["count"] == 2
    manifest = json.loads((tmp_path / "out" / "run.json").read_text())
    assert manifest["command"] == "graphs"
    assert "config_sha256" in manifest
    assert "tolerances" in manifest


def test_missing_config_file(tmp_path):
    code = cli.run_config("graphs", str(tmp_path / "nope.json"), str(tmp_path / "o"))
    assert code == cli.EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.run_config("graphs", str(p), str(tmp_path / "o")) == cli.EXIT_CONFIG


def test_non_object_config(tmp_path):
    p = tmp_path / "arr.json"
    p.write_text("[1, 2]")
    assert cli.run_config("graphs", str(p), str(tmp_path / "o")) == cli.EXIT_CONFIG


def test_unknown_model(tmp_path):
    cfg = _write_cfg(tmp_path, {"model": "nonexistent", "m": 3, "t": 1e-3})
    assert cli.run_config("basis", cfg, str(tmp_path / "o")) == cli.EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_invalid_smoothing_rejected(tmp_path):
    # t = 0.5 violates |t| < R^2 e^{-2}, caught when the grafted metric is built
    cfg = _write_cfg(tmp_path, {"model": "two_self_node_sphere", "m": 3, "t": 0.5})
    assert cli.run_config("gram", cfg, str(tmp_path / "o")) == cli.EXIT_CONFIG


def test_basis_artifacts(tmp_path):
    cfg = _write_cfg(tmp_path, {"model": "two_self_node_sphere", "m": 3, "t": 1e-3})
    assert cli.run_config("basis", cfg, str(tmp_path / "out")) == cli.EXIT_OK
    payload = json.loads((tmp_path / "out" / "basis.json").read_text())
    assert payload["dimension"] == 5
    assert float(payload["sv_gap"]) >= 1e6


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write_cfg(tmp_path, {"model": "two_self_node_sphere", "m": 3, "t": 1e-3})
    for d in ("o1", "o2"):
        assert cli.run_config("gram", cfg, str(tmp_path / d)) == cli.EXIT_OK
    for name in ("gram.json", "run.json"):
        b1 = (tmp_path / "o1" / name).read_bytes()
        b2 = (tmp_path / "o2" / name).read_bytes()
        assert b1 == b2


def test_console_entry_point(tmp_path):
    cfg = _write_cfg(tmp_path, {"genus": 3})
    proc = subprocess.run(
        [sys.executable, "-m", "stabledegen.cli", "graphs",
         "--config", cfg, "--out", str(tmp_path / "out")],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "out" / "graphs.json").exists()


def test_main_rejects_unknown_command():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate", "--config", "x", "--out", "y"])
