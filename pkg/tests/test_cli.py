import hashlib
import json

import numpy as np
import pytest

from nonrad.cli import main
from nonrad.freewave import RadialData, radial_grid, save_data_csv

SMALL = ["--step", "0.125", "--s-max", "16"]


def _md5(p):
    return hashlib.md5(p.read_bytes()).hexdigest()


def test_construct_alpha_zero(tmp_path, capsys):
    assert main(["construct", "--alpha", "0", "--R", "1", *SMALL, "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "run.json").read_text())
    assert rec["iters"] == 1 and rec["R"] == 1.0
    for name in ("profile.csv", "snapshots.csv", "data_t0.csv", "iterates/iterate_000.csv"):
        assert (tmp_path / name).exists()
    assert json.loads(capsys.readouterr().out)["order"] == "first"


def test_construct_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["construct", "--alpha", "0.05", *SMALL, "--out", str(d)]) == 0
    for name in ("run.json", "profile.csv", "snapshots.csv"):
        assert _md5(a / name) == _md5(b / name)
    rec = json.loads((a / "run.json").read_text())
    assert rec["recovered"]["alpha"] == pytest.approx(0.05, rel=1e-2)


def test_config_file_and_env_dir(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.0, "R": 2.0, "step": 0.125, "s_max": 16}))
    monkeypatch.setenv("NONRAD_OUT_DIR", str(tmp_path / "env"))
    assert main(["construct", "--config", str(cfg), "--R", "1"]) == 0
    rec = json.loads((tmp_path / "env" / "run.json").read_text())
    assert rec["R"] == 1.0
    cfg.write_text("[1, 2]")
    assert main(["construct", "--config", str(cfg)]) == 2


def test_charnums_fit_and_exterior(tmp_path, capsys):
    r = radial_grid(64, 1 / 16)
    p = tmp_path / "d.csv"
    save_data_csv(p, RadialData(r, 0 * r, 2 * r**-3))
    assert main(["charnums", str(p), "--method", "fit"]) == 0
    assert json.loads(capsys.readouterr().out)["alpha"] == pytest.approx(2.0, abs=1e-12)
    assert main(["charnums", str(p), "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == "exterior" and out["alpha"] == pytest.approx(2.0, abs=1e-3)
    assert (tmp_path / "charnums.json").exists()


def test_malformed_input_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("r,u0,u1\n1,2\nx,y,z\n")
    assert main(["charnums", str(p)]) == 2
    assert main(["charnums", str(tmp_path / "missing.csv")]) == 2
    assert main(["evolve", "--data", str(p)]) == 2


def test_verify_usage(capsys):
    assert main(["verify"]) == 2
    assert main(["verify", "nonsense"]) == 2
    assert "usage" in capsys.readouterr().err


def test_evolve(tmp_path, capsys):
    h = 1 / 16
    r = radial_grid(8, h)
    p = tmp_path / "d.csv"
    save_data_csv(p, RadialData(r, 0 * r, np.exp(-(r**2))))
    assert main(["evolve", "--data", str(p), "--R", "0.5", "--T", "1", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "evolve.json").read_text())
    assert summary["window"] == [-1.0, 1.0]
    assert (tmp_path / "snapshots.csv").read_text().startswith("t,r,u,ut")


def test_decayfit(tmp_path, capsys):
    p = tmp_path / "n.csv"
    r = np.geomspace(1, 100, 8)
    p.write_text("r,norm\n" + "".join(f"{a},{a ** -1.25}\n" for a in r))
    assert main(["decayfit", "--csv", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["slope"] == pytest.approx(-1.25, abs=1e-10)
