import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ahlfors_green.cli import (EXIT_CONFIG, EXIT_FAIL, EXIT_OK, ConfigError, load_run_config,
                               main)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

ANNULUS = {
    "curves": [{"kind": "circle", "center": [0, 0], "radius": 0.5, "role": "inner"},
               {"kind": "circle", "center": [0, 0], "radius": 1, "role": "outer"}],
    "nodes_per_curve": 128, "a": [0.72, 0], "w": [[0.75, 0]],
    "probe_grid": {"nx": 15, "ny": 15}, "n_probes": 6,
}
DISC = {"curves": [{"kind": "circle", "center": [0, 0], "radius": 1}],
        "nodes_per_curve": 64, "a": [0, 0], "w": [[0.3, 0.1]],
        "probe_grid": {"nx": 11, "ny": 11}, "n_probes": 6}


def write_config(tmp_path, d, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def field_values(path):
    rows = read_csv(path)
    z = np.array([float(r["x"]) + 1j * float(r["y"]) for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    return z, v


def test_solve_annulus(tmp_path, capsys):
    cfg = write_config(tmp_path, ANNULUS)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    frame = json.loads(Path(out["frame"]).read_text())
    assert frame["n"] == 2
    assert abs(frame["P_11"][0]) < 1e-8 and abs(frame["P_11"][1] - 9.064720283654388) < 1e-5
    assert abs(frame["i_sigma"][0][0] - 0.1103178000763258) < 1e-8
    rows = read_csv(out["kernels"])
    assert len(rows) == 256
    f = np.array([float(r["f_re"]) + 1j * float(r["f_im"]) for r in rows])
    assert np.max(np.abs(np.abs(f) - 1)) < 1e-8
    g = read_csv(out["green_grid"])
    vals = np.array([float(r["value"]) for r in g])
    assert np.all(vals[np.isfinite(vals)] > 0)


def test_solve_disc_kernel_column(tmp_path, capsys):
    d = dict(DISC, a=[0, 0])
    cfg = write_config(tmp_path, d)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    rows = read_csv(tmp_path / "kernels.csv")
    S = np.array([float(r["S_re"]) for r in rows])
    # S(z, 0) = 1/(2 pi) on the unit circle
    assert np.max(np.abs(S - 0.15915494309189535)) < 1e-10
    frame = json.loads((tmp_path / "frame.json").read_text())
    assert frame["periods"] == []


def test_verify_exit_codes(tmp_path, capsys):
    cfg = write_config(tmp_path, DISC)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "ok")]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(l.startswith("PASS") for l in lines)
    strict = write_config(tmp_path, dict(DISC, tolerances={"green.symmetry": 0.0}), "strict.json")
    assert main(["verify", "--config", strict, "--out", str(tmp_path / "bad")]) == EXIT_FAIL
    report = json.loads((tmp_path / "bad" / "verify.json").read_text())
    assert report["failed"] == ["green.symmetry"]


def test_verify_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path, ANNULUS)
    for d in ("r1", "r2"):
        assert main(["verify", "--config", cfg, "--out", str(tmp_path / d)]) == EXIT_OK
    capsys.readouterr()
    assert (tmp_path / "r1" / "verify.json").read_bytes() == (tmp_path / "r2" / "verify.json").read_bytes()


@pytest.mark.parametrize("patch, needle", [
    ({"a": [0.2, 0]}, "point not in domain"),
    ({"w": [[1.5, 0]]}, "point not in domain"),
    ({"nodes_per_curve": 4}, "nodes_per_curve"),
    ({"tolerances": {"nonsense": 1}}, "unknown tolerance"),
    ({"tolerances": {"green_z.tangential": -1}}, "non-negative"),
    ({"w": [["x", 0]]}, "w must be"),
])
def test_config_errors(tmp_path, capsys, patch, needle):
    cfg = write_config(tmp_path, dict(ANNULUS, **patch))
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == EXIT_CONFIG and needle in err["message"]


def test_invalid_json_and_missing_file(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p)]) == EXIT_CONFIG
    assert main(["solve", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    capsys.readouterr()


def test_command_line_overrides(tmp_path):
    cfg = load_run_config(write_config(tmp_path, ANNULUS), m=64, a="0.7,0.1", ws=["-0.75,0"],
                          out=str(tmp_path / "x"))
    assert cfg.m == 64 and cfg.a == 0.7 + 0.1j and cfg.ws == [-0.75]
    with pytest.raises(ConfigError):
        load_run_config(write_config(tmp_path, ANNULUS), a="0.7")


@pytest.mark.parametrize("q", ["omega_3", "mu_2", "lambda_0", "velocity", "omega_x"])
def test_unknown_or_out_of_range_quantity(tmp_path, capsys, q):
    cfg = write_config(tmp_path, ANNULUS)
    assert main(["export-field", "--config", cfg, "--quantity", q, "--out", str(tmp_path)]) == EXIT_CONFIG
    capsys.readouterr()


def test_export_omega_radial(tmp_path, capsys):
    cfg = write_config(tmp_path, ANNULUS)
    assert main(["export-field", "--config", cfg, "--quantity", "omega_1",
                 "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    z, v = field_values(tmp_path / "omega_1.csv")
    ok = np.isfinite(v)
    assert ok.sum() > 50
    assert np.max(np.abs(v[ok] - np.log(np.abs(z[ok])) / np.log(0.5))) < 1e-8
    assert np.all(np.isnan(v[np.abs(z) < 0.5]))


def test_export_ahlfors_abs_and_green(tmp_path, capsys):
    cfg = write_config(tmp_path, ANNULUS)
    for q in ("ahlfors_abs", "green"):
        assert main(["export-field", "--config", cfg, "--quantity", q, "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    _, v = field_values(tmp_path / "ahlfors_abs.csv")
    v = v[np.isfinite(v)]
    assert np.all((v >= 0) & (v < 1))
    _, g = field_values(tmp_path / "green.csv")
    assert np.all(g[np.isfinite(g)] > 0)


def test_export_lambda_and_poisson(tmp_path, capsys):
    cfg = write_config(tmp_path, ANNULUS)
    for q in ("lambda_2", "poisson", "mu_1"):
        assert main(["export-field", "--config", cfg, "--quantity", q, "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    _, lam = field_values(tmp_path / "lambda_2.csv")
    lam = lam[np.isfinite(lam)]
    assert lam.size > 0 and np.all((lam > 0) & (lam < 1))
    _, p = field_values(tmp_path / "poisson.csv")
    assert np.all(p[np.isfinite(p)] > 0)


def test_shipped_configs_load():
    for name in ("disc", "annulus", "two_hole"):
        cfg = load_run_config(CONFIGS / f"{name}.json")
        assert cfg.grid().n == {"disc": 1, "annulus": 2, "two_hole": 3}[name]


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, DISC)
    res = subprocess.run([sys.executable, "-m", "ahlfors_green.cli", "export-field", "--config", cfg,
                          "--quantity", "green", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["field"].endswith("green.csv")
