import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sandtable.cli import main
from sandtable.fieldio import read_field

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SQUARE = CONFIGS / "half_open_square.json"


def _write(tmp_path, data, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _square(**changes):
    data = json.loads(SQUARE.read_text())
    data.update(changes)
    return data


def test_equilibrium_exports(tmp_path, capsys):
    out = tmp_path / "eq"
    assert main(["equilibrium", "--config", str(SQUARE), "--out", str(out), "--h", "0.0625"]) == 0
    text = capsys.readouterr().out
    assert "mass identity" in text and text.count("weak residual") == 5
    for name in ("d_gamma", "u_f", "v_f", "labels", "ridge"):
        f = read_field(out / f"{name}.csv")
        assert f.grid.shape == (17, 17)
    report = json.loads((out / "equilibrium.json").read_text())
    assert report["mass_identity"]["residual"] < 2e-2
    v = read_field(out / "v_f.csv")
    assert v.at(0.25, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_equilibrium_zero_source(tmp_path, capsys):
    cfg = _write(tmp_path, json.loads((CONFIGS / "zero_source.json").read_text()))
    assert main(["equilibrium", "--config", cfg, "--out", str(tmp_path / "z")]) == 0
    text = capsys.readouterr().out
    assert "u_f: not computed" in text and "mass identity: undefined" in text
    v = read_field(tmp_path / "z" / "v_f.csv").values
    assert np.all(np.nan_to_num(v) == 0)
    assert not (tmp_path / "z" / "u_f.csv").exists()


def test_equilibrium_disk(tmp_path, capsys):
    cfg = CONFIGS / "disk_full_boundary.json"
    assert main(["equilibrium", "--config", str(cfg), "--out", str(tmp_path / "d")]) == 0
    report = json.loads((tmp_path / "d" / "equilibrium.json").read_text())
    third = np.pi / 3
    assert report["mass_identity"]["integral_v"] == pytest.approx(third, rel=1e-3)
    assert report["mass_identity"]["integral_fd"] == pytest.approx(third, rel=1e-3)


def test_thread_count_does_not_change_outputs(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("SANDTABLE_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert main(["equilibrium", "--config", str(SQUARE), "--out", str(out), "--h", "0.0625"]) == 0
        outs.append(out)
    for name in ("d_gamma", "u_f", "v_f", "labels", "ridge"):
        assert (outs[0] / f"{name}.csv").read_bytes() == (outs[1] / f"{name}.csv").read_bytes()


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(SQUARE), "--out", str(out), "--h", "0.0625"]) == 0
    assert "converged=True" in capsys.readouterr().out
    u = read_field(out / "u.csv")
    assert u.grid.shape == (17, 17)
    rows = list(csv.DictReader((out / "rate_history.csv").open()))
    assert float(rows[-1]["rate"]) < 1e-6
    walls = list(csv.DictReader((out / "walls.csv").open()))
    assert {w["class"] for w in walls} == {"gamma", "wall"}
    assert {w["rule"] for w in walls if w["class"] == "wall"} <= {"zero", "copy"}
    summary = json.loads((out / "simulate.json").read_text())
    assert summary["regions"][0]["converged"]


def test_simulate_decomposition_improves_left_half(tmp_path, capsys):
    runs = {}
    for flag in ([], ["--decompose"]):
        out = tmp_path / ("dec" if flag else "full")
        assert main(["simulate", "--config", str(SQUARE), "--out", str(out), "--h", "0.03125", *flag]) == 0
        runs[bool(flag)] = out
    capsys.readouterr()
    errs = {}
    for dec, out in runs.items():
        cfg = _write(tmp_path, _square(compare={"region": "left", "p_radius": 0.0}), "cmp.json")
        # reference: 1 - y on the same lattice
        v = read_field(out / "v.csv")
        ref = v.grid.mesh()[1]
        from sandtable.fieldio import write_field
        from sandtable.grid import ScalarField
        write_field(tmp_path / "ref.csv", ScalarField(v.grid, 1.0 - ref))
        assert main(["compare", "--config", cfg, "--out", str(tmp_path / "c"),
                     "--field", str(out / "v.csv"), "--reference", str(tmp_path / "ref.csv")]) == 0
        row = capsys.readouterr().out.splitlines()[1].split(",")
        errs[dec] = float(row[0])
    assert errs[True] < errs[False]


def test_simulate_instability(tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["simulate", "--config", str(CONFIGS / "unstable_c10.json"), "--out", str(out)])
    assert code == 3
    assert "instability" in capsys.readouterr().err
    info = json.loads((out / "instability.json").read_text())
    assert (out / f"u_partial_step{info['step']}.csv").exists()
    assert (out / f"v_partial_step{info['step']}.csv").exists()


def test_simulate_non_convergence(tmp_path):
    cfg = _write(tmp_path, _square(scheme={"max_steps": 20}))
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "n"), "--h", "0.0625"]) == 4
    assert (tmp_path / "n" / "u.csv").exists()


def test_simulate_rejects_disk(tmp_path):
    cfg = CONFIGS / "disk_full_boundary.json"
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_config_errors(tmp_path, capsys):
    cfg = _write(tmp_path, _square(grid={"h": 0.3}))
    assert main(["equilibrium", "--config", cfg]) == 2
    assert "grid.h" in capsys.readouterr().err
    assert main(["equilibrium", "--config", str(tmp_path / "missing.json")]) == 2


def test_compare(tmp_path, capsys):
    out = tmp_path / "eq"
    main(["equilibrium", "--config", str(SQUARE), "--out", str(out), "--h", "0.0625"])
    capsys.readouterr()
    d = str(out / "d_gamma.csv")
    assert main(["compare", "--config", str(SQUARE), "--out", str(tmp_path / "c"),
                 "--field", d, "--reference", d]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "l1,l2,linf,rel_l1,rel_l2,rel_linf"
    assert all(float(x) == 0.0 for x in lines[1].split(","))
    assert (tmp_path / "c" / "compare.csv").exists()
    # the configured oracle is exact_standing; the distance field matches it
    assert main(["compare", "--config", str(SQUARE), "--out", str(tmp_path / "c"), "--field", d]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(row[2]) < 1e-12


def test_compare_grid_mismatch(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["equilibrium", "--config", str(SQUARE), "--out", str(a), "--h", "0.0625"])
    main(["equilibrium", "--config", str(SQUARE), "--out", str(b), "--h", "0.125"])
    code = main(["compare", "--config", str(SQUARE), "--out", str(tmp_path),
                 "--field", str(a / "v_f.csv"), "--reference", str(b / "v_f.csv")])
    assert code == 2
    assert "different grids" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "sandtable.cli", "equilibrium", "--config",
                        str(CONFIGS / "zero_source.json"), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "sandtable.cli", "bogus"], capture_output=True)
    assert r.returncode == 2  # argparse usage error
