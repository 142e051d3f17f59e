import numpy as np
import pytest
import yaml

from nematic import cli
from nematic import lc_flow as lf
from nematic.config import build_config, load_config
from nematic.errors import BlowUpError, ConfigError
from nematic.grid import read_snapshot
from nematic.output import read_events, read_ledger

SMALL = {
    "grid": {"n": 32, "L": 20.0},
    "params": {"t_end": 0.2, "diag_stride": 5},
    "detector": {"R0": 1.5, "radii": [1.0, 1.5]},
    "initial_data": {"director": {"kind": "random_smooth", "amplitude": 0.6}},
    "seed": 11,
}


def write_cfg(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_defaults_load():
    cfg = load_config(None)
    assert cfg.grid.n == 128 and cfg.mode == "constrained"
    assert cfg.dt <= lf.max_stable_dt(cfg.grid, cfg.constants, 0.5)


@pytest.mark.parametrize(
    "raw",
    [
        {"unknown": 1},
        {"grid": {"n": 33}},
        {"grid": {"n": 64, "L": -1}},
        {"params": {"cfl_safety": 2.0}},
        {"params": {"dt": 10.0}},
        {"mode": "ginzburg_landau"},
        {"detector": {"R0": 8.0, "radii": [1.0]}},
        {"detector": {"R0": 1.0, "radii": [2.0]}},
        {"initial_data": {"director": {"kind": "constant", "b": [0, 0, 2]}}},
        {"initial_data": {"director": {"kind": "bubble", "typo": 1}}},
        {"seed": -1},
    ],
)
def test_config_rejections(raw):
    with pytest.raises(ConfigError):
        build_config(raw)


def test_config_round_trip(tmp_path):
    cfg = build_config(SMALL)
    again = load_config(write_cfg(tmp_path, yaml.safe_load(cfg.dump())))
    assert again.data == cfg.data and again.dt == cfg.dt


def test_bad_config_exits_2(tmp_path):
    assert run_cli("flow", "--config", write_cfg(tmp_path, {"grid": {"n": 7}})) == 2
    (tmp_path / "broken.yaml").write_text("grid: [\n")
    assert run_cli("flow", "--config", tmp_path / "broken.yaml") == 2
    assert run_cli("flow", "--config", tmp_path / "missing.yaml") == 2


def test_unwritable_output_exits_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_cli("flow", "--config", write_cfg(tmp_path, SMALL), "--out", blocker / "run", "--quiet") == 4


def test_flow_t_end_zero(tmp_path):
    data = dict(SMALL, params={"t_end": 0.0})
    out = tmp_path / "run"
    assert run_cli("flow", "--config", write_cfg(tmp_path, data), "--out", out, "--quiet") == 0
    assert len(read_ledger(out / "ledger.csv")) == 1
    snaps = sorted((out / "snapshots").iterdir())
    assert [p.name for p in snaps] == ["u_00000000.nfld"]
    g, u, t = read_snapshot(snaps[0])
    assert g.n == 32 and t == 0.0 and u.shape == (3, 32, 32)


def test_flow_outputs_and_echo(tmp_path):
    out = tmp_path / "run"
    assert run_cli("flow", "--config", write_cfg(tmp_path, SMALL), "--out", out, "--seed", 5, "--quiet") == 0
    echo = load_config(out / "config.yaml")
    assert echo.seed == 5 and echo.data["output"]["directory"] == str(out)
    rows = read_ledger(out / "ledger.csv")
    assert rows[0]["t"] == 0.0 and rows[-1]["t"] == pytest.approx(0.2)
    assert all(b["E_total"] <= a["E_total"] for a, b in zip(rows, rows[1:]))
    assert read_events(out / "events.jsonl") == []
    # reloading the echo reproduces the run bitwise
    out2 = tmp_path / "again"
    assert run_cli("flow", "--config", out / "config.yaml", "--out", out2, "--quiet") == 0
    assert (out / "ledger.csv").read_bytes() == (out2 / "ledger.csv").read_bytes()
    for a, b in zip(sorted((out / "snapshots").iterdir()), sorted((out2 / "snapshots").iterdir())):
        assert a.read_bytes() == b.read_bytes()


def test_snapshot_stride(tmp_path):
    data = dict(SMALL, output={"snapshot_stride": 10})
    out = tmp_path / "run"
    assert run_cli("flow", "--config", write_cfg(tmp_path, data), "--out", out, "--quiet") == 0
    steps = [int(p.stem.split("_")[1]) for p in (out / "snapshots").iterdir()]
    cfg = load_config(out / "config.yaml")
    n = round(0.2 / cfg.dt)
    assert sorted(steps) == sorted(set([0, n] + list(range(10, n + 1, 10))))


def test_el_run_writes_velocity(tmp_path):
    data = dict(SMALL, initial_data={"director": {"kind": "bubble", "lambda_scale": 3.0}, "velocity": {"kind": "taylor_green_v", "amplitude": 0.5}})
    data["params"] = {"t_end": 0.1, "diag_stride": 5}
    out = tmp_path / "el"
    assert run_cli("el", "--config", write_cfg(tmp_path, data), "--out", out, "--quiet") == 0
    _, v, _ = read_snapshot(out / "snapshots" / "v_00000000.nfld")
    assert v.shape == (2, 32, 32)
    rows = read_ledger(out / "ledger.csv")
    assert rows[0]["kinetic"] > 0


def test_numerical_abort_exits_3(tmp_path, monkeypatch):
    def boom(grid, cfg, st):
        raise BlowUpError((1, 2), 0.01, st.t)

    monkeypatch.setattr(lf, "step", boom)
    out = tmp_path / "run"
    assert run_cli("flow", "--config", write_cfg(tmp_path, SMALL), "--out", out, "--quiet") == 3
    assert len(read_ledger(out / "ledger.csv")) == 1


def test_gl_study_table(tmp_path, capsys):
    data = {
        "grid": {"n": 32, "L": 20.0},
        "constants": {"k1": 2.0, "k2": 1.0, "k3": 0.5, "k4": 0.3},
        "initial_data": {"director": {"kind": "random_smooth", "amplitude": 0.8}},
        "gl_study": {"epsilons": [0.2, 0.1, 0.05], "t_star": 0.1},
        "seed": 9,
    }
    out = tmp_path / "gl"
    assert run_cli("gl-study", "--config", write_cfg(tmp_path, data), "--out", out, "--quiet") == 0
    rows = read_ledger_like(out / "gl_study.csv")
    defects = [r["defect_l2"] for r in rows]
    assert defects == sorted(defects, reverse=True) and len(set(defects)) == 3
    assert "epsilon" in capsys.readouterr().out


def read_ledger_like(path):
    import csv

    with open(path) as fh:
        return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]


def test_verify_subset(tmp_path, capsys):
    data = {"verify": {"checks": ["derivatives", "ellipticity", "null_lagrangian"]}}
    out = tmp_path / "v"
    assert run_cli("verify", "--config", write_cfg(tmp_path, data), "--out", out, "--quiet") == 0
    text = capsys.readouterr().out
    assert text.count("PASS") == 3 and "3/3 checks passed" in text
    assert (out / "verify.json").exists()


def test_verify_unknown_check(tmp_path):
    data = {"verify": {"checks": ["nope"]}}
    assert run_cli("verify", "--config", write_cfg(tmp_path, data), "--out", tmp_path / "v", "--quiet") == 2


def test_verify_failure_exits_1(tmp_path, monkeypatch):
    from nematic import verification

    monkeypatch.setitem(verification.VERIFY_SUITE, "derivatives", lambda: verification.CheckResult("x", False))
    data = {"verify": {"checks": ["derivatives"]}}
    assert run_cli("verify", "--config", write_cfg(tmp_path, data), "--out", tmp_path / "v", "--quiet") == 1
