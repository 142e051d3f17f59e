import math

import numpy as np
import pytest

from nematic import diagnostics as dg
from nematic import lc_flow as lf
from nematic import oseen_frank as of
from nematic.errors import ConfigError, MissingColumnError
from nematic.grid import Grid2
from nematic.initial_data import InitialDataSpec, make_initial_director

from conftest import wide_bubble

EQUAL = of.FrankConstants.equal(1.0)


def det(**kw):
    base = dict(eps0=4 * math.pi, R0=1.5, radii=(0.5, 1.0, 1.5))
    base.update(kw)
    return dg.DetectorConfig(**base)


def dirichlet(g, u):
    p = g.gradient(u)
    return np.sum(p * p, axis=(0, 1))


def test_report_sums_and_finiteness(grid64):
    u = wide_bubble(grid64)
    rep = dg.energy_report(grid64, of.FrankConstants(2, 1, 0.5, 0.3), 1.02 * u, 0.0, v=np.ones((2,) + grid64.shape), eps=0.1, coupling=2.0)
    rep.check()
    assert rep.E_total == pytest.approx(2.0 * (rep.W_integral + rep.gl_penalty) + rep.kinetic, rel=1e-12)
    assert set(rep.to_row()) == set(dg.REPORT_COLUMNS)
    rep.E_total = float("nan")
    with pytest.raises(FloatingPointError):
        rep.check()


def test_ball_energy_basics(grid128):
    g = grid128
    assert dg.ball_energy(g, np.zeros(g.shape), (5, 5), 2.0) == 0
    for R in (1.0, 2.0, 4.0):
        val = dg.ball_energy(g, np.full(g.shape, 3.0), (0, 0), R)
        assert abs(val - 3.0 * math.pi * R * R) <= 3.0 * 2 * math.pi * R * 2 * g.h
    with pytest.raises(ValueError):
        dg.ball_energy(g, np.zeros(g.shape), (0, 0), 5.1)


def test_ball_energy_monotone_in_radius(grid64):
    dens = dirichlet(grid64, wide_bubble(grid64))
    vals = [dg.ball_energy(grid64, dens, (32, 32), R) for R in np.linspace(0.2, 5.0, 15)]
    assert np.all(np.diff(vals) >= 0)


def test_bubble_ball_energy_three_lambda():
    g = Grid2(256, 20.0)
    lam = 1.0
    u = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=lam), g)
    assert dg.ball_energy(g, dirichlet(g, u), (128, 128), 3 * lam) >= 0.9 * 8 * math.pi


def test_max_local_energy(grid128):
    g = grid128
    val, center, R = dg.max_local_energy(g, np.zeros(g.shape), det())
    assert (val, center, R) == (0.0, (0, 0), 0.5)
    u = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=1.0, center=(7.0, 12.0)), g)
    cfg = det()
    val, center, R = dg.max_local_energy(g, dirichlet(g, u), cfg)
    s = cfg.stride_for(g, R)
    assert abs(center[0] * g.h - 7.0) <= s * g.h and abs(center[1] * g.h - 12.0) <= s * g.h


def test_max_local_energy_tie_break(grid128):
    g = grid128
    a = dirichlet(g, make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=0.5, center=(5.0, 5.0)), g))
    b = g.shift(a, 48, 0)
    _, center, _ = dg.max_local_energy(g, a + b, det(stride=1))
    assert center == (32, 32)


def test_detector_constant_and_narrow(grid128):
    g = grid128
    u = np.zeros((3,) + g.shape)
    u[2] = 1.0
    assert dg.detect_concentration(g, dirichlet(g, u), 0.0, det()) == []
    un = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=4 * g.h), g)
    ev = dg.detect_concentration(g, dirichlet(g, un), 0.0, det())
    assert len(ev) == 1 and ev[0].center == (64, 64) and ev[0].energy >= 4 * math.pi
    rec = ev[0].to_record()
    assert rec["kind"] == "director_only" and rec["cx"] == pytest.approx(10.0)


def test_detector_translation(grid128):
    g = grid128
    un = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=4 * g.h), g)
    d = dirichlet(g, un)
    base = dg.detect_concentration(g, d, 0.0, det(stride=1))
    for di, dj in ((1, 0), (5, -7), (-30, 13)):
        moved = dg.detect_concentration(g, g.shift(d, di, dj), 0.0, det(stride=1))
        assert [e.center for e in moved] == [((e.center[0] + di) % g.n, (e.center[1] + dj) % g.n) for e in base]


def test_detector_config_validation(grid64):
    with pytest.raises(ConfigError):
        det(eps0=0.0)
    with pytest.raises(ConfigError):
        det(radii=(2.0,))
    with pytest.raises(ConfigError):
        det(R0=6.0, radii=(6.0,)).validate(grid64)


def test_ladyzhenskaya_ratio():
    g = Grid2(64, 20.0)
    assert dg.ladyzhenskaya_ratio(g, np.zeros((2,) + g.shape), 2.0) == (0.0, True)
    vals = []
    for n in (64, 128):
        g = Grid2(n, 20.0)
        x, y = g.coords
        f = np.sin(2 * np.pi * x / 20) * np.cos(2 * np.pi * y / 20)
        vals.append(dg.ladyzhenskaya_ratio(g, f, 2.0)[0])
    assert abs(vals[1] / vals[0] - 1) < 0.2
    fam = []
    g = Grid2(128, 20.0)
    for lam in (1.0, 2.0, 4.0):
        u = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=lam), g)
        fam.append(dg.ladyzhenskaya_ratio(g, g.gradient(u), 1.0)[0])
    assert max(fam) / min(fam) < 10


def test_local_energy_monitor(grid64):
    g = grid64
    u = wide_bubble(g)
    cfg = lf.FlowConfig(EQUAL, lf.max_stable_dt(g, EQUAL, 0.5), 0.0)
    cfg = lf.FlowConfig(EQUAL, cfg.dt, 40 * cfg.dt, diag_stride=5)
    dens = []
    lf.run(g, cfg, u, snapshot_hook=lambda st: dens.append((st.t, dg.flow_density(g, cfg, st.u))))
    ref = float(g.integrate(dirichlet(g, u)))
    fit = dg.local_energy_monitor(g, dens, ref, radii=(1.0, 2.0), centers=[(32, 32), (40, 30), (0, 0)])
    assert fit.C_hat >= 0 and fit.n_fit > 0 and fit.n_eval > 0
    assert fit.max_violation <= 1.0


def test_identity_residual_rows():
    assert dg.identity_residual([{"t": 0.0, "E_total": 3.0, "dissipation_rate": 1.0}], "director").tolist() == [0.0]
    rows = [{"t": t, "E_total": 2.0, "dissipation_rate": 0.0} for t in (0.0, 0.1, 0.2)]
    assert np.all(dg.identity_residual(rows, "director") == 0)
    with pytest.raises(MissingColumnError):
        dg.identity_residual(rows, "coupled")
    with pytest.raises(ValueError):
        dg.identity_residual(rows, "nope")


def test_identity_residual_on_constant_run(grid64):
    u = np.zeros((3,) + grid64.shape)
    u[0] = 1.0
    cfg = lf.FlowConfig(EQUAL, 1e-3, 5e-3)
    _, reps, _ = lf.run(grid64, cfg, u)
    assert np.abs(dg.identity_residual(reps, "director")).max() < 1e-14
