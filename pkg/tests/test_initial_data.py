import numpy as np
import pytest

from nematic.grid import Grid2
from nematic.initial_data import InitialDataSpec, make_initial_director, make_initial_velocity, philox


def test_constant(grid64):
    u = make_initial_director(InitialDataSpec(kind="constant", b=(0.0, 0.0, 1.0)), grid64)
    assert np.all(u[2] == 1) and np.all(u[:2] == 0)


def test_b_must_be_unit(grid64):
    with pytest.raises(ValueError):
        make_initial_director(InitialDataSpec(kind="constant", b=(0.0, 0.0, 1.1)), grid64)


def test_unknown_kind(grid64):
    with pytest.raises(ValueError):
        make_initial_director(InitialDataSpec(kind="vortex"), grid64)
    with pytest.raises(ValueError):
        make_initial_velocity(InitialDataSpec(kind="vortex"), grid64)


def test_bubble_is_unit_and_cut_off(grid128):
    g = grid128
    b = np.array([0.0, 0.6, 0.8])
    u = make_initial_director(InitialDataSpec(kind="bubble", b=tuple(b), lambda_scale=2.0), g)
    assert np.abs(np.sum(u * u, axis=0) - 1).max() < 1e-14
    dx, dy = g.periodic_offset(10.0, 10.0)
    outside = np.hypot(dx, dy) >= g.length / 4
    assert np.abs(u[:, outside] - b[:, None]).max() < 1e-14


def test_bubble_degree_sign(grid128):
    g = grid128
    up = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=2.0), g)
    dn = make_initial_director(InitialDataSpec(kind="bubble", lambda_scale=2.0, degree=-1), g)
    p, q = g.gradient(up), g.gradient(dn)

    def degree(u, p):
        jac = np.einsum("i...,i...->...", u, np.cross(p[:, 0], p[:, 1], axis=0))
        return g.integrate(jac) / (4 * np.pi)

    assert degree(up, p) * degree(dn, q) < 0


def test_random_smooth_deterministic(grid64):
    spec = InitialDataSpec(kind="random_smooth", amplitude=0.5)
    a = make_initial_director(spec, grid64, seed=42)
    b = make_initial_director(spec, grid64, seed=42)
    c = make_initial_director(spec, grid64, seed=43)
    assert a.tobytes() == b.tobytes() and not np.array_equal(a, c)
    assert np.abs(np.sum(a * a, axis=0) - 1).max() < 1e-14


def test_philox_streams_differ():
    assert philox(1, 1).integers(2**62) != philox(1, 2).integers(2**62)
    assert philox(2**64 - 1).integers(10) >= 0


def test_composite_of_far_bubbles(grid128):
    g = grid128
    spec = InitialDataSpec(
        kind="composite",
        components=(
            InitialDataSpec(kind="bubble", lambda_scale=0.5, center=(5.0, 5.0)),
            InitialDataSpec(kind="bubble", lambda_scale=0.5, center=(15.0, 15.0), degree=-1),
        ),
    )
    u = make_initial_director(spec, g)
    assert np.all(np.isfinite(u)) and np.abs(np.sum(u * u, axis=0) - 1).max() < 1e-14


def test_velocities(grid128):
    g = grid128
    assert np.all(make_initial_velocity(InitialDataSpec(kind="zero_v"), g) == 0)
    tg = make_initial_velocity(InitialDataSpec(kind="taylor_green_v", amplitude=1.0), g)
    assert np.abs(g.spectral_divergence(tg)).max() <= 1e-12
    spec = InitialDataSpec(kind="random_smooth", amplitude=0.7)
    r1 = make_initial_velocity(spec, g, seed=5)
    r2 = make_initial_velocity(spec, g, seed=5)
    assert r1.tobytes() == r2.tobytes()
    assert np.abs(g.spectral_divergence(r1)).max() <= 1e-10
    assert np.abs(r1).max() == pytest.approx(0.7)
