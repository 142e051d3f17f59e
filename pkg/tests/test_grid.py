import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nematic.grid import Grid2, NonzeroMeanWarning, read_snapshot, write_snapshot
from nematic.initial_data import philox

from conftest import orders


def sine(g, axis=0, m=1):
    x, y = g.coords
    return np.sin(2 * np.pi * m * (x if axis == 0 else y) / g.length)


def test_rejects_bad_sizes():
    for n in (6, 9, 0):
        with pytest.raises(ValueError):
            Grid2(n, 1.0)
    with pytest.raises(ValueError):
        Grid2(16, -1.0)
    g = Grid2(16, 3.0)
    assert g.h == 3.0 / 16


def test_gradient_of_constant_is_zero(grid64):
    u = np.ones((3,) + grid64.shape) * np.array([0.3, -1.0, 2.0])[:, None, None]
    assert np.all(grid64.gradient(u) == 0)


def test_gradient_order():
    errs = []
    for n in (64, 128, 256):
        g = Grid2(n, 20.0)
        x, _ = g.coords
        u = np.zeros((3, n, n))
        u[2] = sine(g)
        exact = (2 * np.pi / g.length) * np.cos(2 * np.pi * x / g.length)
        errs.append(np.abs(g.gradient(u)[2, 0] - exact).max())
    assert orders(errs).min() >= 1.9


def test_gradient_linear(grid64):
    rng = philox(1)
    f, h = rng.standard_normal((2, 3) + grid64.shape)
    assert np.allclose(grid64.gradient(f + h), grid64.gradient(f) + grid64.gradient(h), rtol=0, atol=1e-12)


def test_curl_definition(grid64):
    g = grid64
    f = sine(g, 0) * sine(g, 1, 2)
    u = np.stack([np.zeros_like(f), np.zeros_like(f), f])
    c = g.curl(u)
    assert np.array_equal(c[0], g.ddx(f, 1))
    assert np.array_equal(c[1], -g.ddx(f, 0))
    assert np.all(c[2] == 0)


def test_div_curl_shear_order():
    errs = []
    for n in (64, 128, 256):
        g = Grid2(n, 20.0)
        _, y = g.coords
        u = np.stack([sine(g, 1), np.zeros((n, n)), np.zeros((n, n))])
        assert np.abs(g.divergence(u)).max() == 0
        k = 2 * np.pi / g.length
        errs.append(np.abs(g.curl(u)[2] + k * np.cos(k * y)).max())
    assert orders(errs).min() >= 1.9


def test_laplacian_order():
    errs = []
    for n in (64, 128, 256):
        g = Grid2(n, 20.0)
        f = sine(g, 0) * sine(g, 1)
        k = 2 * np.pi / g.length
        errs.append(np.abs(g.laplacian(f) + 2 * k * k * f).max())
    assert orders(errs).min() >= 1.9


def test_integrate(grid64):
    g = grid64
    assert g.integrate(np.full(g.shape, 2.5)) == pytest.approx(2.5 * g.length**2, rel=1e-14)
    assert abs(g.integrate(sine(g))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_discrete_divergence_theorem(seed):
    g = Grid2(16, 5.0)
    u = philox(seed).standard_normal((3,) + g.shape)
    assert abs(g.integrate(g.divergence(u))) <= 1e-12 * max(g.l2norm(u), 1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.integers(-5, 5), st.integers(-5, 5))
def test_operators_commute_with_translation(seed, di, dj):
    g = Grid2(16, 5.0)
    u = philox(seed).standard_normal((3,) + g.shape)
    s = lambda f: g.shift(f, di, dj)  # noqa: E731
    assert np.array_equal(g.gradient(s(u)), s(g.gradient(u)))
    assert np.array_equal(g.curl(s(u)), s(g.curl(u)))
    assert np.array_equal(g.laplacian(s(u)), s(g.laplacian(u)))


def test_poisson_examples(grid64):
    g = grid64
    f = sine(g)
    assert np.abs(g.poisson_solve(f) + (g.length / (2 * np.pi)) ** 2 * f).max() < 1e-12
    assert np.all(g.poisson_solve(np.zeros(g.shape)) == 0)


def test_poisson_residual_random(grid64):
    g = grid64
    rng = philox(4)
    fh = np.zeros(g.shape, dtype=complex)
    fh[:6, :6] = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    f = np.fft.ifft2(fh).real
    f -= f.mean()
    p = g.poisson_solve(f)
    assert g.l2norm(g.spectral_laplacian(p) - f) <= 1e-10 * g.l2norm(f)
    assert abs(p.mean()) < 1e-14


def test_poisson_reports_mean(grid64):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        grid64.poisson_solve(sine(grid64) + 0.5)
    assert any(isinstance(w.message, NonzeroMeanWarning) and w.message.mean == pytest.approx(0.5) for w in rec)


def test_leray_examples(grid64):
    g = grid64
    phi = sine(g)
    grad = g.spectral_gradient(phi)
    assert np.abs(g.leray_project(grad)).max() < 1e-12
    v = np.stack([sine(g, 1), np.zeros(g.shape)])
    assert np.abs(g.leray_project(v) - v).max() < 1e-12


def test_leray_properties(grid64):
    g = grid64
    v = philox(5).standard_normal((2,) + g.shape)
    pv = g.leray_project(v)
    assert np.abs(g.leray_project(pv) - pv).max() < 1e-12
    assert np.abs(g.spectral_divergence(pv)).max() <= 1e-10 * g.l2norm(v)
    assert g.l2norm(pv) <= g.l2norm(v)
    w = philox(6).standard_normal((2,) + g.shape)
    assert np.allclose(g.leray_project(2 * v - w), 2 * pv - g.leray_project(w), atol=1e-12)


@pytest.mark.parametrize("arity", [1, 2, 3])
def test_snapshot_round_trip(tmp_path, grid64, arity):
    data = philox(7).standard_normal(((arity,) if arity > 1 else ()) + grid64.shape)
    path = tmp_path / "f.nfld"
    write_snapshot(path, grid64, data, time=0.125)
    g, back, t = read_snapshot(path)
    assert (g.n, g.length, t) == (64, 20.0, 0.125)
    assert back.tobytes() == data.tobytes()
    raw = path.read_bytes()
    assert raw[:4] == b"NFLD"


def test_snapshot_rejects_garbage(tmp_path, grid64):
    path = tmp_path / "bad.nfld"
    path.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        read_snapshot(path)
    write_snapshot(path, grid64, np.zeros(grid64.shape))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_snapshot(path)
