"""Reproducible initial data.

Randomness comes from numpy's Philox4x64-10 counter-based generator, keyed
by the 64-bit run seed and a stream number, so the same seed always produces
the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .grid import Grid2

DirectorKind = Literal["constant", "bubble", "random_smooth", "composite"]
VelocityKind = Literal["zero_v", "taylor_green_v", "random_smooth"]


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox4x64 generator keyed by ``seed``; ``stream`` selects an independent counter block."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=np.array([seed, int(stream)], dtype=np.uint64)))


def _unit(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ValueError("far-field vector b must have three components")
    nb = float(np.linalg.norm(b))
    if abs(nb - 1.0) > 1e-12:
        raise ValueError(f"far-field vector b must be a unit vector (|b| = {nb!r})")
    return b


def _frame(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing ``b`` to a right-handed orthonormal frame."""
    trial = np.array([1.0, 0.0, 0.0]) if abs(b[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - np.dot(trial, b) * b
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(b, e1)


def smootherstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = "constant"
    b: tuple[float, float, float] = (0.0, 0.0, 1.0)
    lambda_scale: float = 1.0
    center: tuple[float, float] | None = None  # defaults to the domain centre
    amplitude: float = 1.0
    band_limit: int = 3
    degree: int = 1
    components: tuple = field(default_factory=tuple)  # composite: nested specs

    @classmethod
    def from_dict(cls, d: dict) -> "InitialDataSpec":
        d = dict(d)
        if "components" in d:
            d["components"] = tuple(cls.from_dict(c) for c in d["components"])
        for key in ("b", "center"):
            if d.get(key) is not None:
                d[key] = tuple(float(x) for x in d[key])
        return cls(**d)


def bubble_angle(grid: Grid2, lam: float, center: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Polar angle from ``b`` and azimuth of the cut-off bubble.

    The profile is ``tan(theta/2) = lam * chi(r) / r`` with
    ``chi = 1 - smootherstep(r^2 / R^2)``, ``R = L/4``; ``theta = pi`` at the
    centre and ``theta = 0`` (the far field) for ``r >= L/4``.
    """
    dx, dy = grid.periodic_offset(*center)
    r = np.hypot(dx, dy)
    R = grid.length / 4.0
    chi = 1.0 - smootherstep((r / R) ** 2)
    theta = 2.0 * np.arctan2(lam * chi, r)
    return theta, np.arctan2(dy, dx)


def _stereo_offset(grid: Grid2, spec: InitialDataSpec) -> np.ndarray:
    """Complex stereographic coordinate (relative to b) of a single bubble."""
    if spec.lambda_scale <= 0:
        raise ValueError("bubble scale must be positive")
    if spec.degree not in (1, -1):
        raise ValueError("bubble degree must be +1 or -1")
    center = spec.center if spec.center is not None else (grid.length / 2, grid.length / 2)
    theta, phi = bubble_angle(grid, spec.lambda_scale, center)
    # w = tan(theta/2) e^{i deg phi}; theta = pi at the centre maps to w = inf,
    # so carry the point as (sin, cos) instead of w directly
    return theta, spec.degree * phi


def _from_angles(b, theta, phi) -> np.ndarray:
    e1, e2 = _frame(b)
    st = np.sin(theta)
    u = (
        (st * np.cos(phi))[None] * e1[:, None, None]
        + (st * np.sin(phi))[None] * e2[:, None, None]
        + np.cos(theta)[None] * b[:, None, None]
    )
    return u


def _band_limited(grid: Grid2, rng: np.random.Generator, ncomp: int, band: int) -> np.ndarray:
    """Real random field with Fourier modes |k_x|, |k_y| <= band (in units of 2 pi / L)."""
    n = grid.n
    if not 1 <= band < n // 2:
        raise ValueError(f"band_limit must lie in [1, {n // 2 - 1}]")
    m = 2 * band + 1
    coef = rng.standard_normal((ncomp, m, m)) + 1j * rng.standard_normal((ncomp, m, m))
    spec = np.zeros((ncomp, n, n), dtype=complex)
    idx = np.r_[0 : band + 1, n - band : n]
    spec[:, idx[:, None], idx[None, :]] = coef
    spec[:, 0, 0] = 0.0
    f = np.fft.ifft2(spec, axes=(-2, -1)).real
    return f / max(np.abs(f).max(), 1e-300)


def make_initial_director(spec: InitialDataSpec, grid: Grid2, seed: int = 0) -> np.ndarray:
    b = _unit(spec.b)
    if spec.kind == "constant":
        return np.broadcast_to(b[:, None, None], (3,) + grid.shape).copy()
    if spec.kind == "bubble":
        theta, phi = _stereo_offset(grid, spec)
        u = _from_angles(b, theta, phi)
    elif spec.kind == "composite":
        if not spec.components:
            raise ValueError("composite data needs components")
        # sum of stereographic coordinates; exact composition when supports are disjoint
        w = np.zeros(grid.shape, dtype=complex)
        pole = np.zeros(grid.shape, dtype=bool)
        for comp in spec.components:
            if comp.kind != "bubble":
                raise ValueError("composite data supports bubble components only")
            theta, phi = _stereo_offset(grid, comp)
            at_pole = np.isclose(theta, np.pi, rtol=0, atol=1e-14)
            pole |= at_pole
            w += np.where(at_pole, 0.0, np.tan(0.5 * theta) * np.exp(1j * phi))
        theta = np.where(pole, np.pi, 2.0 * np.arctan(np.abs(w)))
        u = _from_angles(b, theta, np.angle(w))
    elif spec.kind == "random_smooth":
        rng = philox(seed, stream=1)
        e1, e2 = _frame(b)
        f = _band_limited(grid, rng, 2, spec.band_limit) * spec.amplitude
        u = b[:, None, None] + f[0][None] * e1[:, None, None] + f[1][None] * e2[:, None, None]
    else:
        raise ValueError(f"unknown director kind {spec.kind!r}")
    return u / np.sqrt(np.sum(u * u, axis=0))


def taylor_green(grid: Grid2, amplitude: float = 1.0, t: float = 0.0, nu: float = 0.0) -> np.ndarray:
    """``A e^{-2 nu k^2 t} (sin kx cos ky, -cos kx sin ky)`` with ``k = 2 pi / L``."""
    x, y = grid.coords
    k = 2.0 * np.pi / grid.length
    amp = amplitude * np.exp(-2.0 * nu * k * k * t)
    return amp * np.stack([np.sin(k * x) * np.cos(k * y), -np.cos(k * x) * np.sin(k * y)])


def taylor_green_pressure(grid: Grid2, amplitude: float = 1.0, t: float = 0.0, nu: float = 0.0) -> np.ndarray:
    """Pressure of :func:`taylor_green`: ``(A^2/4)(cos 2kx + cos 2ky) e^{-4 nu k^2 t}``."""
    x, y = grid.coords
    k = 2.0 * np.pi / grid.length
    amp2 = amplitude**2 * np.exp(-4.0 * nu * k * k * t)
    return 0.25 * amp2 * (np.cos(2 * k * x) + np.cos(2 * k * y))


def make_initial_velocity(spec: InitialDataSpec, grid: Grid2, seed: int = 0) -> np.ndarray:
    if spec.kind == "zero_v":
        return np.zeros((2,) + grid.shape)
    if spec.kind == "taylor_green_v":
        return taylor_green(grid, spec.amplitude)
    if spec.kind == "random_smooth":
        rng = philox(seed, stream=2)
        v = grid.leray_project(_band_limited(grid, rng, 2, spec.band_limit))
        v -= v.mean(axis=(-2, -1), keepdims=True)
        return spec.amplitude * v / max(np.abs(v).max(), 1e-300)
    raise ValueError(f"unknown velocity kind {spec.kind!r}")
