"""Reference implementations used only for cross-checking the main modules.

Nothing here imports the flow modules: each oracle is written against plain
numpy so that an agreement is evidence rather than an identity.
"""

from __future__ import annotations

import numpy as np


def wide_laplacian(u: np.ndarray, h: float) -> np.ndarray:
    """Laplacian from the composed centered difference, ``(f(x+2h) - 2f + f(x-2h)) / 4h^2`` per axis."""
    out = np.zeros_like(u)
    for ax in (-2, -1):
        out += (np.roll(u, -2, ax) - 2.0 * u + np.roll(u, 2, ax)) / (4.0 * h * h)
    return out


def harmonic_map_rhs(u: np.ndarray, h: float, a: float = 1.0) -> np.ndarray:
    """Harmonic map heat flow ``2a (lap u + |grad u|^2 u)`` written as the tangential Laplacian."""
    lap = 2.0 * a * wide_laplacian(u, h)
    return lap - (np.sum(u * lap, axis=0) / np.sum(u * u, axis=0)) * u


def harmonic_map_step(u: np.ndarray, h: float, dt: float, a: float = 1.0) -> np.ndarray:
    k1 = harmonic_map_rhs(u, h, a)
    k2 = harmonic_map_rhs(u + 0.5 * dt * k1, h, a)
    k3 = harmonic_map_rhs(u + 0.5 * dt * k2, h, a)
    k4 = harmonic_map_rhs(u + dt * k3, h, a)
    w = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return w / np.sqrt(np.sum(w * w, axis=0))


def harmonic_map_rhs_continuum(u: np.ndarray, h: float) -> np.ndarray:
    """``lap u + |grad u|^2 u`` with compact five-point Laplacian and centered gradients."""
    lap = np.zeros_like(u)
    grad2 = np.zeros(u.shape[1:])
    for ax in (-2, -1):
        lap += (np.roll(u, -1, ax) - 2.0 * u + np.roll(u, 1, ax)) / (h * h)
        d = (np.roll(u, -1, ax) - np.roll(u, 1, ax)) / (2.0 * h)
        grad2 += np.sum(d * d, axis=0)
    return lap + grad2 * u


def taylor_green_velocity(x, y, L, amplitude=1.0, t=0.0, nu=0.0):
    k = 2.0 * np.pi / L
    s = amplitude * np.exp(-2.0 * nu * k * k * t)
    return s * np.sin(k * x) * np.cos(k * y), -s * np.cos(k * x) * np.sin(k * y)


def taylor_green_pressure(x, y, L, amplitude=1.0, t=0.0, nu=0.0):
    k = 2.0 * np.pi / L
    s2 = amplitude**2 * np.exp(-4.0 * nu * k * k * t)
    return 0.25 * s2 * (np.cos(2 * k * x) + np.cos(2 * k * y))


def bubble_energy_in_disc(lam: float, R: float) -> float:
    """Dirichlet energy of the degree-one bubble of scale ``lam`` inside the disc of radius ``R``."""
    return 8.0 * np.pi * R * R / (R * R + lam * lam)


def central_difference(f, x: np.ndarray, step: float) -> np.ndarray:
    """Gradient of a batched scalar function by central differences.

    ``f`` maps an array shaped like ``x`` to values with the trailing batch
    shape; the leading (component) axes of ``x`` are differentiated.
    """
    comp_shape = x.shape[: x.ndim - 1]
    out = np.zeros_like(x)
    for idx in np.ndindex(*comp_shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += step
        xm[idx] -= step
        out[idx] = (f(xp) - f(xm)) / (2.0 * step)
    return out
