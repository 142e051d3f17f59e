"""Periodic 2D grid and the discrete operators used throughout the package.

Fields are plain ``float64`` numpy arrays whose last two axes are the
spatial axes ``(x, y)`` (``indexing="ij"``).  Leading axes hold components:

* scalar field  ``(n, n)``
* Vec2 field    ``(2, n, n)``
* Vec3 field    ``(3, n, n)``
* Mat32 field   ``(3, 2, n, n)`` with ``p[i, a] = d_a u^i``

Nonlinear terms use second-order centered differences.  Only the
constant-coefficient solves (Poisson, Leray projection) and a few
explicitly named helpers are spectral.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid2",
    "NonzeroMeanWarning",
    "write_snapshot",
    "read_snapshot",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
]


class NonzeroMeanWarning(UserWarning):
    """Emitted when a Poisson right-hand side had to be made mean-free."""

    def __init__(self, mean: float):
        super().__init__(f"Poisson right-hand side has mean {mean:.3e}; removed")
        self.mean = mean


@dataclass(frozen=True)
class Grid2:
    """Uniform ``n x n`` grid on the torus ``[0, L)^2``."""

    n: int
    length: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"period must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.h
        return tuple(np.meshgrid(x, x, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular wavenumbers on the half-spectrum layout of ``rfft2``."""
        kx = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        ky = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)
        return kx[:, None] * np.ones_like(ky)[None, :], np.ones_like(kx)[:, None] * ky[None, :]

    @cached_property
    def _spectral_derivative_symbols(self) -> tuple[np.ndarray, np.ndarray]:
        # Nyquist mode is dropped for first derivatives so they stay real and
        # antisymmetric.
        kx, ky = self.wavenumbers
        nyq = self.n // 2
        kx = kx.copy()
        ky = ky.copy()
        kx[nyq, :] = 0.0
        ky[:, nyq] = 0.0
        return 1j * kx, 1j * ky

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        return kx**2 + ky**2

    @cached_property
    def _k2_inv(self) -> np.ndarray:
        k2 = self.k2.copy()
        k2[0, 0] = 1.0
        inv = 1.0 / k2
        inv[0, 0] = 0.0
        return inv

    @cached_property
    def _leray_symbols(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ikx, iky = self._spectral_derivative_symbols
        kx, ky = ikx.imag, iky.imag
        kk = kx * kx + ky * ky
        kk[kk == 0.0] = 1.0
        return kx, ky, 1.0 / kk

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        kmax = (2.0 / 3.0) * np.pi / self.h
        return (np.abs(kx) < kmax) & (np.abs(ky) < kmax)

    # ------------------------------------------------------------------
    # centered finite differences
    # ------------------------------------------------------------------
    def ddx(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Second-order centered difference along spatial axis 0 (x) or 1 (y)."""
        ax = f.ndim - 2 + axis
        return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * self.h)

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Jacobian ``p[..., a, :, :] = d_a f[...]``; a Vec3 field gives Mat32."""
        return np.stack([self.ddx(f, 0), self.ddx(f, 1)], axis=-3)

    def divergence(self, u: np.ndarray) -> np.ndarray:
        """``d_1 u^1 + d_2 u^2`` (the third component has no spatial derivative)."""
        return self.ddx(u[0], 0) + self.ddx(u[1], 1)

    def curl(self, u: np.ndarray) -> np.ndarray:
        """Curl of a Vec3 field with ``d_3 = 0``: ``(d2 u3, -d1 u3, d1 u2 - d2 u1)``."""
        return np.stack(
            [
                self.ddx(u[2], 1),
                -self.ddx(u[2], 0),
                self.ddx(u[1], 0) - self.ddx(u[0], 1),
            ]
        )

    def divergence_rows(self, q: np.ndarray) -> np.ndarray:
        """Row divergence of a ``(..., 2, n, n)`` array: ``sum_a d_a q[..., a]``."""
        return self.ddx(q[..., 0, :, :], 0) + self.ddx(q[..., 1, :, :], 1)

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Compact five-point Laplacian."""
        h2 = self.h * self.h
        ax, ay = f.ndim - 2, f.ndim - 1
        return (
            np.roll(f, 1, ax) + np.roll(f, -1, ax) + np.roll(f, 1, ay) + np.roll(f, -1, ay) - 4.0 * f
        ) / h2

    def hessian(self, f: np.ndarray) -> np.ndarray:
        """Componentwise Hessian by repeated centered differences, shape ``(..., 2, 2, n, n)``."""
        g = self.gradient(f)
        return np.stack([self.ddx(g, 0), self.ddx(g, 1)], axis=-3)

    # ------------------------------------------------------------------
    # quadrature
    # ------------------------------------------------------------------
    def integrate(self, f: np.ndarray) -> float | np.ndarray:
        """Rectangle rule ``h^2 * sum`` over the spatial axes."""
        return self.h * self.h * np.sum(f, axis=(-2, -1))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(self.h * self.h * np.sum(f * g))

    def l2norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.inner(f, f)))

    # ------------------------------------------------------------------
    # spectral helpers
    # ------------------------------------------------------------------
    def fft(self, f: np.ndarray) -> np.ndarray:
        """Real-to-half-complex transform over the spatial axes."""
        return np.fft.rfft2(f, axes=(-2, -1))

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(fh, s=self.shape, axes=(-2, -1))

    def spectral_gradient(self, f: np.ndarray) -> np.ndarray:
        ikx, iky = self._spectral_derivative_symbols
        fh = self.fft(f)
        return self.ifft(np.stack([ikx * fh, iky * fh], axis=-3))

    def spectral_divergence(self, v: np.ndarray) -> np.ndarray:
        ikx, iky = self._spectral_derivative_symbols
        vh = self.fft(v)
        return self.ifft(ikx * vh[0] + iky * vh[1])

    def spectral_laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.ifft(-self.k2 * self.fft(f))

    def spectral_dirichlet(self, f: np.ndarray) -> float:
        """``int |grad f|^2`` by Parseval with the same symbol as :meth:`spectral_laplacian`."""
        fh = self.fft(f)
        w = np.abs(fh) ** 2 * self.k2
        # half spectrum: interior columns stand for two conjugate modes
        weight = np.full(self.k2.shape[-1], 2.0)
        weight[0] = 1.0
        weight[-1] = 1.0
        return float(self.h * self.h * np.sum(w * weight) / self.n**2)

    def dealias(self, f: np.ndarray) -> np.ndarray:
        return self.ifft(self.fft(f) * self.dealias_mask)

    def poisson_solve(self, f: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Mean-zero solution of ``lap p = f`` (spectral Laplacian).

        A right-hand side whose mean exceeds ``tol * ||f||`` is made mean-free
        and a :class:`NonzeroMeanWarning` carrying the removed mean is issued.
        """
        mean = float(np.mean(f))
        scale = float(np.sqrt(np.mean(f * f)))
        if abs(mean) > tol * max(scale, np.finfo(float).tiny):
            warnings.warn(NonzeroMeanWarning(mean), stacklevel=2)
        return self.ifft(-self.fft(f) * self._k2_inv)

    def leray_hat(self, vh: np.ndarray) -> np.ndarray:
        """Leray projection acting on transformed Vec2 data."""
        kx, ky, inv = self._leray_symbols
        proj = (kx * vh[0] + ky * vh[1]) * inv
        return np.stack([vh[0] - kx * proj, vh[1] - ky * proj])

    def leray_project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of a Vec2 field onto spectrally divergence-free fields.

        The mean (k = 0) mode is kept; the Nyquist lines are treated as in
        :meth:`spectral_divergence` so the output is exactly divergence-free in
        that sense.
        """
        return self.ifft(self.leray_hat(self.fft(v)))

    def shift(self, f: np.ndarray, di: int, dj: int) -> np.ndarray:
        """Translate a field by ``(di, dj)`` cells."""
        return np.roll(np.roll(f, di, axis=-2), dj, axis=-1)

    def periodic_offset(self, cx: float, cy: float) -> tuple[np.ndarray, np.ndarray]:
        """Minimum-image displacement of every node from ``(cx, cy)``."""
        x, y = self.coords
        L = self.length
        dx = (x - cx + 0.5 * L) % L - 0.5 * L
        dy = (y - cy + 0.5 * L) % L - 0.5 * L
        return dx, dy


# ----------------------------------------------------------------------
# snapshot files
# ----------------------------------------------------------------------
SNAPSHOT_MAGIC = b"NFLD"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIdId")


def write_snapshot(path: str | Path, grid: Grid2, data: np.ndarray, time: float = 0.0) -> None:
    """Write a field as little-endian ``NFLD`` binary (header + row-major f64)."""
    data = np.asarray(data, dtype=np.float64)
    if data.shape[-2:] != grid.shape:
        raise ValueError(f"field shape {data.shape} does not match grid {grid.shape}")
    arity = int(np.prod(data.shape[:-2], dtype=int))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.n, grid.length, arity, float(time)))
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes(order="C"))


def read_snapshot(path: str | Path) -> tuple[Grid2, np.ndarray, float]:
    """Inverse of :func:`write_snapshot`; returns ``(grid, data, time)``.

    ``data`` has shape ``(n, n)`` for arity 1 and ``(arity, n, n)`` otherwise;
    Mat32 fields come back flattened to arity 6.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, length, arity, time = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * arity * n * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    shape = (n, n) if arity == 1 else (arity, n, n)
    return Grid2(n, length), data.reshape(shape), time
