"""Pointwise Oseen-Frank elastic density and its closed-form derivatives.

All functions broadcast over trailing axes: ``u`` has shape ``(3, ...)``
and the Jacobian ``p`` has shape ``(3, 2, ...)`` with ``p[i, a] = d_a u^i``
(the third spatial derivative is identically zero).

The density is used in the split form

    W(u, p) = a |p|^2 + V(u, p),   a = min(k1, k2, k3),
    V = (k1 - a) (div u)^2 + (k2 - a) (u . curl u)^2 + (k3 - a) |u x curl u|^2,

with ``|u x c|^2`` expanded as ``|u|^2 |c|^2 - (u . c)^2`` so that the
formulas stay meaningful off the sphere (Ginzburg-Landau mode).  On unit
fields the full four-constant density differs from ``W`` by the null
Lagrangian ``(k4 - a) [tr(p^2) - (div u)^2]``, which is reported separately
by :func:`null_lagrangian` / :func:`frank_density`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FrankConstants",
    "divergence",
    "curl",
    "eval_density",
    "d_density_dp",
    "d_density_du",
    "hessian_pp_quadratic",
    "elastic_stress",
    "null_lagrangian",
    "frank_density",
    "rotate_state",
    "rotation_about_x3",
]


@dataclass(frozen=True)
class FrankConstants:
    """Splay, twist, bend and saddle-splay constants."""

    k1: float
    k2: float
    k3: float
    k4: float = 0.0
    a: float = field(init=False)

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if min(self.k1, self.k2, self.k3) <= 0:
            raise ValueError("k1, k2, k3 must be strictly positive")
        if self.k4 < 0:
            raise ValueError("k4 must be nonnegative")
        object.__setattr__(self, "a", min(self.k1, self.k2, self.k3))

    @classmethod
    def equal(cls, a: float) -> "FrankConstants":
        return cls(a, a, a, a)

    @property
    def kmax(self) -> float:
        return max(self.k1, self.k2, self.k3, self.k4)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.k1, self.k2, self.k3, self.k4)


def divergence(p: np.ndarray) -> np.ndarray:
    return p[0, 0] + p[1, 1]


def curl(p: np.ndarray) -> np.ndarray:
    return np.stack([p[2, 1], -p[2, 0], p[1, 0] - p[0, 1]])


def _curl_adjoint(s: np.ndarray) -> np.ndarray:
    """Gradient of ``s . curl(p)`` with respect to ``p`` (s held fixed)."""
    g = np.zeros((3, 2) + s.shape[1:], dtype=np.result_type(s, float))
    g[2, 1] = s[0]
    g[2, 0] = -s[1]
    g[1, 0] = s[2]
    g[0, 1] = -s[2]
    return g


def _invariants(u, p):
    d = divergence(p)
    c = curl(p)
    t = np.einsum("i...,i...->...", u, c)
    uu = np.einsum("i...,i...->...", u, u)
    cc = np.einsum("i...,i...->...", c, c)
    return d, c, t, uu, cc


def eval_density(c: FrankConstants, u: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W, V)`` with ``W = a|p|^2 + V``."""
    d, _, t, uu, cc = _invariants(u, p)
    V = (c.k1 - c.a) * d * d + (c.k2 - c.a) * t * t + (c.k3 - c.a) * (uu * cc - t * t)
    pp = np.einsum("ia...,ia...->...", p, p)
    return c.a * pp + V, V


def d_density_dp(c: FrankConstants, u: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W_p, V_p)``, each shaped like ``p``."""
    d, cv, t, uu, _ = _invariants(u, p)
    Vp = _curl_adjoint(2.0 * (c.k2 - c.k3) * t * u + 2.0 * (c.k3 - c.a) * uu * cv)
    Vp[0, 0] += 2.0 * (c.k1 - c.a) * d
    Vp[1, 1] += 2.0 * (c.k1 - c.a) * d
    return 2.0 * c.a * p + Vp, Vp


def d_density_du(c: FrankConstants, u: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W_u, V_u)``; only ``V`` depends on ``u`` explicitly, so they coincide."""
    _, cv, t, _, cc = _invariants(u, p)
    Vu = 2.0 * (c.k2 - c.k3) * t * cv + 2.0 * (c.k3 - c.a) * cc * u
    return Vu, Vu.copy()


def hessian_pp_quadratic(c: FrankConstants, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``W_{p p}(u)[xi, xi]``.  W is quadratic in p, so this is ``2 W(u, xi)``."""
    W, _ = eval_density(c, u, xi)
    return 2.0 * W


def elastic_stress(c: FrankConstants, u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``sigma[i, j] = sum_k d_i u^k W_{p_j^k}``, shape ``(2, 2, ...)``."""
    Wp, _ = d_density_dp(c, u, p)
    return np.einsum("ki...,kj...->ij...", p, Wp)


def null_lagrangian(p: np.ndarray) -> np.ndarray:
    """``tr(p^2) - (div u)^2``, which in 2D reduces to ``-2 det`` of the in-plane block."""
    return 2.0 * (p[0, 1] * p[1, 0] - p[0, 0] * p[1, 1])


def frank_density(c: FrankConstants, u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Full four-term Oseen-Frank density (equals the literal formula for unit ``u``)."""
    W, _ = eval_density(c, u, p)
    return W + (c.k4 - c.a) * null_lagrangian(p)


def rotation_about_x3(theta: float, reflect: bool = False) -> np.ndarray:
    ct, st = np.cos(theta), np.sin(theta)
    R = np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])
    if reflect:
        R = R @ np.diag([1.0, -1.0, 1.0])
    return R


def rotate_state(R: np.ndarray, u: np.ndarray, p: np.ndarray, spatial: bool = True):
    """Apply an orthogonal ``R`` to a point state.

    With ``spatial=True`` the rotation acts on values and on the plane,
    ``u -> R u`` and ``p -> R p Q^T`` where ``Q`` is the in-plane block of
    ``R``; this requires ``R`` to map the x3 axis to itself.  With
    ``spatial=False`` only the value slot is rotated (``p -> R p``).
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.allclose(R.T @ R, np.eye(3), rtol=0, atol=1e-12):
        raise ValueError("R must be a 3x3 orthogonal matrix")
    ru = np.einsum("ij,j...->i...", R, u)
    rp = np.einsum("ij,ja...->ia...", R, p)
    if spatial:
        if abs(abs(R[2, 2]) - 1.0) > 1e-12:
            raise ValueError("spatial action needs a rotation that preserves the x3 axis")
        Q = R[:2, :2]
        rp = np.einsum("ia...,ba->ib...", rp, Q)
    return ru, rp
