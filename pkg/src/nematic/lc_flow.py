"""Director gradient flow on S^2 and its Ginzburg-Landau relaxation.

The discrete energy is ``E_h(u) = h^2 sum W(u, D u)`` with ``D`` the centered
difference.  Its exact discrete L^2 gradient is

    -grad E_h = D_a . W_{p_a}(u, Du) - W_u(u, Du) =: G(u).

The constrained flow uses ``H = G - (u.G) u / |u|^2``, which on unit fields is
the same operator as the six-term form of the liquid crystal flow; the
six-term assembly itself is available as :func:`flow_rhs_terms`.  Because
``H`` is the tangential part of an exact discrete gradient, the semi-discrete
energy law ``dE/dt = -|H|^2`` holds to rounding.

The Ginzburg-Landau right-hand side is ``G + eps^-2 u (1 - |u|^2)``, the
exact negative gradient of ``E_h + (1/4 eps^2) h^2 sum (1 - |u|^2)^2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import oseen_frank as of
from .errors import BlowUpError, ConfigError, NonFiniteError
from .grid import Grid2

log = logging.getLogger(__name__)

Mode = Literal["constrained", "ginzburg_landau"]

TERM_NAMES = (
    "D.W_p",
    "-D.(u u.V_p)",
    "-W_u",
    "(W_u.u) u",
    "(W_p.Du) u",
    "(V_p.u) Du",
)


def _check_finite(arr: np.ndarray, term: int, name: str = "") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(term, name)
    return arr


def variational_gradient(grid: Grid2, c: of.FrankConstants, u: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
    """``G = D.W_p - W_u``: the negative discrete L^2 gradient of the elastic energy.

    ``p`` may pass in a precomputed ``grid.gradient(u)``.
    """
    if p is None:
        p = grid.gradient(u)
    Wp, _ = of.d_density_dp(c, u, p)
    Wu, _ = of.d_density_du(c, u, p)
    div = _check_finite(grid.divergence_rows(Wp), 0, "D.W_p")
    return div - _check_finite(Wu, 1, "W_u")


def tangent_part(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Pointwise projection onto the tangent plane of the sphere of radius |u|."""
    ug = np.sum(u * g, axis=0)
    uu = np.sum(u * u, axis=0)
    return g - (ug / uu) * u


def flow_rhs(grid: Grid2, c: of.FrankConstants, u: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side of the constrained director flow."""
    return _check_finite(tangent_part(u, variational_gradient(grid, c, u, p)), 2, "projection")


def flow_rhs_terms(grid: Grid2, c: of.FrankConstants, u: np.ndarray) -> list[np.ndarray]:
    """The six summands of the liquid crystal flow assembled literally.

    Their sum agrees with :func:`flow_rhs` up to O(h^2) on unit fields; the
    order follows ``TERM_NAMES``.
    """
    p = grid.gradient(u)
    Wp, Vp = of.d_density_dp(c, u, p)
    Wu, _ = of.d_density_du(c, u, p)
    uVp = np.einsum("l...,la...->a...", u, Vp)  # u^l V_{p_a^l}
    terms = [
        grid.divergence_rows(Wp),
        -grid.divergence_rows(u[:, None] * uVp[None]),
        -Wu,
        np.sum(Wu * u, axis=0) * u,
        np.einsum("la...,la...->...", Wp, p) * u,
        np.einsum("a...,ia...->i...", uVp, p),
    ]
    for k, t in enumerate(terms):
        _check_finite(t, k, TERM_NAMES[k])
    return terms


def gl_rhs(grid: Grid2, c: of.FrankConstants, eps: float, u: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side of the Ginzburg-Landau flow."""
    G = variational_gradient(grid, c, u, p)
    uu = np.sum(u * u, axis=0)
    return _check_finite(G + u * ((1.0 - uu) / eps**2), 2, "penalty")


def elastic_energy_density(grid: Grid2, c: of.FrankConstants, u: np.ndarray, p: np.ndarray | None = None):
    """``(W, V)`` on the grid."""
    return of.eval_density(c, u, grid.gradient(u) if p is None else p)


def gl_penalty_density(u: np.ndarray, eps: float) -> np.ndarray:
    uu = np.sum(u * u, axis=0)
    return (1.0 - uu) ** 2 / (4.0 * eps**2)


def energy(grid: Grid2, c: of.FrankConstants, u: np.ndarray, eps: float | None = None) -> float:
    W, _ = elastic_energy_density(grid, c, u)
    E = float(grid.integrate(W))
    if eps is not None:
        E += float(grid.integrate(gl_penalty_density(u, eps)))
    return E


# ----------------------------------------------------------------------
# configuration and time stepping
# ----------------------------------------------------------------------
def max_stable_dt(grid: Grid2, c: of.FrankConstants, cfl_safety: float, eps: float | None = None) -> float:
    dt = cfl_safety * grid.h**2 / (8.0 * c.kmax)
    if eps is not None:
        dt = min(dt, cfl_safety * eps**2 / 4.0)
    return dt


@dataclass(frozen=True)
class FlowConfig:
    constants: of.FrankConstants
    dt: float
    t_end: float
    mode: Mode = "constrained"
    epsilon: float | None = None
    cfl_safety: float = 0.5
    diag_stride: int = 1

    def __post_init__(self):
        if self.mode not in ("constrained", "ginzburg_landau"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if (self.mode == "ginzburg_landau") != (self.epsilon is not None):
            raise ConfigError("epsilon is required in ginzburg_landau mode and only there")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError("cfl_safety must lie in (0, 1]")
        if not self.dt > 0 or self.t_end < 0:
            raise ConfigError("dt must be positive and t_end nonnegative")
        if int(self.diag_stride) < 1:
            raise ConfigError("diag_stride must be >= 1")

    @property
    def eps(self) -> float | None:
        return self.epsilon if self.mode == "ginzburg_landau" else None

    def check_cfl(self, grid: Grid2) -> None:
        limit = max_stable_dt(grid, self.constants, self.cfl_safety, self.eps)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt = {self.dt:.3e} exceeds the stability limit {limit:.3e}")

    def rhs(self, grid: Grid2, u: np.ndarray) -> np.ndarray:
        if self.mode == "constrained":
            return flow_rhs(grid, self.constants, u)
        return gl_rhs(grid, self.constants, self.epsilon, u)


@dataclass
class FlowState:
    u: np.ndarray
    t: float = 0.0
    step_count: int = 0
    energy_ledger: list = field(default_factory=list)
    # running per-step accumulators (midpoint rule on pre-projection increments)
    dissipation_integral: float = 0.0
    projection_correction: float = 0.0
    min_norm: float = 1.0
    max_norm: float = 1.0


def rk4_increment(f, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def normalize(u: np.ndarray, t: float = 0.0, floor: float = 0.1) -> np.ndarray:
    norm = np.sqrt(np.sum(u * u, axis=0))
    if norm.min() < floor:
        node = np.unravel_index(int(np.argmin(norm)), norm.shape)
        raise BlowUpError(tuple(int(i) for i in node), float(norm[node]), t)
    return u / norm


def step(grid: Grid2, cfg: FlowConfig, st: FlowState) -> FlowState:
    """One explicit RK4 step; constrained mode renormalizes at the end of the step."""
    du = rk4_increment(lambda y: cfg.rhs(grid, y), st.u, cfg.dt)
    u_star = st.u + du
    t_new = st.t + cfg.dt
    dissipation = float(grid.integrate(np.sum(du * du, axis=0))) / cfg.dt
    if cfg.mode == "constrained":
        u_new = normalize(u_star, t_new)
        corr = grid.l2norm(u_new - u_star)
    else:
        u_new = u_star
        corr = 0.0
    norms = np.sqrt(np.sum(u_star * u_star, axis=0))
    return replace(
        st,
        u=u_new,
        t=t_new,
        step_count=st.step_count + 1,
        dissipation_integral=st.dissipation_integral + dissipation,
        projection_correction=st.projection_correction + corr,
        min_norm=min(st.min_norm, float(norms.min())),
        max_norm=max(st.max_norm, float(norms.max())),
    )


def run(grid: Grid2, cfg: FlowConfig, u0: np.ndarray, detector=None, snapshot_hook=None):
    """Integrate to ``cfg.t_end``.

    Returns ``(state, reports, events)``.  Diagnostics are taken every
    ``diag_stride`` steps (and at the initial and final time); concentration
    events are recorded, not fatal.  A blow-up abort re-raises with the
    partial ``(state, reports, events)`` attached as ``err.partial``.
    ``snapshot_hook(state)`` is called at every diagnostic sample when given.
    """
    from . import diagnostics as dg

    cfg.check_cfl(grid)
    u0 = np.array(u0, dtype=float)
    if cfg.mode == "constrained":
        dev = np.abs(np.sqrt(np.sum(u0 * u0, axis=0)) - 1.0).max()
        if dev > 1e-8:
            raise ConfigError(f"constrained mode needs unit initial data (max ||u|-1| = {dev:.2e})")
    norms = np.sqrt(np.sum(u0 * u0, axis=0))
    st = FlowState(u=u0, min_norm=float(norms.min()), max_norm=float(norms.max()))
    nsteps = int(round(cfg.t_end / cfg.dt))
    if abs(nsteps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        log.warning("t_end is not a multiple of dt; integrating %d steps to t = %.6g", nsteps, nsteps * cfg.dt)

    E0 = None
    events = []
    reports = []

    def sample(state):
        nonlocal E0
        rep = dg.flow_report(grid, cfg, state, detector=detector)
        if E0 is None:
            E0 = rep.E_total
        rep.identity_residual = rep.dissipation_integral + rep.E_total - E0
        if reports:
            rep.dissipation_increment = rep.dissipation_integral - reports[-1].dissipation_integral
        reports.append(rep)
        state.energy_ledger.append(rep)
        if detector is not None:
            events.extend(dg.detect_concentration(grid, dg.flow_density(grid, cfg, state.u), state.t, detector))
        if snapshot_hook is not None:
            snapshot_hook(state)

    if detector is not None:
        detector.validate(grid)
    sample(st)
    for k in range(nsteps):
        try:
            st = step(grid, cfg, st)
        except (BlowUpError, NonFiniteError) as err:
            err.partial = (st, reports, events)
            raise
        if (k + 1) % cfg.diag_stride == 0 or k + 1 == nsteps:
            sample(st)
    return st, reports, events
