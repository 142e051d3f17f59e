"""Ericksen-Leslie system: Navier-Stokes forced by the elastic stress, plus the transported director.

With ``G`` the negative discrete gradient of the elastic energy and
``H = flow_rhs(u)`` its tangential part, the semi-discrete system is

    u_t = H - P_u[(v.D) u]                          (constrained)
    u_t = G_eps - (v.D) u                           (Ginzburg-Landau)
    v_t = Leray[-B(v) - lam F] + nu lap v,   F_i = (D_i u) . H + d_i W,

where ``P_u`` is the tangent projection, ``D`` the centered difference and
``B`` the skew-symmetric spectral advection ``(1/2)[(v.grad)v + div(v v)]``.
``F`` equals the divergence of the elastic stress up to O(h^2) and makes
the advective exchange terms of the director and momentum ledgers cancel
exactly, so ``E = lam int W + 1/2 int |v|^2`` obeys
``dE/dt = -lam |H|^2 - nu |grad v|^2`` to rounding.

Viscosity is integrated exactly in Fourier space (Lawson RK4).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import diagnostics as dg
from . import lc_flow as lf
from . import oseen_frank as of
from .errors import BlowUpError, ConfigError, NonFiniteError
from .grid import Grid2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ELParams:
    constants: of.FrankConstants
    dt: float
    t_end: float
    nu: float = 1.0
    lam: float = 1.0
    mode: lf.Mode = "constrained"
    epsilon: float | None = None
    cfl_safety: float = 0.5
    diag_stride: int = 1
    dealias: bool = False
    freeze_velocity: bool = False  # prescribed (kinematic) velocity; v0 is kept fixed

    def __post_init__(self):
        # reuse the director-flow validation
        lf.FlowConfig(self.constants, self.dt, self.t_end, self.mode, self.epsilon, self.cfl_safety, self.diag_stride)
        if not self.nu > 0 or not self.lam > 0:
            raise ConfigError("nu and lambda must be positive")

    @property
    def eps(self) -> float | None:
        return self.epsilon if self.mode == "ginzburg_landau" else None

    def flow_config(self) -> lf.FlowConfig:
        return lf.FlowConfig(self.constants, self.dt, self.t_end, self.mode, self.epsilon, self.cfl_safety, self.diag_stride)

    def max_stable_dt(self, grid: Grid2, vmax: float) -> float:
        h = grid.h
        limit = min(h * h / (8.0 * self.constants.kmax), h * h / (4.0 * self.nu), h / (vmax + 1e-12))
        if self.eps is not None:
            limit = min(limit, self.eps**2 / 4.0)
        return self.cfl_safety * limit

    def check_cfl(self, grid: Grid2, v: np.ndarray) -> None:
        vmax = float(np.sqrt(np.sum(v * v, axis=0)).max())
        limit = self.max_stable_dt(grid, vmax)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt = {self.dt:.3e} exceeds the stability limit {limit:.3e}")


@dataclass
class ELState:
    u: np.ndarray
    v: np.ndarray
    P: np.ndarray | None = None
    t: float = 0.0
    step_count: int = 0
    energy_ledger: list = field(default_factory=list)
    dissipation_integral: float = 0.0
    projection_correction: float = 0.0
    leray_correction: float = 0.0  # norm removed from v0 by the initial projection
    max_div: float = 0.0  # max over steps of the spectral |div v|
    min_norm: float = 1.0
    max_norm: float = 1.0


# ----------------------------------------------------------------------
# right-hand sides
# ----------------------------------------------------------------------
def advection(grid: Grid2, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``(v . D) u`` with the centered stencil."""
    return v[0] * grid.ddx(u, 0) + v[1] * grid.ddx(u, 1)


def _advection_hat(grid: Grid2, v: np.ndarray, vh: np.ndarray, dealias: bool) -> np.ndarray:
    ikx, iky = grid._spectral_derivative_symbols
    if dealias:
        vh = vh * grid.dealias_mask
        v = grid.ifft(vh)
    gv = grid.ifft(np.stack([ikx * vh, iky * vh], axis=1))  # gv[i, j] = d_j v_i
    conv = np.einsum("j...,ij...->i...", v, gv)
    th = grid.fft(np.stack([v[0] * v[0], v[0] * v[1], v[1] * v[1]]))
    div = np.stack([ikx * th[0] + iky * th[1], ikx * th[1] + iky * th[2]])
    out = 0.5 * (grid.fft(conv) + div)
    return out * grid.dealias_mask if dealias else out


def nonlinear_advection(grid: Grid2, v: np.ndarray, dealias: bool = False) -> np.ndarray:
    """Skew-symmetric spectral form ``(1/2)[(v.grad)v + div(v v)]``."""
    return grid.ifft(_advection_hat(grid, v, grid.fft(v), dealias))


def _driving(grid: Grid2, p: ELParams, u: np.ndarray, Du: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Director driving term (``H`` or ``G_eps``) and the matching energy density."""
    if p.mode == "constrained":
        drive = lf.flow_rhs(grid, p.constants, u, Du)
        e, _ = lf.elastic_energy_density(grid, p.constants, u, Du)
    else:
        drive = lf.gl_rhs(grid, p.constants, p.epsilon, u, Du)
        W, _ = lf.elastic_energy_density(grid, p.constants, u, Du)
        e = W + lf.gl_penalty_density(u, p.epsilon)
    return drive, e


def _elastic_force_hat(grid: Grid2, Du: np.ndarray, drive: np.ndarray, e: np.ndarray) -> np.ndarray:
    ikx, iky = grid._spectral_derivative_symbols
    eh = grid.fft(e)
    return grid.fft(np.einsum("ia...,i...->a...", Du, drive)) + np.stack([ikx * eh, iky * eh])


def elastic_force(grid: Grid2, u: np.ndarray, drive: np.ndarray, e: np.ndarray) -> np.ndarray:
    """``F_i = (D_i u) . drive + d_i e``; ``d_i e`` is spectral (a pure gradient)."""
    return grid.ifft(_elastic_force_hat(grid, grid.gradient(u), drive, e))


def _forcing_hat(grid: Grid2, p: ELParams, Du, v, vh, drive, e) -> np.ndarray:
    """Transformed ``-B(v) - lam F`` before projection."""
    fh = -_advection_hat(grid, v, vh, p.dealias) - p.lam * _elastic_force_hat(grid, Du, drive, e)
    if not np.all(np.isfinite(fh)):
        raise NonFiniteError(3, "momentum forcing")
    return fh


def _director(p: ELParams, u: np.ndarray, drive: np.ndarray, adv: np.ndarray) -> np.ndarray:
    if p.mode == "constrained":
        return drive - lf.tangent_part(u, adv)
    return drive - adv


def _terms(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray, vh: np.ndarray):
    """Director rate, projected transformed momentum forcing, and the driving term."""
    Du = grid.gradient(u)
    drive, e = _driving(grid, p, u, Du)
    du = _director(p, u, drive, v[0] * Du[:, 0] + v[1] * Du[:, 1])
    if p.freeze_velocity:
        return du, None, drive
    return du, grid.leray_hat(_forcing_hat(grid, p, Du, v, vh, drive, e)), drive


def momentum_rhs(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``Leray[-B(v) + nu lap v - lam F]``."""
    Du = grid.gradient(u)
    drive, e = _driving(grid, p, u, Du)
    vh = grid.fft(v)
    fh = _forcing_hat(grid, p, Du, v, vh, drive, e) - p.nu * grid.k2 * vh
    return grid.ifft(grid.leray_hat(fh))


def director_rhs_el(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``flow_rhs(u)`` minus the tangential part of ``(v.D)u`` (constrained mode)."""
    if p.mode != "constrained":
        raise ConfigError("director_rhs_el is the constrained-mode director equation")
    return _director(p, u, lf.flow_rhs(grid, p.constants, u), advection(grid, v, u))


def gl_el_rhs(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(momentum, director)`` of the Ginzburg-Landau approximation."""
    if p.mode != "ginzburg_landau":
        raise ConfigError("gl_el_rhs needs ginzburg_landau mode")
    director = lf.gl_rhs(grid, p.constants, p.epsilon, u) - advection(grid, v, u)
    return momentum_rhs(grid, p, u, v), director


# ----------------------------------------------------------------------
# pressure
# ----------------------------------------------------------------------
def pressure_diagnostic(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Mean-zero ``P`` with ``lap P = div(-B(v) - lam F)``.

    ``grad P`` is exactly the gradient part that the Leray projection removes
    from the momentum forcing.
    """
    Du = grid.gradient(u)
    drive, e = _driving(grid, p, u, Du)
    fh = _forcing_hat(grid, p, Du, v, grid.fft(v), drive, e)
    ikx, iky = grid._spectral_derivative_symbols
    # same symbols as the Leray projection, so the Nyquist lines are treated alike
    _, _, inv = grid._leray_symbols
    return grid.ifft(-(ikx * fh[0] + iky * fh[1]) * inv)


def pressure_from_stress(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``lap P = -d_i d_j (lam sigma_ij + v_i v_j)`` with the Oseen-Frank stress; O(h^2) from :func:`pressure_diagnostic`."""
    sigma = of.elastic_stress(p.constants, u, grid.gradient(u))
    Th = grid.fft(p.lam * sigma + v[:, None] * v[None, :])
    ik = grid._spectral_derivative_symbols
    rhs = -sum(ik[i] * ik[j] * Th[i, j] for i in range(2) for j in range(2))
    return grid.poisson_solve(grid.ifft(rhs))


# ----------------------------------------------------------------------
# time stepping
# ----------------------------------------------------------------------
def _decay(grid: Grid2, nu: float, tau: float) -> np.ndarray:
    return np.exp(-nu * grid.k2 * tau)


def dissipation_rate(grid: Grid2, p: ELParams, drive: np.ndarray, v: np.ndarray) -> float:
    rate = p.lam * float(grid.integrate(np.sum(drive * drive, axis=0)))
    if not p.freeze_velocity:
        rate += p.nu * grid.spectral_dirichlet(v)
    return rate


def el_step(grid: Grid2, p: ELParams, st: ELState) -> ELState:
    """One Lawson-RK4 step (exact viscous factor), then director and Leray projections."""
    dt = p.dt
    u, v = st.u, st.v
    if p.freeze_velocity:
        k1u, _, d1 = _terms(grid, p, u, v, None)
        k2u = _terms(grid, p, u + 0.5 * dt * k1u, v, None)[0]
        k3u = _terms(grid, p, u + 0.5 * dt * k2u, v, None)[0]
        k4u = _terms(grid, p, u + dt * k3u, v, None)[0]
        du = (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v_new = v
        diss = dt * dissipation_rate(grid, p, d1, v)
    else:
        Eh = _decay(grid, p.nu, 0.5 * dt)
        Ef = _decay(grid, p.nu, dt)
        vh = grid.fft(v)
        k1u, k1v, d1 = _terms(grid, p, u, v, vh)
        u2 = u + 0.5 * dt * k1u
        v2h = Eh * (vh + 0.5 * dt * k1v)
        v2 = grid.ifft(v2h)
        k2u, k2v, d2 = _terms(grid, p, u2, v2, v2h)
        u3 = u + 0.5 * dt * k2u
        v3h = Eh * vh + 0.5 * dt * k2v
        v3 = grid.ifft(v3h)
        k3u, k3v, d3 = _terms(grid, p, u3, v3, v3h)
        u4 = u + dt * k3u
        v4h = Ef * vh + dt * Eh * k3v
        v4 = grid.ifft(v4h)
        k4u, k4v, d4 = _terms(grid, p, u4, v4, v4h)
        du = (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        vh_new = Ef * vh + (dt / 6.0) * (Ef * k1v + 2.0 * Eh * (k2v + k3v) + k4v)
        v_new = grid.ifft(grid.leray_hat(vh_new))
        r = [dissipation_rate(grid, p, d, w) for d, w in ((d1, v), (d2, v2), (d3, v3), (d4, v4))]
        diss = (dt / 6.0) * (r[0] + 2.0 * r[1] + 2.0 * r[2] + r[3])

    u_star = u + du
    t_new = st.t + dt
    if p.mode == "constrained":
        u_new = lf.normalize(u_star, t_new)
        corr = grid.l2norm(u_new - u_star)
    else:
        u_new, corr = u_star, 0.0
    norms = np.sqrt(np.sum(u_star * u_star, axis=0))
    return replace(
        st,
        u=u_new,
        v=v_new,
        t=t_new,
        step_count=st.step_count + 1,
        dissipation_integral=st.dissipation_integral + diss,
        projection_correction=st.projection_correction + corr,
        min_norm=min(st.min_norm, float(norms.min())),
        max_norm=max(st.max_norm, float(norms.max())),
        max_div=max(st.max_div, float(np.abs(grid.spectral_divergence(v_new)).max())),
    )


def coupled_density(grid: Grid2, p: ELParams, u: np.ndarray, v: np.ndarray, kind: str = "W") -> np.ndarray:
    """``lam W + |v|^2/2`` (``kind='W'``) or ``|grad u|^2 + |v|^2`` (``kind='dirichlet'``)."""
    vv = np.sum(v * v, axis=0)
    if kind == "dirichlet":
        Du = grid.gradient(u)
        return np.sum(Du * Du, axis=(0, 1)) + vv
    W, _ = lf.elastic_energy_density(grid, p.constants, u)
    return p.lam * W + 0.5 * vv


def el_report(grid: Grid2, p: ELParams, st: ELState, detector=None) -> dg.EnergyReport:
    rep = dg.energy_report(grid, p.constants, st.u, st.t, v=st.v, eps=p.eps, coupling=p.lam)
    drive, e = _driving(grid, p, st.u, grid.gradient(st.u))
    adv = advection(grid, st.v, st.u)
    rep.dissipation_rate = dissipation_rate(grid, p, drive, st.v)
    # advective exchange: director ledger gains lam <drive, adv>, momentum ledger -lam <v, Leray F>
    rep.cross_term_director = p.lam * grid.inner(drive, adv)
    if not p.freeze_velocity:
        F = elastic_force(grid, st.u, drive, e)
        rep.cross_term_momentum = -p.lam * grid.inner(st.v, grid.leray_project(F))
    st.P = pressure_diagnostic(grid, p, st.u, st.v)
    rep.pressure_gauge = float(np.mean(st.P))
    rep.dissipation_integral = st.dissipation_integral
    rep.projection_correction = st.projection_correction
    rep.step = st.step_count
    if detector is not None:
        rep.max_ball_energy = dg.max_local_energy(grid, coupled_density(grid, p, st.u, st.v, detector.density), detector)[0]
    return rep


def el_run(grid: Grid2, p: ELParams, u0: np.ndarray, v0: np.ndarray, detector=None, snapshot_hook=None):
    """Integrate the coupled system; returns ``(state, reports, events)`` like :func:`lc_flow.run`."""
    u0 = np.array(u0, dtype=float)
    v0 = np.array(v0, dtype=float)
    if p.mode == "constrained":
        dev = np.abs(np.sqrt(np.sum(u0 * u0, axis=0)) - 1.0).max()
        if dev > 1e-8:
            raise ConfigError(f"constrained mode needs unit initial data (max ||u|-1| = {dev:.2e})")
    vp = grid.leray_project(v0)
    corr = grid.l2norm(vp - v0)
    if corr > 1e-10 * max(grid.l2norm(v0), 1e-300):
        log.warning("initial velocity was not divergence-free; removed %.3e in L2", corr)
    p.check_cfl(grid, vp)
    if detector is not None:
        detector.validate(grid)
    norms = np.sqrt(np.sum(u0 * u0, axis=0))
    st = ELState(
        u=u0,
        v=vp,
        leray_correction=corr,
        min_norm=float(norms.min()),
        max_norm=float(norms.max()),
        max_div=float(np.abs(grid.spectral_divergence(vp)).max()),
    )
    nsteps = int(round(p.t_end / p.dt))

    E0 = None
    reports, events = [], []

    def sample(state):
        nonlocal E0
        rep = el_report(grid, p, state, detector)
        if E0 is None:
            E0 = rep.E_total
        rep.identity_residual = rep.dissipation_integral + rep.E_total - E0
        if reports:
            rep.dissipation_increment = rep.dissipation_integral - reports[-1].dissipation_integral
        reports.append(rep)
        state.energy_ledger.append(rep)
        if detector is not None:
            dens = coupled_density(grid, p, state.u, state.v, detector.density)
            events.extend(dg.detect_concentration(grid, dens, state.t, detector, kind="coupled"))
        if snapshot_hook is not None:
            snapshot_hook(state)

    sample(st)
    warned = False
    for k in range(nsteps):
        try:
            st = el_step(grid, p, st)
        except (BlowUpError, NonFiniteError) as err:
            err.partial = (st, reports, events)
            raise
        if not warned:
            vmax = float(np.sqrt(np.sum(st.v * st.v, axis=0)).max())
            if p.dt > p.max_stable_dt(grid, vmax):
                log.warning("advective CFL exceeded at t = %.4g (max |v| = %.3g)", st.t, vmax)
                warned = True
        if (k + 1) % p.diag_stride == 0 or k + 1 == nsteps:
            sample(st)
    return st, reports, events
