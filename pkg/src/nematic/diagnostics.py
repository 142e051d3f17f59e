"""Energy accounting, identity residuals, ball energies and the concentration detector."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from . import oseen_frank as of
from .errors import ConfigError, MissingColumnError
from .grid import Grid2

Which = Literal["director", "coupled", "ginzburg_landau"]


# ----------------------------------------------------------------------
# energy report
# ----------------------------------------------------------------------
@dataclass
class EnergyReport:
    t: float
    E_total: float
    W_integral: float
    V_integral: float
    kinetic: float = 0.0
    gl_penalty: float = 0.0
    coupling: float = 1.0  # lambda; E_total = coupling*(W + penalty) + kinetic
    dissipation_rate: float = 0.0
    dissipation_increment: float = 0.0
    dissipation_integral: float = 0.0
    identity_residual: float = 0.0
    grad2_norm: float = 0.0
    gradv_norm: float = 0.0
    l4_grad_u: float = 0.0
    l4_v: float = 0.0
    null_lagrangian: float = 0.0
    min_norm: float = 1.0
    max_norm: float = 1.0
    max_ball_energy: float = 0.0
    projection_correction: float = 0.0
    cross_term_momentum: float = 0.0
    cross_term_director: float = 0.0
    div_v_norm: float = 0.0
    pressure_gauge: float = 0.0
    step: int = 0

    @property
    def l4_norms(self) -> tuple[float, float]:
        return (self.l4_grad_u, self.l4_v)

    @property
    def enstrophy(self) -> float:
        return self.gradv_norm

    def check(self, rtol: float = 1e-12) -> None:
        vals = asdict(self)
        bad = [k for k, v in vals.items() if not math.isfinite(v)]
        if bad:
            raise FloatingPointError(f"non-finite report entries: {bad}")
        parts = self.coupling * (self.W_integral + self.gl_penalty) + self.kinetic
        if abs(parts - self.E_total) > rtol * max(1.0, abs(self.E_total)):
            raise AssertionError("E_total does not equal the sum of its parts")

    def to_row(self) -> dict:
        return asdict(self)


REPORT_COLUMNS = tuple(f.name for f in fields(EnergyReport))


def _sumsq(f: np.ndarray, ncomp_axes: int) -> np.ndarray:
    return np.sum(f * f, axis=tuple(range(ncomp_axes)))


def energy_report(
    grid: Grid2,
    c: of.FrankConstants,
    u: np.ndarray,
    t: float,
    v: np.ndarray | None = None,
    eps: float | None = None,
    coupling: float = 1.0,
) -> EnergyReport:
    """Energies and Sobolev monitors of a state; ledger fields are left at zero."""
    p = grid.gradient(u)
    W, V = of.eval_density(c, u, p)
    Wi = float(grid.integrate(W))
    pen = 0.0
    if eps is not None:
        uu = np.sum(u * u, axis=0)
        pen = float(grid.integrate((1.0 - uu) ** 2)) / (4.0 * eps**2)
    norms = np.sqrt(np.sum(u * u, axis=0))
    rep = EnergyReport(
        t=float(t),
        E_total=coupling * (Wi + pen),
        W_integral=Wi,
        V_integral=float(grid.integrate(V)),
        gl_penalty=pen,
        coupling=float(coupling),
        grad2_norm=float(grid.integrate(_sumsq(grid.hessian(u), 3))),
        l4_grad_u=float(grid.integrate(_sumsq(p, 2) ** 2)),
        null_lagrangian=float(grid.integrate(of.null_lagrangian(p))),
        min_norm=float(norms.min()),
        max_norm=float(norms.max()),
    )
    if v is not None:
        vv = _sumsq(v, 1)
        rep.kinetic = 0.5 * float(grid.integrate(vv))
        rep.E_total += rep.kinetic
        rep.gradv_norm = grid.spectral_dirichlet(v)
        rep.l4_v = float(grid.integrate(vv * vv))
        rep.div_v_norm = grid.l2norm(grid.spectral_divergence(v))
    return rep


def flow_density(grid: Grid2, cfg, u: np.ndarray, kind: str = "W") -> np.ndarray:
    """Pointwise energy density fed to the detector for a director-only run."""
    p = grid.gradient(u)
    if kind == "dirichlet":
        return _sumsq(p, 2)
    W, _ = of.eval_density(cfg.constants, u, p)
    return W


def flow_report(grid: Grid2, cfg, state, detector: "DetectorConfig | None" = None) -> EnergyReport:
    rep = energy_report(grid, cfg.constants, state.u, state.t, eps=cfg.eps)
    rhs = cfg.rhs(grid, state.u)
    rep.dissipation_rate = float(grid.integrate(np.sum(rhs * rhs, axis=0)))
    rep.dissipation_integral = state.dissipation_integral
    rep.projection_correction = state.projection_correction
    rep.step = state.step_count
    if detector is not None:
        rep.max_ball_energy = max_local_energy(grid, flow_density(grid, cfg, state.u, detector.density), detector)[0]
    return rep


# ----------------------------------------------------------------------
# balls on the torus
# ----------------------------------------------------------------------
@lru_cache(maxsize=64)
def _disc_offsets(n: int, h: float, R: float) -> tuple[tuple[int, int], ...]:
    m = int(math.floor(R / h)) + 1
    r2 = (R / h) ** 2 * (1 + 1e-12)
    return tuple(
        (di, dj) for di in range(-m, m + 1) for dj in range(-m, m + 1) if di * di + dj * dj <= r2
    )


def _check_radius(grid: Grid2, R: float) -> None:
    if not 0 < R <= grid.length / 4 * (1 + 1e-12):
        raise ValueError(f"ball radius {R} must lie in (0, L/4 = {grid.length / 4}]")


def ball_energy(grid: Grid2, density: np.ndarray, x0: Sequence[int], R: float) -> float:
    """``h^2`` times the sum of ``density`` over nodes within periodic distance ``R`` of node ``x0``."""
    _check_radius(grid, R)
    i0, j0 = int(x0[0]), int(x0[1])
    off = np.array(_disc_offsets(grid.n, grid.h, float(R)))
    vals = density[(i0 + off[:, 0]) % grid.n, (j0 + off[:, 1]) % grid.n]
    return float(grid.h * grid.h * np.sum(vals))


def ball_energy_map(grid: Grid2, density: np.ndarray, R: float) -> np.ndarray:
    """Ball energy centred at every node (exactly translation-equivariant)."""
    _check_radius(grid, R)
    acc = np.zeros_like(density, dtype=float)
    for di, dj in _disc_offsets(grid.n, grid.h, float(R)):
        acc += np.roll(density, (-di, -dj), axis=(0, 1))
    return grid.h * grid.h * acc


@dataclass(frozen=True)
class DetectorConfig:
    eps0: float
    R0: float
    radii: tuple[float, ...]
    stride: int | None = None  # None: max(1, floor(R / 4h)) per radius
    density: Literal["W", "dirichlet"] = "W"

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(sorted(float(r) for r in self.radii)))
        if not self.eps0 > 0:
            raise ConfigError("eps0 must be positive")
        if not self.radii:
            raise ConfigError("detector needs at least one radius")
        if self.radii[0] <= 0 or self.radii[-1] > self.R0:
            raise ConfigError("detector radii must lie in (0, R0]")
        if self.stride is not None and int(self.stride) < 1:
            raise ConfigError("detector stride must be >= 1")
        if self.density not in ("W", "dirichlet"):
            raise ConfigError(f"unknown detector density {self.density!r}")

    def validate(self, grid: Grid2) -> None:
        if self.R0 > grid.length / 4 * (1 + 1e-12):
            raise ConfigError(f"R0 = {self.R0} exceeds L/4 = {grid.length / 4}")

    def stride_for(self, grid: Grid2, R: float) -> int:
        if self.stride is not None:
            return int(self.stride)
        return max(1, int(R / (4.0 * grid.h)))


@dataclass(frozen=True)
class SingularEvent:
    t: float
    center: tuple[int, int]
    R: float
    energy: float
    kind: Literal["director_only", "coupled"] = "director_only"
    x: float = 0.0
    y: float = 0.0

    def to_record(self) -> dict:
        return {
            "t": self.t,
            "cx": self.x,
            "cy": self.y,
            "i": self.center[0],
            "j": self.center[1],
            "R": self.R,
            "energy": self.energy,
            "kind": self.kind,
        }


def _strided(values: np.ndarray, s: int) -> np.ndarray:
    mask = np.zeros(values.shape, dtype=bool)
    mask[::s, ::s] = True
    return mask


def max_local_energy(grid: Grid2, density: np.ndarray, cfg: DetectorConfig):
    """``(value, center, R)`` maximizing the ball energy over strided centres and the radius ladder.

    Ties go to the lexicographically smallest centre, then the smallest radius.
    """
    cfg.validate(grid)
    best = None
    for R in cfg.radii:
        emap = ball_energy_map(grid, density, R)
        s = cfg.stride_for(grid, R)
        sub = emap[::s, ::s]
        flat = int(np.argmax(sub))  # first maximum in row-major = lexicographic order
        i, j = np.unravel_index(flat, sub.shape)
        cand = (float(sub[i, j]), (int(i) * s, int(j) * s), R)
        if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
    return best


def _periodic_dist(grid: Grid2, a, b) -> float:
    n = grid.n
    di = abs(a[0] - b[0]) % n
    dj = abs(a[1] - b[1]) % n
    di, dj = min(di, n - di), min(dj, n - dj)
    return grid.h * math.hypot(di, dj)


def detect_concentration(
    grid: Grid2,
    density: np.ndarray,
    t: float,
    cfg: DetectorConfig,
    kind: Literal["director_only", "coupled"] = "director_only",
) -> list[SingularEvent]:
    """Flag centres whose ball energy reaches ``eps0`` on some radius of the ladder.

    Each flagged centre keeps its smallest flagged radius.  Flagged centres
    closer than the larger of their radii are merged (single linkage); the
    representative of a cluster has the smallest radius, then the largest
    energy, then the lexicographically smallest centre.
    """
    cfg.validate(grid)
    flagged: dict[tuple[int, int], tuple[float, float]] = {}
    for R in cfg.radii:
        emap = ball_energy_map(grid, density, R)
        hit = (emap >= cfg.eps0) & _strided(emap, cfg.stride_for(grid, R))
        for i, j in zip(*np.nonzero(hit)):
            key = (int(i), int(j))
            if key not in flagged:
                flagged[key] = (R, float(emap[i, j]))
    if not flagged:
        return []

    keys = sorted(flagged)
    parent = list(range(len(keys)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            thr = max(flagged[keys[a]][0], flagged[keys[b]][0])
            if _periodic_dist(grid, keys[a], keys[b]) <= thr * (1 + 1e-12):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    clusters: dict[int, list[tuple[int, int]]] = {}
    for a, key in enumerate(keys):
        clusters.setdefault(find(a), []).append(key)

    events = []
    for members in clusters.values():
        rep = min(members, key=lambda k: (flagged[k][0], -flagged[k][1], k))
        R, e = flagged[rep]
        events.append(
            SingularEvent(float(t), rep, R, e, kind, x=rep[0] * grid.h, y=rep[1] * grid.h)
        )
    events.sort(key=lambda ev: ev.center)
    return events


# ----------------------------------------------------------------------
# interpolation and local energy monitors
# ----------------------------------------------------------------------
def ladyzhenskaya_ratio(grid: Grid2, f: np.ndarray, R: float, stride: int = 1) -> tuple[float, bool]:
    """Per-slice ratio ``int|f|^4 / (sup_x int_{B_R(x)}|f|^2 * (int|grad f|^2 + R^-2 int|f|^2))``.

    ``f`` carries its components on the leading axes.  Returns
    ``(ratio, degenerate)``; a zero field gives ``(0.0, True)``.
    """
    ff = np.sum(f * f, axis=tuple(range(f.ndim - 2))) if f.ndim > 2 else f * f
    l2 = float(grid.integrate(ff))
    if l2 == 0.0:
        return 0.0, True
    sup_ball = float(ball_energy_map(grid, ff, R)[::stride, ::stride].max())
    g = grid.gradient(f)
    grad2 = float(np.sum(g * g) * grid.h**2)
    denom = sup_ball * (grad2 + l2 / R**2)
    if denom <= 0.0:
        return 0.0, True
    return float(grid.integrate(ff * ff)) / denom, False


@dataclass
class LocalEnergyFit:
    C_hat: float
    max_violation: float  # max of lhs / (rhs0 + C_hat*scale) over the held-out samples
    n_fit: int
    n_eval: int
    samples: list = field(default_factory=list, repr=False)


def local_energy_monitor(
    grid: Grid2,
    densities: Sequence[tuple[float, np.ndarray]],
    reference: float,
    radii: Iterable[float],
    centers: Iterable[Sequence[int]],
    scaling: Literal["parabolic", "coupled"] = "parabolic",
) -> LocalEnergyFit:
    """Fit the constant of a local energy inequality and test it on later samples.

    ``densities`` is a time series ``(t, e)`` whose first entry is ``t = 0``.
    For each ``(x0, R, t > 0)`` the inequality checked is
    ``int_{B_R} e(t) <= int_{B_2R} e(0) + C * reference * s(t, R)`` with
    ``s = t/R^2`` (parabolic) or ``s = sqrt(t)/R * sqrt(1 + t/R^2)`` (coupled).
    ``C`` is fitted on the first half of the times and evaluated on the rest.
    """
    t0, e0 = densities[0]
    if t0 != 0.0:
        raise ValueError("first density sample must be at t = 0")
    radii = [float(R) for R in radii]
    for R in radii:
        _check_radius(grid, 2 * R)
    centers = [tuple(int(x) for x in c) for c in centers]
    later = [(t, e) for t, e in densities[1:] if t > 0]
    if len(later) < 2:
        raise ValueError("need at least two positive-time samples")
    split = len(later) // 2
    samples = []
    for k, (t, e) in enumerate(later):
        for R in radii:
            s = t / R**2 if scaling == "parabolic" else math.sqrt(t) / R * math.sqrt(1 + t / R**2)
            for x0 in centers:
                lhs = ball_energy(grid, e, x0, R)
                rhs0 = ball_energy(grid, e0, x0, 2 * R)
                samples.append((k < split, lhs, rhs0, reference * s))
    fit = [smp for smp in samples if smp[0]]
    C = max([max(0.0, (lhs - rhs0) / sc) for _, lhs, rhs0, sc in fit if sc > 0] + [0.0])
    ev = [smp for smp in samples if not smp[0]]
    floor = 1e-12 * abs(reference)  # balls where both sides sit at rounding level
    viol = max(lhs / (rhs0 + C * sc + floor) if rhs0 + C * sc + floor > 0 else (math.inf if lhs > 0 else 0.0) for _, lhs, rhs0, sc in ev)
    return LocalEnergyFit(C, viol, len(fit), len(ev), samples)


# ----------------------------------------------------------------------
# identity residuals from ledgers
# ----------------------------------------------------------------------
_REQUIRED = {
    "director": ("t", "E_total", "dissipation_rate"),
    "coupled": ("t", "E_total", "dissipation_rate", "kinetic"),
    "ginzburg_landau": ("t", "E_total", "dissipation_rate", "gl_penalty"),
}


def _column(rows, name: str, which: str) -> np.ndarray:
    out = []
    for r in rows:
        if isinstance(r, Mapping):
            if name not in r:
                raise MissingColumnError(name, which)
            out.append(float(r[name]))
        else:
            if not hasattr(r, name):
                raise MissingColumnError(name, which)
            out.append(float(getattr(r, name)))
    return np.array(out)


def identity_residual(rows: Sequence, which: Which = "director") -> np.ndarray:
    """Residual series ``int_0^t D + E(t) - E(0)`` with trapezoid-in-time ``D``.

    ``D`` is the ledger's ``dissipation_rate`` column.  Values ``<= tol``
    mean the energy inequality holds.
    """
    if which not in _REQUIRED:
        raise ValueError(f"unknown identity {which!r}")
    if len(rows) == 0:
        return np.zeros(0)
    cols = {name: _column(rows, name, which) for name in _REQUIRED[which]}
    t, E, D = cols["t"], cols["E_total"], cols["dissipation_rate"]
    acc = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (D[1:] + D[:-1]))])
    return acc + E - E[0]
