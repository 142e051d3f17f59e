"""Run configuration: YAML files validated against ``schema.json``.

Missing keys take the values in :data:`DEFAULTS`; the effective (fully
materialized) configuration is what gets echoed into the run directory, so
reloading the echo reproduces the run.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from . import lc_flow as lf
from . import oseen_frank as of
from .diagnostics import DetectorConfig
from .ericksen_leslie import ELParams
from .errors import ConfigError
from .grid import Grid2
from .initial_data import InitialDataSpec, _unit

DEFAULTS: dict = {
    "grid": {"n": 128, "L": 20.0},
    "constants": {"k1": 1.0, "k2": 1.0, "k3": 1.0, "k4": 1.0},
    "params": {
        "nu": 1.0,
        "lam": 1.0,
        "epsilon": None,
        "dt": None,
        "t_end": 0.05,
        "cfl_safety": 0.5,
        "diag_stride": 10,
        "dealias": False,
        "freeze_velocity": False,
    },
    "mode": "constrained",
    "detector": {
        "enabled": True,
        "eps0": 4.0 * math.pi,
        "R0": 1.5,
        "radii": [0.5, 1.0, 1.5],
        "stride": None,
        "density": "W",
    },
    "initial_data": {
        "director": {"kind": "bubble", "b": [0.0, 0.0, 1.0], "lambda_scale": 4.0, "center": None, "degree": 1},
        "velocity": {"kind": "zero_v"},
    },
    "output": {"directory": "runs/out", "snapshot_stride": 0},
    "seed": 0,
    "gl_study": {"epsilons": [0.2, 0.1, 0.05], "t_star": 0.2},
    "verify": {"checks": None},
}


@lru_cache(maxsize=1)
def schema() -> dict:
    return json.loads(resources.files("nematic").joinpath("schema.json").read_text())


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("director", "velocity"):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass(frozen=True)
class RunConfig:
    data: dict

    # --------------------------------------------------------------
    @property
    def grid(self) -> Grid2:
        return Grid2(int(self.data["grid"]["n"]), float(self.data["grid"]["L"]))

    @property
    def constants(self) -> of.FrankConstants:
        c = self.data["constants"]
        return of.FrankConstants(c["k1"], c["k2"], c["k3"], c["k4"])

    @property
    def params(self) -> dict:
        return self.data["params"]

    @property
    def mode(self) -> str:
        return self.data["mode"]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def epsilon(self) -> float | None:
        return self.params["epsilon"] if self.mode == "ginzburg_landau" else None

    @property
    def dt(self) -> float:
        """The configured step, or the largest stable step that divides ``t_end``."""
        p = self.params
        if p["dt"] is not None:
            return float(p["dt"])
        limit = lf.max_stable_dt(self.grid, self.constants, p["cfl_safety"], self.epsilon)
        g = self.grid
        limit = min(limit, p["cfl_safety"] * g.h**2 / (4.0 * p["nu"]))
        if p["t_end"] == 0:
            return limit
        return p["t_end"] / math.ceil(p["t_end"] / limit * (1 - 1e-12))

    def flow_config(self) -> lf.FlowConfig:
        p = self.params
        return lf.FlowConfig(self.constants, self.dt, p["t_end"], self.mode, self.epsilon, p["cfl_safety"], p["diag_stride"])

    def el_params(self) -> ELParams:
        p = self.params
        return ELParams(
            self.constants,
            self.dt,
            p["t_end"],
            nu=p["nu"],
            lam=p["lam"],
            mode=self.mode,
            epsilon=self.epsilon,
            cfl_safety=p["cfl_safety"],
            diag_stride=p["diag_stride"],
            dealias=p["dealias"],
            freeze_velocity=p["freeze_velocity"],
        )

    def detector(self) -> DetectorConfig | None:
        d = self.data["detector"]
        if not d["enabled"]:
            return None
        return DetectorConfig(eps0=d["eps0"], R0=d["R0"], radii=tuple(d["radii"]), stride=d["stride"], density=d["density"])

    def director_spec(self) -> InitialDataSpec:
        return InitialDataSpec.from_dict(self.data["initial_data"]["director"])

    def velocity_spec(self) -> InitialDataSpec:
        return InitialDataSpec.from_dict(self.data["initial_data"]["velocity"])

    def with_overrides(self, **sections) -> "RunConfig":
        return build_config(deep_merge(self.data, sections))

    def dump(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False)


def _range_checks(cfg: RunConfig) -> None:
    d = cfg.data
    g = cfg.grid
    if cfg.mode == "ginzburg_landau" and d["params"]["epsilon"] is None:
        raise ConfigError("params.epsilon is required in ginzburg_landau mode")
    det = d["detector"]
    if det["R0"] > g.length / 4:
        raise ConfigError(f"detector.R0 = {det['R0']} exceeds L/4 = {g.length / 4}")
    if max(det["radii"]) > det["R0"]:
        raise ConfigError("detector.radii must not exceed detector.R0")
    director = cfg.director_spec()
    try:
        _unit(director.b)
    except ValueError as err:
        raise ConfigError(f"initial_data.director.b: {err}") from None
    if director.kind in ("bubble", "composite"):
        for comp in director.components or (director,):
            if comp.center is not None and not all(0 <= x < g.length for x in comp.center):
                raise ConfigError("bubble center must lie in [0, L)^2")
    # the director and viscous limits are known at load time; the advective one is checked at run start
    flow = cfg.flow_config()
    flow.check_cfl(g)
    p = d["params"]
    if cfg.dt > p["cfl_safety"] * g.h**2 / (4.0 * p["nu"]) * (1 + 1e-12):
        raise ConfigError(f"dt = {cfg.dt:.3e} exceeds the viscous limit")


_DIRECTOR_KEYS = ("kind", "b", "lambda_scale", "center", "amplitude", "band_limit", "degree")
_VELOCITY_KEYS = ("kind", "amplitude", "band_limit")


def _materialize(d: dict, keys) -> dict:
    base = InitialDataSpec()
    out = {}
    for k in keys:
        val = d.get(k, getattr(base, k))
        out[k] = list(val) if isinstance(val, tuple) else val
    if d.get("components"):
        out["components"] = [_materialize(c, ("kind", "lambda_scale", "center", "degree")) for c in d["components"]]
    return out


def build_config(raw: dict | None) -> RunConfig:
    """Validate ``raw`` (may be partial) and return the effective configuration."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}") from None
    merged = deep_merge(DEFAULTS, raw)
    init = merged["initial_data"]
    init["director"] = _materialize(init["director"], _DIRECTOR_KEYS)
    init["velocity"] = _materialize(init["velocity"], _VELOCITY_KEYS)
    cfg = RunConfig(merged)
    try:
        _range_checks(cfg)
    except (ValueError, TypeError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from None
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    """Read a YAML file (``None`` gives the defaults)."""
    if path is None:
        return build_config({})
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: not valid YAML ({err})") from None
    return build_config(raw)
