"""Command line entry point: ``nematic {verify,flow,el,gl-study}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import ericksen_leslie as el
from . import lc_flow as lf
from . import verification
from .config import RunConfig, load_config
from .errors import BlowUpError, ConfigError, NonFiniteError
from .initial_data import make_initial_director, make_initial_velocity
from .output import RunWriter

log = logging.getLogger("nematic")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nematic", description="Nematic liquid crystal flows on a periodic square.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("verify", "run the property checks and report measured values"),
        ("flow", "integrate the director flow (constrained or Ginzburg-Landau)"),
        ("el", "integrate the coupled director and Navier-Stokes system"),
        ("gl-study", "Ginzburg-Landau epsilon ladder against the constrained flow"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="YAML configuration (defaults are used when omitted)")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        sp.add_argument("--seed", type=int, help="64-bit seed (overrides seed)")
        sp.add_argument("--quiet", action="store_true", help="only print warnings and errors")
    return ap


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config)
    over = {}
    if args.out is not None:
        over["output"] = {"directory": args.out}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        over["seed"] = args.seed
    return cfg.with_overrides(**over) if over else cfg


def _writer(cfg: RunConfig) -> RunWriter:
    w = RunWriter(cfg.data["output"]["directory"], cfg.grid, cfg.data["output"]["snapshot_stride"])
    w.write_config(cfg.dump())
    return w


def _finish(w: RunWriter, state, reports, events) -> None:
    w.snapshot(state, force=True)
    w.write_ledger(reports)
    w.write_events(events)


def _integrate(cfg: RunConfig, coupled: bool) -> int:
    g = cfg.grid
    w = _writer(cfg)
    u0 = make_initial_director(cfg.director_spec(), g, cfg.seed)
    try:
        if coupled:
            v0 = make_initial_velocity(cfg.velocity_spec(), g, cfg.seed)
            state, reports, events = el.el_run(g, cfg.el_params(), u0, v0, cfg.detector(), w.snapshot)
        else:
            state, reports, events = lf.run(g, cfg.flow_config(), u0, cfg.detector(), w.snapshot)
    except (BlowUpError, NonFiniteError) as err:
        partial = getattr(err, "partial", None)
        if partial is not None:
            _finish(w, *partial)
        log.error("numerical abort: %s", err)
        return EXIT_NUMERIC
    _finish(w, state, reports, events)
    last = reports[-1]
    log.info(
        "t = %.6g after %d steps: E = %.8g, residual = %.3e, events = %d",
        last.t,
        last.step,
        last.E_total,
        last.identity_residual,
        len(events),
    )
    log.info("outputs in %s", w.root)
    return EXIT_OK


def _verify(cfg: RunConfig) -> int:
    names = cfg.data["verify"]["checks"]
    unknown = set(names or ()) - set(verification.VERIFY_SUITE)
    if unknown:
        raise ConfigError(f"unknown checks: {sorted(unknown)}")
    w = _writer(cfg)
    results = verification.run_suite(names, progress=lambda r: print(r.line(), flush=True))
    w.write_json("verify.json", [{"name": r.name, "passed": r.passed, "values": r.values, "note": r.note} for r in results])
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _gl_study(cfg: RunConfig) -> int:
    g = cfg.grid
    w = _writer(cfg)
    study = cfg.data["gl_study"]
    u0 = make_initial_director(cfg.director_spec(), g, cfg.seed)
    rows = verification.gl_ladder(g, cfg.constants, u0, study["epsilons"], study["t_star"], cfg.params["cfl_safety"])
    w.write_table("gl_study.csv", rows)
    print(f"{'epsilon':>10} {'||1-|u|^2||':>14} {'min|u|':>10} {'max|u|':>10} {'dist':>12}")
    for r in rows:
        print(f"{r['epsilon']:10.4g} {r['defect_l2']:14.6e} {r['min_norm']:10.6f} {r['max_norm']:10.6f} {r['dist_to_constrained']:12.6e}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _effective_config(args)
        if args.command == "verify":
            return _verify(cfg)
        if args.command == "gl-study":
            return _gl_study(cfg)
        return _integrate(cfg, coupled=args.command == "el")
    except ConfigError as err:
        log.error("configuration error: %s", err)
        return EXIT_CONFIG
    except OSError as err:
        log.error("I/O error: %s", err)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
