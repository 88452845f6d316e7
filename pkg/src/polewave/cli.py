"""Command-line entry point.

Exit codes: 0 success, 2 configuration or I/O error, 3 solver failure
(non-convergence, near-pole solve, non-factorizable residue), 4 a check or
acceptance regression failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ConfigError, RunConfig, StateSpec, load_config, preset_config
from .runner import (
    PipelineError,
    SOLVER_ERRORS,
    check_optical,
    run_config,
    scan_v1,
    summarize,
    write_optical,
    write_run,
)
from .report import emit_report_csv
from .scattering import System
from .spectrum import scan_bound_states

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4
OPTICAL_TOL = 1e-8


def _common(p: argparse.ArgumentParser, config_required: bool = False):
    p.add_argument("--config", type=Path, required=config_required, help="INI run configuration")
    p.add_argument("--theta", type=float, help="complex-scaling angle in degrees")
    p.add_argument("--mesh-n", type=int, help="number of momentum mesh points")
    p.add_argument("--mesh-scale", type=float, help="mesh scale in MeV")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--mesh-check", action="store_true", help="rerun at 2n and report deltas")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polewave", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="run a shipped scenario")
    p.add_argument("name", choices=sorted(PRESETS))
    _common(p)

    p = sub.add_parser("bound", help="bound states of a configuration (theta = 0)")
    _common(p, config_required=True)
    p.add_argument("--L", type=int, nargs="+", default=[0], help="partial waves to scan when no states are listed")
    p.add_argument("--depth", type=float, default=100.0, help="scan depth below threshold in MeV")

    p = sub.add_parser("resonance", help="complex-scaled poles of a configuration")
    _common(p, config_required=True)

    p = sub.add_parser("scan", help="parameter sweep with E0 pinned to the pole")
    _common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--param", default="v1")
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("check-optical", help="unitarity of the real-axis on-shell amplitude")
    _common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--energies", type=float, nargs="+")
    p.add_argument("--L", type=int, default=0)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--verbose-checks", action="store_true", help="print every individual check")
    return ap


def _load(args) -> RunConfig:
    preset = getattr(args, "preset", None) or getattr(args, "name", None)
    if args.config is not None:
        cfg = load_config(args.config)
    elif preset:
        cfg = preset_config(preset)
    else:
        raise ConfigError("give --config or a preset")
    return cfg.with_overrides(args.theta, args.mesh_n, args.mesh_scale)


def _out(args, cfg: RunConfig) -> Path:
    return args.out if args.out is not None else Path("out") / cfg.name


def _run_and_write(cfg: RunConfig, args) -> int:
    result = run_config(cfg, mesh_check=args.mesh_check)
    print(summarize(result))
    for path in write_run(result, _out(args, cfg)):
        print(f"wrote {path}")
    if result.mesh_check and not all(m.ok for m in result.mesh_check):
        return EXIT_CHECK
    return EXIT_OK


def cmd_preset(args) -> int:
    return _run_and_write(_load(args), args)


def cmd_bound(args) -> int:
    cfg = _load(args).with_overrides(theta_deg=0.0)
    if not cfg.states:
        thr = min(ch.threshold for ch in cfg.channels)
        mesh = cfg.build_mesh()
        states = []
        for L in args.L:
            system = System(cfg.build_model(v1=0.0, E0=0.0), cfg.build_channels(), L, mesh)
            for k, E in enumerate(scan_bound_states(system, thr - args.depth)):
                states.append(StateSpec(f"L{L}n{k}", L, E))
        if not states:
            print("no bound states found")
            return EXIT_OK
        cfg = replace(cfg, states=states)
    return _run_and_write(cfg, args)


def cmd_resonance(args) -> int:
    cfg = _load(args)
    if cfg.theta_deg == 0:
        raise ConfigError("resonance search needs a nonzero scaling angle (--theta)")
    return _run_and_write(cfg, args)


def cmd_scan(args) -> int:
    cfg = _load(args)
    if args.param != "v1":
        raise ConfigError(f"only --param v1 is supported, got {args.param!r}")
    values = args.values or cfg.scan_values
    if not values:
        raise ConfigError("no scan values given (--values or [cli] scan_values)")
    rows, failures = scan_v1(cfg, values, workers=args.workers)
    for r in rows:
        print(f"{r.label:>6} v1={r.v1:+.3f}  sum X = {sum(r.X):.6f}  X_dV/dE = {r.X_dVdE:.6f}")
    for label, v, msg in failures:
        print(f"failed: {label} v1={v}: {msg}", file=sys.stderr)
    path = emit_report_csv(rows, _out(args, cfg) / "scan.csv")
    print(f"wrote {path}")
    return EXIT_SOLVER if failures else EXIT_OK


def cmd_check_optical(args) -> int:
    cfg = _load(args)
    energies = args.energies or cfg.optical_energies
    rows = check_optical(cfg, energies, L=args.L)
    for r in rows:
        phases = ", ".join(f"{p:.4f}" for p in r.phases_deg)
        print(f"E = {r.E:.6g} MeV  residual = {r.residual:.2e}  eigenphases = [{phases}] deg")
    print(f"wrote {write_optical(rows, _out(args, cfg) / 'optical.csv')}")
    return EXIT_OK if all(r.residual <= OPTICAL_TOL for r in rows) else EXIT_CHECK


def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, format_result

    ok = True
    for crit in CRITERIA:
        res = crit()
        ok &= res.passed
        print(format_result(res, verbose=args.verbose_checks), flush=True)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "preset": cmd_preset,
    "bound": cmd_bound,
    "resonance": cmd_resonance,
    "scan": cmd_scan,
    "check-optical": cmd_check_optical,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PipelineError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
