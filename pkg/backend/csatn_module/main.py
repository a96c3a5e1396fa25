"""
Main entry point for the CSATN uplink analysis toolkit
Subcommands: analytic, simulate, compare, sweep <preset>, find-threshold, validate
"""

import argparse
import json
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from . import config
from . import sweeps
from . import utils
from .core_model import has_errors, validate
from .errors import ConfigError, CsatnError
from .schemas import ScenarioConfig, SweepSpec

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_CONFIG = 2

RUN_COMMANDS = ("analytic", "simulate", "compare")

# ============================ ARGUMENT HELPERS ============================

def load_config(path: Optional[str]) -> ScenarioConfig:
    return ScenarioConfig.from_file(path) if path else ScenarioConfig()


def _parse_values(text: Optional[str], param: str) -> List:
    """'30,50,80' or '10/-10,0/0' (gain pairs in dB) into sweep values; unit suffixes allowed"""
    if not text:
        return [None]
    out = []
    for item in (p.strip() for p in text.split(",")):
        if not item:
            continue
        if param == "gains":
            out.append(tuple(float(v) for v in item.split("/")))
        else:
            out.append(float(utils.parse_quantity(item)))
    return out


def build_spec(args: argparse.Namespace, cfg: ScenarioConfig) -> SweepSpec:
    param = args.param or "none"
    grid = utils.parse_grid(args.grid) if args.grid else (
        config.DEFAULT_TH1_GRID_DB if args.link == ["TA"] else config.DEFAULT_TH2_GRID_DB)
    return SweepSpec(
        swept_param=param, values=_parse_values(args.values, param), base=cfg, thresholds_db=grid,
        links=args.link, metric=args.metric, runs=args.runs, seed=args.seed, workers=args.workers,
        zero_term=getattr(args, "zero_term", "both"), output=args.out or "",
    )


def _out_path(spec: SweepSpec, ts: str, stem: str) -> str:
    return spec.output or os.path.join(config.SAVE_DIR, f"{ts}_{stem}.csv")

# ============================ COMMANDS ============================

def cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    violations = validate(cfg)
    for v in violations:
        print(f"[{'error' if v.severity == 'error' else 'warn'}] {v.field}: {v.rule}")
    if not violations:
        print(f"[validate] ok, config_hash={cfg.config_hash()} n_0={cfg.n_0} r_c={cfg.r_c:g} m")
    return EXIT_INVALID_CONFIG if has_errors(violations) else EXIT_OK


def _emit(frame, path: str, title: str) -> None:
    sweeps.write_frame(frame, path)
    plot = sweeps.write_plot_script(path, frame, title)
    print(f"[save] {path}")
    print(f"[save] {plot}")


def run_spec(spec: SweepSpec, mode: str, ts: str, stem: str) -> int:
    out = _out_path(spec, ts, stem)
    if mode == "analytic":
        _emit(sweeps.run_analytic(spec), out, stem)
    elif mode == "simulate":
        _emit(sweeps.run_simulate(spec), out, stem)
    else:
        report, combined = sweeps.run_compare(spec)
        _emit(combined, out, stem)
        gap_path = os.path.splitext(out)[0] + "_gaps.csv"
        sweeps.write_frame(report.to_frame(), gap_path)
        print(f"[save] {gap_path}")
        print(json.dumps(report.summary(), indent=2))
    return EXIT_OK


def cmd_run(args: argparse.Namespace, cfg: ScenarioConfig, ts: str) -> int:
    spec = build_spec(args, cfg)
    return run_spec(spec, args.command, ts, args.command)


def cmd_sweep(args: argparse.Namespace, cfg: ScenarioConfig, ts: str) -> int:
    grid = utils.parse_grid(args.grid) if args.grid else None
    spec = sweeps.preset_spec(args.preset, cfg, thresholds_db=grid, runs=args.runs, seed=args.seed,
                              workers=args.workers, zero_term=args.zero_term, output=args.out)
    print(f"[sweep] {args.preset}: {spec.swept_param}={spec.values} x {spec.x_param} links={spec.links} "
          f"metric={spec.metric} mode={args.mode}")
    return run_spec(spec, args.mode, ts, args.preset)


def cmd_find_threshold(args: argparse.Namespace, cfg: ScenarioConfig) -> int:
    t_db = sweeps.find_threshold(args.link[0], args.target, cfg, include_zero_term=args.zero_term != "off")
    print(f"[threshold] {args.link[0]} coverage {args.target} at {t_db:.2f} dB")
    return EXIT_OK

# ============================ CLI INTERFACE ============================

def _common(p: argparse.ArgumentParser, default_link: str = "AS", zero_term: bool = True) -> None:
    p.add_argument("--config", help="scenario JSON (values may carry units, e.g. \"9.5 km\", \"20 dBW\")")
    p.add_argument("--runs", type=int, default=config.DEFAULT_RUNS, help="Monte Carlo runs per point")
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="master seed")
    p.add_argument("--grid", help="threshold grid in dB, start:stop:step or a comma list")
    if zero_term:
        p.add_argument("--zero-term", choices=["on", "off", "both"], default="on",
                       help="T-A: include the interferer-free term (off reproduces the sum from one "
                            "interferer); compare always reports both")
    p.add_argument("--out", help="output CSV path (default: SAVE_DIR/<ts>_<command>.csv)")
    p.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS, help="worker processes")
    p.add_argument("--quiet", action="store_true", help="suppress tagged progress lines")
    p.add_argument("--link", nargs="+", choices=["TA", "AS", "JOINT"], default=[default_link])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csatn",
        description="Coverage and rate of the terminal -> UAV -> satellite uplink: analysis vs simulation",
    )
    sub = parser.add_subparsers(dest="command")

    for name, help_text in (("analytic", "analytic coverage/rate"),
                            ("simulate", "Monte Carlo coverage/rate"),
                            ("compare", "analytic vs Monte Carlo gap report (both T-A zero-term modes)")):
        p = sub.add_parser(name, help=help_text)
        _common(p, zero_term=name != "compare")
        p.add_argument("--metric", choices=["coverage", "rate"], default="coverage")
        p.add_argument("--param", help="scenario parameter to sweep (e.g. h_a, lambda_1, r_c, gains)")
        p.add_argument("--values", help="comma list of values for --param")

    p = sub.add_parser("sweep", help="run a built-in figure preset")
    _common(p)
    p.add_argument("preset", nargs="?", help="preset name (fig3 ... fig15)")
    p.add_argument("--mode", choices=["analytic", "simulate", "compare"], default="compare")
    p.add_argument("--list-presets", action="store_true")

    p = sub.add_parser("find-threshold", help="threshold (dB) reaching a target analytic coverage")
    _common(p)
    p.add_argument("--target", type=float, required=True, help="target coverage in (0, 1)")

    p = sub.add_parser("validate", help="check a scenario configuration")
    p.add_argument("--config")
    p.add_argument("--quiet", action="store_true")
    return parser


def _list_presets() -> int:
    for name in sweeps.list_presets():
        p = config.SWEEP_PRESETS[name]
        tag = " (placeholder legend values)" if p.get("placeholder") else ""
        print(f"{name}: {p['metric']} of {'/'.join(p['links'])}, {p['swept']} over {p['x']}{tag}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_FAILURE
    if args.command in RUN_COMMANDS and args.param and not args.values:
        parser.error(f"--param {args.param} needs --values (comma list, e.g. --values \"10,20 dBW\")")
    if args.quiet:
        config.VERBOSE = False

    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "sweep" and (args.list_presets or not args.preset):
            return _list_presets()

        cfg = load_config(args.config)
        ts = utils.now_ts()
        stem = args.preset if args.command == "sweep" else args.command
        with utils.tee_logging(config.SAVE_DIR, ts, stem, cfg.config_hash()):
            print(f"[start] {' '.join(argv if argv is not None else sys.argv[1:])}")
            print(f"[cfg] Save directory: {config.SAVE_DIR}")
            if args.command == "sweep":
                return cmd_sweep(args, cfg, ts)
            if args.command == "find-threshold":
                return cmd_find_threshold(args, cfg)
            return cmd_run(args, cfg, ts)
    except ConfigError as e:
        for v in e.violations:
            print(f"[error] {v.field}: {v.rule}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except CsatnError as e:
        print(f"[error] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValidationError, ValueError) as e:
        print(f"[error] invalid arguments: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
