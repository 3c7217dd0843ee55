"""
ChiralKK command surface.

    python app.py run <config> [--out DIR] [--cadence N] [--steps N]
    python app.py verify <config> [--dump]
    python app.py sweep <config> --grids 64,128,256
    python app.py report <rundir>

<config> is a JSON descriptor path or a catalog scenario id. Exit code is 0
iff every check passes; usage errors exit 2.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

from dynamics.evolution import RunResult, run
from generators import report_card
from scenarios.catalog import SCENARIOS
from scenarios.checks import SWEEP_COLUMNS, run_checks, sweep_config, verify_config
from utils import settings
from utils.config import parse_config, resolve_config, serialize_config
from utils.errors import ChiralKKError, ConfigError
from utils.output import write_csv, write_json
from utils.report import RunReport

logger = logging.getLogger("chiralkk")


def load_config(ref, args):
    """Descriptor path or catalog id, with the CLI overrides applied."""
    if Path(ref).exists():
        cfg = parse_config(ref)
    elif ref in SCENARIOS:
        cfg = resolve_config({"scenario": ref})
    else:
        raise ConfigError(f"'{ref}' is neither a config file nor a catalog scenario")
    return cfg.with_overrides(
        n=getattr(args, "n", None),
        steps=getattr(args, "steps", None),
        cadence=getattr(args, "cadence", None),
        seed=args.seed,
        tol_scale=args.tol_scale,
    )


def out_dir(args, scenario):
    return Path(args.out) if args.out else Path(settings.DEFAULT_OUT_DIR) / scenario


def write_report(directory, report: RunReport):
    write_json(directory / "report.json", report.to_json_dict())
    (directory / "report.txt").write_text(report.to_text())
    (directory / "report.svg").write_text(report_card.draw_report_card(report))
    logger.info("%s %s: %s (%s)", report.command, report.scenario, "PASS" if report.passed else "FAIL", directory)
    return report.exit_code


def cmd_run(args):
    cfg = load_config(args.config, args)
    directory = out_dir(args, cfg.scenario)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "config.json").write_text(serialize_config(cfg))

    start = time.perf_counter()
    try:
        result = run(cfg)
    except ChiralKKError as exc:
        report = RunReport(scenario=cfg.scenario, command="run", parameters={"n": cfg.n, "steps": cfg.steps})
        report.fail(exc)
        report.duration_s = time.perf_counter() - start
        return write_report(directory, report)

    write_csv(directory / "charges.csv", result.charge_header, result.charge_rows)
    write_csv(directory / "diagnostics.csv", result.diagnostic_header, result.diagnostic_rows)
    report = run_checks(cfg, result)
    report.duration_s = time.perf_counter() - start
    return write_report(directory, report)


def cmd_verify(args):
    cfg = load_config(args.config, args)
    directory = out_dir(args, cfg.scenario)
    directory.mkdir(parents=True, exist_ok=True)
    report = verify_config(cfg, dump_dir=directory if args.dump else None)
    print(report.to_text(), end="")
    return write_report(directory, report)


def parse_grids(text):
    try:
        grids = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grids must be comma-separated integers, got '{text}'")
    if len(grids) < 2:
        raise argparse.ArgumentTypeError("sweep needs at least two grid sizes")
    return grids


def cmd_sweep(args):
    cfg = load_config(args.config, args)
    directory = out_dir(args, cfg.scenario)
    directory.mkdir(parents=True, exist_ok=True)
    rows, report = sweep_config(cfg, args.grids)
    write_csv(directory / "sweep.csv", SWEEP_COLUMNS, rows)
    (directory / "sweep.svg").write_text(report_card.draw_sweep_card(rows, cfg.scenario))
    print(report.to_text(), end="")
    return write_report(directory, report)


def cmd_report(args):
    directory = Path(args.rundir)
    cfg = parse_config(directory / "config.json")
    result = RunResult.load(directory / "charges.csv", directory / "diagnostics.csv")
    report = run_checks(cfg, result, tol_scale=args.tol_scale)
    report.command = "report"
    print(report.to_text(), end="")
    return write_report(directory, report)


def build_parser():
    parser = argparse.ArgumentParser(prog="chiralkk", description="Chiral KK worldvolume engine")
    parser.add_argument("--log-level", default=None, help="overrides CHIRALKK_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--tol-scale", type=float, default=None, help="multiplies every tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for random deformations and slices")
        p.add_argument("--n", type=int, default=None, help="spatial grid size")

    p_run = sub.add_parser("run", help="evolve and record diagnostics")
    p_run.add_argument("config")
    p_run.add_argument("--cadence", type=int, default=None, help="diagnostics every N steps")
    p_run.add_argument("--steps", type=int, default=None)
    common(p_run)
    p_run.set_defaults(handler=cmd_run)

    p_verify = sub.add_parser("verify", help="static geometry, algebra and stress checks")
    p_verify.add_argument("config")
    p_verify.add_argument("--dump", action="store_true", help="dump frames and stress as CSV")
    common(p_verify)
    p_verify.set_defaults(handler=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="convergence orders over several grids")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--grids", type=parse_grids, required=True)
    common(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_report = sub.add_parser("report", help="re-assemble the report of a finished run")
    p_report.add_argument("rundir")
    p_report.add_argument("--tol-scale", type=float, default=None)
    p_report.set_defaults(handler=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    settings.configure_logging(args.log_level)
    if args.command != "report" and args.tol_scale is None:
        args.tol_scale = settings.TOL_SCALE if settings.TOL_SCALE != 1.0 else None
    try:
        return args.handler(args)
    except (ConfigError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
