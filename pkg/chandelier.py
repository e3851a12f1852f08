#!/usr/bin/env python3
"""
Command-line front end for the chandelier-lattice Ising model.

Usage:
    python3 chandelier.py lattice-stats --depth 3
    python3 chandelier.py fixed-points --J -1 --Jp 29 --Jsl 5.3 --T 68
    python3 chandelier.py phase-scan --J -1 --Jp 0:40:41 --Jsl 5.3 --T 20:140:121 -o scan.csv
    python3 chandelier.py iterate --J -1 --Jp 29 --Jsl 5.3 --T 68 --x0 8
    python3 chandelier.py verify-consistency --J 1 --Jp 1 --Jsl 1 --T 2 --depth 2
    python3 chandelier.py fixed-points --config run.json   # keys mirror the flags

Environment:
    CHANDELIER_THREADS  worker processes for phase-scan (default 1)
    CHANDELIER_LOG_DIR  directory for chandelier.log (default ./logs)
"""

import argparse
import csv
import json
import logging
import os
import sys
import time
from datetime import datetime
from logging.handlers import RotatingFileHandler

import numpy as np

from errors import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, CapacityError, ChandelierError, ParameterDomainError, UsageError
from exact import EXHAUSTIVE_MAX_DEPTH, BoundaryField, check_compatibility
from lattice import build, lattice_stats
from model import PARAM_KEYS, CouplingParams, weights
from output_utils import compress_and_remove, dump_json, format_number, open_writable
from phase import DEFAULT_ORBIT_STEPS, build_grid, orbit, scan, write_orbit_csv, write_scan_csv
from recurrence import h_update
from roots import fixed_point_report

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed, environment only

SCRIPT_DIR = os.path.dirname(os.path.abspath(__file__))
LOG_DIR = os.environ.get("CHANDELIER_LOG_DIR", os.path.join(SCRIPT_DIR, "logs"))
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

SUBCOMMANDS = ("lattice-stats", "fixed-points", "phase-scan", "iterate", "verify-consistency")
DEFAULT_FORMATS = {
    "lattice-stats": "json",
    "fixed-points": "json",
    "phase-scan": "csv",
    "iterate": "csv",
    "verify-consistency": "json",
}
CONFIG_KEYS = set(PARAM_KEYS) | {
    "x0", "steps", "depth", "seed", "zero_field", "format", "output", "compress", "edges",
}


class ChandelierArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def setup_logging(log_file=True, quiet=False):
    """Configure rotating file and console logging.

    Handlers go on the root logger so module loggers propagate into them;
    repeated calls replace the handlers installed by a previous call.
    """
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "_chandelier", False)]:
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.WARNING if quiet else logging.INFO)

    if log_file:
        os.makedirs(LOG_DIR, exist_ok=True)
        # Rotating file handler: 5MB max, 3 backups
        fh = RotatingFileHandler(
            os.path.join(LOG_DIR, "chandelier.log"),
            maxBytes=5 * 1024 * 1024,
            backupCount=3,
        )
        fh.setFormatter(logging.Formatter(LOG_FORMAT))
        fh._chandelier = True
        root.addHandler(fh)

    # Console handler (stderr; stdout carries results only)
    ch = logging.StreamHandler(sys.stderr)
    ch.setFormatter(logging.Formatter(LOG_FORMAT))
    ch._chandelier = True
    root.addHandler(ch)

    return logging.getLogger("chandelier")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the long flag names")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="Output format")
    common.add_argument("-o", "--output", default=None, help="Output file ('-' or omitted: stdout)")
    common.add_argument("--compress", action="store_true", default=None,
                        help="Compress the output file with zstd after writing")
    common.add_argument("--no-log-file", action="store_true", help="Log to the console only")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--J", type=float, default=None, help="Nearest-neighbour coupling")
    point.add_argument("--Jp", type=float, default=None, help="Prolonged next-nearest-neighbour coupling")
    point.add_argument("--Jsl", type=float, default=None, help="Same-level nearest-neighbour coupling")
    point.add_argument("--T", type=float, default=None, help="Temperature (> 0)")

    parser = ChandelierArgumentParser(
        prog="chandelier",
        description="Ising model with competing interactions on the triangular chandelier lattice",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ChandelierArgumentParser)

    p = sub.add_parser("lattice-stats", parents=[common], help="Vertex and pair counts of V_n")
    p.add_argument("--depth", type=int, default=None, help="Lattice depth n (default 2)")
    p.add_argument("--edges", action="store_true", default=None,
                   help="Write the 'type u v' edge list instead of counts")

    sub.add_parser("fixed-points", parents=[common, point],
                   help="Roots of the fixed-point quartic with stability classes")

    p = sub.add_parser("phase-scan", parents=[common], help="Count positive fixed points over a grid")
    for name in PARAM_KEYS:
        p.add_argument(f"--{name}", default=None, help=f"{name} value or range 'a:b:n'")

    p = sub.add_parser("iterate", parents=[common, point], help="Orbit of x0 under the scalar map")
    p.add_argument("--x0", type=float, default=None, help="Starting point (> 0)")
    p.add_argument("--steps", type=int, default=None, help=f"Step cap (default {DEFAULT_ORBIT_STEPS})")

    p = sub.add_parser("verify-consistency", parents=[common, point],
                       help="Exhaustive depth-2 compatibility check of one recursion step")
    p.add_argument("--depth", type=int, default=None, help="Oracle depth (must be 2)")
    p.add_argument("--seed", type=int, default=None, help="Seed for the random outer field (default 0)")
    p.add_argument("--zero-field", action="store_true", default=None, help="Use h = 0 on the outer semi-balls")

    return parser


def load_config(path):
    """Read a JSON config object; keys must be known flag names."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def merge_config(args):
    """Fill flags the user left unset from --config; explicit flags win."""
    if args.config:
        for key, value in load_config(args.config).items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    if args.format is None:
        args.format = DEFAULT_FORMATS[args.command]
    if args.format not in ("json", "csv"):
        raise UsageError(f"format must be 'json' or 'csv', got {args.format!r}")
    return args


def params_from_args(args):
    missing = [f"--{k}" for k in PARAM_KEYS if getattr(args, k, None) is None]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    return CouplingParams(*(getattr(args, k) for k in PARAM_KEYS))


def worker_count():
    raw = os.environ.get("CHANDELIER_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise UsageError(f"CHANDELIER_THREADS must be an integer, got {raw!r}")
    return max(1, workers)


# --- subcommands ---------------------------------------------------------------

def cmd_lattice_stats(args, out, logger):
    depth = 2 if args.depth is None else args.depth
    if args.edges:
        count = build(depth).export_edges(out)
        logger.info(f"Wrote {count} edges for depth {depth}")
        return
    stats = lattice_stats(depth)
    if args.format == "json":
        dump_json(stats, out)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["kind", "count", "expected"])
    for kind, count in stats["counts"].items():
        writer.writerow([kind, count, stats["expected"][kind]])


def cmd_fixed_points(args, out, logger):
    report = fixed_point_report(params_from_args(args))
    logger.info(f"{len(report.positive)} positive fixed point(s): {report.positive_real_roots}")
    if args.format == "json":
        dump_json(report.to_dict(), out)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", "f_prime", "class"])
    for s in report.positive:
        writer.writerow([format_number(s.x), format_number(s.f_prime), s.kind])


def cmd_phase_scan(args, out, logger):
    missing = [f"--{k}" for k in PARAM_KEYS if getattr(args, k, None) is None]
    if missing:
        raise UsageError(f"missing grid axis/axes: {', '.join(missing)}")
    grid = build_grid(*(getattr(args, k) for k in PARAM_KEYS))
    cells = scan(grid, workers=worker_count(), progress=not args.quiet)
    if args.format == "json":
        dump_json([c.to_dict() for c in cells], out)
    else:
        write_scan_csv(cells, out, format_number)


def cmd_iterate(args, out, logger):
    params = params_from_args(args)
    if args.x0 is None:
        raise UsageError("missing --x0")
    steps = DEFAULT_ORBIT_STEPS if args.steps is None else args.steps
    result = orbit(params, args.x0, steps)
    logger.info(f"Orbit from {args.x0}: {result.diagnosis} after {result.steps} step(s)")
    if args.format == "json":
        dump_json(result.to_dict(), out)
    else:
        write_orbit_csv(result, out, format_number)


def cmd_verify_consistency(args, out, logger):
    depth = 2 if args.depth is None else args.depth
    if depth > EXHAUSTIVE_MAX_DEPTH:
        raise CapacityError(f"exhaustive oracle supports depth <= {EXHAUSTIVE_MAX_DEPTH}, got {depth}")
    if depth != 2:
        raise ParameterDomainError(f"compatibility is checked between depths 1 and 2, got depth {depth}")
    params = params_from_args(args)
    seed = 0 if args.seed is None else args.seed
    if args.zero_field:
        outer = BoundaryField.zero()
    else:
        outer = BoundaryField(tuple(np.random.default_rng(seed).uniform(-1.0, 1.0, 8)))
    inner = h_update(outer, weights(params))

    result = check_compatibility(build(2), params, inner, outer)
    logger.info(f"Max compatibility residual: {result.max_residual:.3g}")
    if args.format == "json":
        dump_json({
            **result.to_dict(),
            "seed": seed,
            "field_outer": outer.to_list(),
            "field_inner": inner.to_list(),
        }, out)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["sigma", "mu_inner", "marginal", "residual"])
    for row in result.per_sigma:
        writer.writerow([
            " ".join(str(s) for s in row["sigma"]),
            format_number(row["mu_inner"]),
            format_number(row["marginal"]),
            format_number(row["residual"]),
        ])


COMMANDS = {
    "lattice-stats": cmd_lattice_stats,
    "fixed-points": cmd_fixed_points,
    "phase-scan": cmd_phase_scan,
    "iterate": cmd_iterate,
    "verify-consistency": cmd_verify_consistency,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    logger = setup_logging(log_file=not args.no_log_file, quiet=args.quiet)
    start = time.time()
    logger.info("=" * 60)
    logger.info(f"chandelier {args.command} started at {datetime.now().isoformat()}")

    try:
        merge_config(args)
        with open_writable(args.output) as out:
            COMMANDS[args.command](args, out, logger)
        if args.compress:
            compress_and_remove(args.output, logger)
    except ChandelierError as e:
        logger.error(f"{args.command}: FAILED ({e})")
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command}: FAILED with unexpected error: {e}")
        return EXIT_FAILURE

    logger.info(f"{args.command}: SUCCESS in {time.time() - start:.2f}s")
    logger.info("=" * 60)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
