"""Command line entry point: ``dispecho <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from .config import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 1, 2


def _print_run(result):
    print(f"run directory: {result.run_dir}")
    for name, digest in result.manifest["outputs"].items():
        print(f"  {name}  sha256={digest[:16]}")


def cmd_echo_sweep(args):
    from .runner import run_echo_sweep

    result = run_echo_sweep(args.config, root=args.output_root, workers=args.workers)
    _print_run(result)
    fits = (result.run_dir / "fits.csv").read_text(encoding="utf-8")
    sys.stdout.write(fits)
    return EXIT_OK


def cmd_saturation_scan(args):
    from .runner import run_saturation_scan

    _print_run(run_saturation_scan(args.config, root=args.output_root, workers=args.workers))
    return EXIT_OK


def cmd_theory_curve(args):
    from .runner import run_theory_curve

    _print_run(run_theory_curve(args.config, root=args.output_root))
    return EXIT_OK


def cmd_lyapunov(args):
    from .classical import benettin_lyapunov

    if args.K <= 0 or args.steps < 100:
        raise ConfigError("need K > 0 and at least 100 steps")
    est = benettin_lyapunov(args.K, args.steps, args.transient, args.seed)
    print("K,steps,seed,lyapunov,stderr,ln_K_over_2")
    print(f"{args.K:.17g},{est.n_steps},{args.seed},{est.value:.17g},{est.stderr:.17g},{math.log(args.K / 2):.17g}")
    return EXIT_OK


def cmd_oracle_suite(args):
    from .oracles import run_oracle_suite

    checks = run_oracle_suite(corrupt_kinetic=args.inject_fault)
    for check in checks:
        print(json.dumps(check.as_dict()))
    failed = [c for c in checks if not c.passed]
    print(json.dumps({"summary": {"checks": len(checks), "failed": len(failed)}}))
    return EXIT_ORACLE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispecho", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_run_options(p, workers=True):
        p.add_argument("config", help="run configuration file")
        p.add_argument("--output-root", help="parent of run directories (env DISPECHO_OUTPUT_ROOT, default ./runs)")
        if workers:
            p.add_argument("--workers", type=int, help="worker processes (env DISPECHO_WORKERS, default 1)")

    p = sub.add_parser("echo-sweep", help="ensemble echo curves and decay fits")
    with_run_options(p)
    p.set_defaults(func=cmd_echo_sweep)

    p = sub.add_parser("saturation-scan", help="long-time echo plateau versus displacement")
    with_run_options(p)
    p.set_defaults(func=cmd_saturation_scan)

    p = sub.add_parser("theory-curve", help="analytic echo curves for a config")
    with_run_options(p, workers=False)
    p.set_defaults(func=cmd_theory_curve)

    p = sub.add_parser("lyapunov", help="Benettin estimate for the standard map")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transient", type=int, default=1000)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("oracle-suite", help="propagator checks against dense references")
    p.add_argument("--inject-fault", action="store_true", help="corrupt the kinetic phase (negative control)")
    p.set_defaults(func=cmd_oracle_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
