"""
main.py

Command-line entry point:

    python -m cli.main bands    builtin:t1a
    python -m cli.main run      builtin:f6 --method bdsg
    python -m cli.main sweep    builtin:t1a --axis dt
    python -m cli.main compare  builtin:t6a
    python -m cli.main localize builtin:f8-sigma0 --sigmas 0 3 5

Exit status: 0 when every output was written, 1 on a solver/IO error,
2 on bad arguments.
"""

import argparse
import logging
import sys

from cli.commands import CommandContext, cmd_bands, cmd_compare, cmd_localize, cmd_run, cmd_sweep
from config import load_config
from lattice.errors import BdsgError
from scenarios.builtin import resolve_scenario
from scenarios.scenario import METHODS, SWEEP_AXES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdsg",
        description="Bloch-decomposition stochastic Galerkin solver and baselines",
    )
    parser.add_argument("--config", default=None, help="defaults file (default: config/config.yaml)")
    parser.add_argument("--threads", type=int, default=None, help="parallel jobs (default: config parallel.n_jobs)")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--quiet", action="store_true", help="no progress bars")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario YAML path or builtin:<name>")
        p.add_argument("--out", default=None, help="output directory")
        return p

    add("bands", "lattice band table and bands.csv")

    p = add("run", "run one method on a scenario")
    p.add_argument("--method", choices=METHODS, default="bdsg")

    p = add("sweep", "convergence sweep along one axis")
    p.add_argument("--axis", choices=SWEEP_AXES, default=None, help="default: the scenario's expect.axis")

    add("compare", "all methods of a scenario against one reference")

    p = add("localize", "second moment S(t) for several disorder strengths")
    p.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 3.0, 5.0])
    p.add_argument("--slope-start", type=float, default=None, help="start of the late-time window")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args.config)
        n_jobs = args.threads if args.threads is not None else int(config["parallel"]["n_jobs"])
        ctx = CommandContext(config=config, n_jobs=n_jobs, progress=sys.stdout.isatty() and not args.quiet)
        scenario = resolve_scenario(args.scenario)

        if args.command == "bands":
            cmd_bands(scenario, ctx, args.out)
        elif args.command == "run":
            cmd_run(scenario, args.method, ctx, args.out)
        elif args.command == "sweep":
            cmd_sweep(scenario, args.axis or scenario.expect.axis, ctx, args.out)
        elif args.command == "compare":
            cmd_compare(scenario, ctx, args.out)
        elif args.command == "localize":
            cmd_localize(scenario, args.sigmas, ctx, args.out, slope_start=args.slope_start)

    except (BdsgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
