import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from pdcgm.apps.mcnf import solve_mcnf
from pdcgm.apps.tssp import solve_tssp
from pdcgm.colgen.driver import write_trace
from pdcgm.colgen.models import ColumnGenerationResult, DriverConfig, DriverMode
from pdcgm.config import config
from pdcgm.constants import APP_NAME, APP_VERSION, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE
from pdcgm.data.formats import format_mcnf, format_tssp, load_mcnf, load_tssp
from pdcgm.data.generators import random_network, random_stochastic
from pdcgm.exceptions import PDCGMError
from pdcgm.verify import SUITES

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    """Summary of one solve, printed by the solve commands"""
    instance: str
    mode: str
    objective: float
    outer_iterations: int
    total_time: float
    rmp_fraction: float
    oracle_fraction: float
    active_fraction: Optional[float] = None
    artificial_mass: Optional[float] = None

    @classmethod
    def from_result(cls, instance: str, mode: DriverMode, objective: float,
                    result: ColumnGenerationResult, **extra) -> "RunReport":
        total = result.total_time
        rmp = result.rmp_time / total if total > 0 else 0.0
        oracle = result.oracle_time / total if total > 0 else 0.0
        return cls(
            instance=instance,
            mode=mode.value,
            objective=objective,
            outer_iterations=result.outer_iterations,
            total_time=total,
            rmp_fraction=min(rmp, 1.0),
            oracle_fraction=min(oracle, 1.0 - min(rmp, 1.0)),
            **extra,
        )

    def lines(self) -> List[str]:
        lines = [
            f"instance   {self.instance}",
            f"mode       {self.mode}",
            f"objective  {self.objective:.5E}",
            f"outer      {self.outer_iterations}",
            f"time       {self.total_time:.3f}s (rmp {100 * self.rmp_fraction:.1f}%, oracle {100 * self.oracle_fraction:.1f}%)",
        ]
        if self.active_fraction is not None:
            lines.append(f"active     {100 * self.active_fraction:.1f}%")
        if self.artificial_mass is not None:
            lines.append(f"artificial {self.artificial_mass:.3e}")
        return lines


def _add_driver_flags(parser: argparse.ArgumentParser):
    parser.add_argument("instance", type=Path, help="Instance file")
    parser.add_argument("--delta", type=float, help="Outer relative gap tolerance")
    parser.add_argument("--degree", type=float, help="Degree of optimality D")
    parser.add_argument("--eps-max", type=float, help="Initial and ceiling RMP tolerance")
    parser.add_argument("--gamma", type=float, help="Centrality neighbourhood width")
    parser.add_argument("--mode", choices=[m.value for m in DriverMode], help="Driver mode")
    parser.add_argument("--max-outer", type=int, help="Outer iteration limit")
    parser.add_argument("--workers", type=int, help="Threads for independent subproblems")
    parser.add_argument("--trace", type=Path, help="Write the per-iteration trace as CSV")


def _add_output_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--output", "-o", type=Path, help="Output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_NAME, description="Primal-dual column generation")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    mcnf = commands.add_parser("solve-mcnf", help="Solve a multicommodity flow instance")
    _add_driver_flags(mcnf)
    mcnf.set_defaults(handler=cmd_solve_mcnf)

    tssp = commands.add_parser("solve-tssp", help="Solve a two-stage stochastic instance")
    _add_driver_flags(tssp)
    tssp.set_defaults(handler=cmd_solve_tssp)

    gen_mcnf = commands.add_parser("gen-mcnf", help="Write a seeded random multicommodity flow instance")
    gen_mcnf.add_argument("--nodes", type=int, default=8)
    gen_mcnf.add_argument("--arcs", type=int, default=20)
    gen_mcnf.add_argument("--commodities", type=int, default=4)
    _add_output_flags(gen_mcnf)
    gen_mcnf.set_defaults(handler=cmd_gen_mcnf)

    gen_tssp = commands.add_parser("gen-tssp", help="Write a seeded random two-stage stochastic instance")
    gen_tssp.add_argument("--scenarios", type=int, default=5)
    gen_tssp.add_argument("--first", type=int, default=4, help="First-stage variables")
    gen_tssp.add_argument("--first-rows", type=int, default=2)
    gen_tssp.add_argument("--second", type=int, default=6, help="Second-stage variables")
    gen_tssp.add_argument("--second-rows", type=int, default=3)
    _add_output_flags(gen_tssp)
    gen_tssp.set_defaults(handler=cmd_gen_tssp)

    verify = commands.add_parser("verify", help="Run the brute-force equivalence suites")
    verify.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    verify.set_defaults(handler=cmd_verify)
    return parser


def _configure_logging(args: argparse.Namespace):
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, config.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def driver_config(args: argparse.Namespace, application: str) -> DriverConfig:
    """Environment defaults for the application, overridden by flags"""
    return config.driver_config(
        application,
        delta=args.delta,
        degree=args.degree,
        eps_max=args.eps_max,
        gamma=args.gamma,
        mode=args.mode,
        max_outer=args.max_outer,
        workers=args.workers,
    )


def _emit(text: str, output: Optional[Path]):
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)
        logger.info(f"Wrote {output}")


def cmd_solve_mcnf(args: argparse.Namespace) -> int:
    cfg = driver_config(args, "mcnf")
    net = load_mcnf(args.instance)
    solution = solve_mcnf(net, cfg)
    if args.trace:
        write_trace(solution.trace, args.trace, solution.master.sense)
    report = RunReport.from_result(
        net.name, cfg.mode, solution.objective, solution.result, active_fraction=solution.active_fraction
    )
    print("\n".join(report.lines()))
    return EXIT_OK


def cmd_solve_tssp(args: argparse.Namespace) -> int:
    cfg = driver_config(args, "tssp")
    inst = load_tssp(args.instance)
    solution = solve_tssp(inst, cfg)
    if args.trace:
        write_trace(solution.trace, args.trace, solution.master.sense)
    report = RunReport.from_result(
        inst.name, cfg.mode, solution.objective, solution.result, artificial_mass=solution.result.artificial_mass
    )
    print("\n".join(report.lines()))
    return EXIT_OK


def cmd_gen_mcnf(args: argparse.Namespace) -> int:
    net = random_network(args.seed, args.nodes, args.arcs, args.commodities)
    _emit(format_mcnf(net), args.output)
    return EXIT_OK


def cmd_gen_tssp(args: argparse.Namespace) -> int:
    inst = random_stochastic(
        args.seed, args.first, args.first_rows, args.second, args.second_rows, args.scenarios
    )
    _emit(format_tssp(inst), args.output)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        report = SUITES[name]()
        print(report.summary())
        for note in report.notes:
            print(f"  {note}")
        for failure in report.failures:
            print(f"  FAIL {failure}")
        failed = failed or not report.ok
    return EXIT_NUMERICAL if failed else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    _configure_logging(args)
    try:
        return args.handler(args)
    except PDCGMError as e:
        logger.error(e.message)
        return e.exit_code
    except (OSError, ValueError) as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
