"""
Command line entry point.

    sphmelt run SCENARIO [--out DIR] [--resolution-scale S] [--max-steps N]
    sphmelt bench NAME [NAME ...] [--resolution-scale S]
    sphmelt gradlab CONFIG

``SCENARIO`` is a scenario file or the name of a shipped one. Exit status is
0 on success, 1 when a simulation diverged and 2 for invalid input.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from sphmelt.bench import BENCHMARKS, BenchmarkReport, run_benchmark, run_benchmarks
from sphmelt.gradlab import gradient_study, load_gradlab
from sphmelt.runner import run_scenario
from sphmelt.scenario import load_scenario, scale_resolution, scenario_path
from sphmelt.validation import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_INVALID = 2

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper()), format=LOG_FORMAT)


def _scenario_file(value: str) -> Path:
    path = Path(value)
    if path.is_file():
        return path
    return scenario_path(value)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--resolution-scale",
        type=float,
        default=1.0,
        help="multiply dx (and dt accordingly); > 1 coarsens",
    )
    parser.add_argument(
        "--max-steps", type=int, default=None, help="stop after this many steps"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a scenario value (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphmelt",
        description="SPH melt-pool solver: scenarios, benchmarks, gradient study",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging verbosity",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario")
    run.add_argument("scenario", help="scenario file or shipped scenario name")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    _add_common(run)

    bench = commands.add_parser("bench", help="run benchmarks")
    bench.add_argument(
        "names", nargs="+", help=f"'all' or any of: {', '.join(BENCHMARKS)}"
    )
    bench.add_argument(
        "--out", type=Path, default=Path("bench"), help="output directory"
    )
    bench.add_argument(
        "--jobs", type=int, default=None, help="concurrent benchmarks (default: all)"
    )
    _add_common(bench)

    gradlab = commands.add_parser("gradlab", help="compare gradient variants")
    gradlab.add_argument("config", type=Path, help="gradient study config file")
    gradlab.add_argument(
        "--out", type=Path, default=None, help="write the report as JSON"
    )
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    source = _scenario_file(args.scenario)
    config = load_scenario(source, args.overrides)
    config = scale_resolution(config, args.resolution_scale)
    out = args.out or Path("runs") / config.scenario.name
    result = run_scenario(config, out, args.max_steps)
    if not result.ok:
        logger.error("%s", result.diverged)
        return EXIT_DIVERGED
    print(f"{result.name}: {result.steps} steps, t={result.time:g}, output in {out}")
    return EXIT_OK


def _print_report(report: BenchmarkReport) -> None:
    print(f"{report.name} [{report.status}] steps={report.steps} t={report.time:g}")
    for key, value in report.observables.items():
        print(f"  {key:<32} {value:.6g}")


def cmd_bench(args: argparse.Namespace) -> int:
    names = list(BENCHMARKS) if args.names == ["all"] else args.names
    if len(names) == 1:
        reports = [
            run_benchmark(
                names[0],
                args.resolution_scale,
                args.out / names[0],
                args.max_steps,
                args.overrides,
            )
        ]
    else:
        reports = run_benchmarks(
            names,
            resolution_scale=args.resolution_scale,
            output_dir=args.out,
            max_steps=args.max_steps,
            overrides=args.overrides,
            limit=args.jobs,
        )
    for report in reports:
        _print_report(report)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_DIVERGED


def cmd_gradlab(args: argparse.Namespace) -> int:
    config = load_gradlab(args.config)
    if args.out is not None:
        output = config.output.model_copy(update={"report": str(args.out)})
        config = config.model_copy(update={"output": output})
    report = gradient_study(config)
    print(report.table())
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "gradlab": cmd_gradlab}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        for message in exc.messages:
            print(message, file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
