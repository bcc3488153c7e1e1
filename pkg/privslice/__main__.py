"""Main entry point for privslice."""

import argparse
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from rich.console import Console
from rich.markup import escape

from privslice import __version__
from privslice.app import analyze_file, read_program
from privslice.classifier import classify_inputs
from privslice.config import DEFAULT_CONFIG_PATH, Config
from privslice.console import print_diagnostics, print_inventory, print_summary
from privslice.dataset import load_dataset_file
from privslice.errors import PrivsliceError
from privslice.files import read_input, write_output
from privslice.ir.parser import parse_text
from privslice.ir.validate import validate
from privslice.log import configure_logging
from privslice.report import AnalysisResult, render_all_dots, render_report, render_reports

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT_ERROR = 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privslice",
        description="Find personal data in µIR apps and report how it is disguised and shared.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=Path, default=DEFAULT_CONFIG_PATH, help="configuration file"
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="log more, twice for debug"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[common], help="run the full analysis")
    analyze.add_argument("--app", type=Path, action="append", required=True, help="µIR file")
    analyze.add_argument("--dataset", type=Path, help="privacy dataset (JSON)")
    analyze.add_argument("--report", type=Path, help="write the JSON report here")
    analyze.add_argument("--dot-dir", type=Path, help="write DOT slices into this directory")
    analyze.add_argument(
        "--include-control-deps", action="store_true", help="slices follow control dependences"
    )
    analyze.add_argument("--timings", action="store_true", help="add stage timings to the report")
    analyze.add_argument("--quiet", action="store_true", help="no summary on stderr")

    sources = commands.add_parser(
        "sources", parents=[common], help="list the personal-data sources of an app"
    )
    sources.add_argument("--app", type=Path, required=True, help="µIR file")
    sources.add_argument("--dataset", type=Path, help="privacy dataset (JSON)")

    check = commands.add_parser("check", parents=[common], help="parse and validate an app")
    check.add_argument("--app", type=Path, required=True, help="µIR file")
    return parser


def _analyze(args: argparse.Namespace, config: Config, err: Console) -> int:
    dataset = load_dataset_file(config.dataset_path(args.dataset))
    include_ctrl = args.include_control_deps or config.include_control_deps

    def run_one(path: Path) -> AnalysisResult:
        return analyze_file(path, dataset, include_ctrl=include_ctrl, timings=args.timings)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(run_one, path) for path in args.app]
    results: list[AnalysisResult] = []
    failed = False
    for path, future in zip(args.app, futures, strict=True):
        error = future.exception()
        if error is None:
            results.append(future.result())
        elif isinstance(error, PrivsliceError):
            _report_error(err, error, path)
            failed = True
        else:
            raise error
    if failed:
        return EXIT_INPUT_ERROR

    text = render_report(results[0]) if len(results) == 1 else render_reports(results)
    # name clashes surface before anything is written
    dots = render_all_dots(results) if args.dot_dir else {}
    if args.report:
        write_output(args.report, text)
    else:
        sys.stdout.write(text)
    for name, dot in dots.items():
        write_output(args.dot_dir / name, dot)
    if not args.quiet:
        for result in results:
            print_summary(err, result)
    return EXIT_FINDINGS if any(r.has_risk for r in results) else EXIT_OK


def _sources(args: argparse.Namespace, config: Config, out: Console) -> int:
    dataset = load_dataset_file(config.dataset_path(args.dataset))
    program = read_program(args.app)
    print_inventory(out, program, classify_inputs(program, dataset))
    return EXIT_OK


def _check(args: argparse.Namespace, out: Console) -> int:
    program = parse_text(read_input(args.app, "app"))
    diagnostics = validate(program)
    print_diagnostics(out, diagnostics)
    if any(d.is_error for d in diagnostics):
        return EXIT_INPUT_ERROR
    out.print(f"[green]✓ {escape(program.app_id)}[/green]")
    return EXIT_OK


def _report_error(err: Console, error: PrivsliceError, path: Path | None = None) -> None:
    where = f"{path}: " if path else ""
    err.print(f"[red]error:[/red] {escape(where + str(error))}", highlight=False, soft_wrap=True)


def run(argv: Sequence[str] | None = None) -> int:
    """Run the command line; returns the exit code."""
    args = _parser().parse_args(argv)
    configure_logging(args.verbose)
    out = Console(file=sys.stdout)
    err = Console(stderr=True)
    try:
        config = Config.resolve(args.config)
        match args.command:
            case "analyze":
                return _analyze(args, config, err)
            case "sources":
                return _sources(args, config, out)
            case _:
                return _check(args, out)
    except PrivsliceError as error:
        _report_error(err, error)
        return EXIT_INPUT_ERROR


def main() -> None:
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
