"""Command-line interface for fdslrm."""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .analysis import periodogram
from .config import DEFAULT_INITIAL, DEFAULT_METHODS, resolve_seed
from .design import realize
from .exceptions import (
    DegenerateResidualError,
    FdslrmError,
    InputError,
    InvalidParameterError,
    ModelError,
)
from .export import (
    coefficients_to_dict,
    export_to_file,
    read_model_json,
    read_series_csv,
    to_decomposition_csv,
    to_json,
    to_replicates_csv,
)
from .fitter import FdslrmFitter, run_benchmark
from .models import SimulationConfig, VarianceComponents
from .simulate import sample_array, summarize

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_DEGENERATE = 4


def _floats(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise InputError(f"Expected comma-separated numbers, got {text!r}") from e


def _write(text: str, output: Optional[str], format: str) -> None:
    if output:
        export_to_file(text, output, format=format)
    else:
        sys.stdout.write(text)


def fit_command(args: argparse.Namespace) -> None:
    """Execute fit command."""
    fitter = FdslrmFitter.from_files(args.data, args.model, strict=args.strict, log=args.log)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = fitter.fit(methods=methods, initial=args.initial)
    data = report.to_dict(include_timing=not args.no_timing)
    if args.output:
        export_to_file(data, args.output, format="json")
    else:
        print(to_json(data))


def predict_command(args: argparse.Namespace) -> None:
    """Execute predict command."""
    fitter = FdslrmFitter.from_files(args.data, args.model, strict=args.strict, log=args.log)
    nu = _floats(args.nu) if args.nu else None
    blup = fitter.predict(nu=nu, method=args.method)
    _write(to_decomposition_csv(fitter.series, blup), args.output, "csv")
    if args.coefficients:
        export_to_file(coefficients_to_dict(blup), args.coefficients, format="json")


def simulate_command(args: argparse.Namespace) -> None:
    """Execute simulate command."""
    spec = read_model_json(args.model, n=args.n)
    try:
        config = SimulationConfig(
            spec=spec,
            beta=tuple(_floats(args.beta)) if args.beta else (0.0,) * spec.k,
            nu_true=VarianceComponents(nu=tuple(_floats(args.nu))),
            replicates=args.replicates,
            seed=resolve_seed(args.seed),
        )
    except ValidationError as e:
        raise InputError(f"Invalid simulation settings: {e}") from e

    design = realize(spec)
    if args.format == "json":
        summary = summarize(config, design)
        if args.output:
            export_to_file(summary, args.output, format="json")
        else:
            print(to_json(summary))
    else:
        _write(to_replicates_csv(sample_array(config, design)), args.output, "csv")


def bench_command(args: argparse.Namespace) -> None:
    """Execute bench command."""
    grid = [int(float(item)) for item in args.n_grid.split(",") if item.strip()]
    threads = args.threads if args.threads > 0 else None
    result = run_benchmark(grid, l=args.l, seed=resolve_seed(args.seed), runs=args.runs, threads=threads)
    if args.json:
        print(to_json(result))
        return
    print(f"\nNN-MDOOLSE timing, l={result['l']}, median of {args.runs} runs:\n")
    print(f"{'n':>10}  {'median ms':>12}")
    for row in result["rows"]:
        print(f"{row['n']:>10}  {row['median_ns'] / 1e6:>12.4f}")
    if result["slope"] is not None:
        print(f"\nlog-log slope: {result['slope']:.3f}")


def periodogram_command(args: argparse.Namespace) -> None:
    """Execute periodogram command."""
    ordinates = periodogram(read_series_csv(args.data), sort=args.sort or args.top is not None)
    if args.top is not None:
        ordinates = ordinates[: args.top]
    if args.json:
        print(to_json([item.model_dump() for item in ordinates]))
        return
    print(f"{'h':>5}  {'frequency':>10}  {'power':>14}")
    for item in ordinates:
        print(f"{item.harmonic:>5}  {item.frequency:>10.5f}  {item.power:>14.6g}")


def exit_code(error: Exception) -> int:
    """Map an exception to the documented exit code."""
    if isinstance(error, DegenerateResidualError):
        return EXIT_DEGENERATE
    if isinstance(error, (InputError, InvalidParameterError, ValidationError, ValueError)):
        return EXIT_INPUT
    if isinstance(error, ModelError):
        return EXIT_MODEL
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdslrm",
        description="Variance components, EBLUP-NE and BLUP for finite discrete spectrum LRMs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s fit series.csv configs/cyberattacks.json
  %(prog)s fit series.csv model.json --methods ne,remle,eblupne --initial mle -o report.json
  %(prog)s predict series.csv model.json --nu 0.06,0.024,0.014
  %(prog)s simulate model.json --nu 1,2,0.5 --replicates 100 --seed 7
  %(prog)s bench --n-grid 1e3,1e4,1e5,1e6 --l 4
  %(prog)s periodogram series.csv --top 5
        """,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Fit command
    fit_parser = subparsers.add_parser("fit", help="Estimate variance components")
    fit_parser.add_argument("data", help="CSV file; the first column is the series")
    fit_parser.add_argument("model", help="Model config JSON")
    fit_parser.add_argument(
        "--methods",
        default=",".join(DEFAULT_METHODS),
        help=f"Comma-separated methods (default: {','.join(DEFAULT_METHODS)})",
    )
    fit_parser.add_argument("--initial", default=DEFAULT_INITIAL, help=f"Stage-1 method of EBLUP-NE (default: {DEFAULT_INITIAL})")
    fit_parser.add_argument("-o", "--output", help="Write the JSON report to this file")
    fit_parser.add_argument("--no-timing", action="store_true", help="Omit timing fields from the report")
    fit_parser.add_argument("--strict", action="store_true", help="Fail with exit code 4 on a residual in span(V)")
    fit_parser.add_argument("--log", action="store_true", help="Fit the natural log of the series")
    fit_parser.set_defaults(func=fit_command)

    # Predict command
    predict_parser = subparsers.add_parser("predict", help="BLUE/BLUP decomposition of the series")
    predict_parser.add_argument("data", help="CSV file; the first column is the series")
    predict_parser.add_argument("model", help="Model config JSON")
    source = predict_parser.add_mutually_exclusive_group()
    source.add_argument("--nu", help="Comma-separated nu_0,nu_1,...,nu_l")
    source.add_argument("--method", help=f"Estimate nu with this method (default: {DEFAULT_INITIAL})")
    predict_parser.add_argument("-o", "--output", help="Write the decomposition CSV to this file")
    predict_parser.add_argument("--coefficients", help="Write beta*, Y* and nu as JSON to this file")
    predict_parser.add_argument("--strict", action="store_true", help="Fail with exit code 4 on a residual in span(V)")
    predict_parser.add_argument("--log", action="store_true", help="Decompose the natural log of the series")
    predict_parser.set_defaults(func=predict_command)

    # Simulate command
    simulate_parser = subparsers.add_parser("simulate", help="Draw Gaussian replicates of a model")
    simulate_parser.add_argument("model", help="Model config JSON")
    simulate_parser.add_argument("--n", type=int, help="Observation count when the config has none")
    simulate_parser.add_argument("--nu", required=True, help="Comma-separated true nu_0,nu_1,...,nu_l")
    simulate_parser.add_argument("--beta", help="Comma-separated trend coefficients (default: zeros)")
    simulate_parser.add_argument("--replicates", type=int, default=1, help="Number of replicates (default: 1)")
    simulate_parser.add_argument("--seed", type=int, help="Seed; FDSLRM_SEED overrides it (default: 0)")
    simulate_parser.add_argument("--format", choices=["csv", "json"], default="csv", help="Replicates as CSV or a JSON summary")
    simulate_parser.add_argument("-o", "--output", help="Write to this file instead of stdout")
    simulate_parser.set_defaults(func=simulate_command)

    # Bench command
    bench_parser = subparsers.add_parser("bench", help="Time NN-MDOOLSE over a grid of n")
    bench_parser.add_argument("--n-grid", default="1e3,1e4,1e5,1e6", help="Ascending comma-separated n values")
    bench_parser.add_argument("--l", type=int, default=4, help="Number of random components (default: 4)")
    bench_parser.add_argument("--runs", type=int, default=11, help="Runs per n (default: 11)")
    bench_parser.add_argument("--seed", type=int, help="Seed; FDSLRM_SEED overrides it (default: 0)")
    bench_parser.add_argument("--threads", type=int, default=1, help="BLAS threads while timing; 0 keeps the library default (default: 1)")
    bench_parser.add_argument("--json", action="store_true", help="Output JSON format")
    bench_parser.set_defaults(func=bench_command)

    # Periodogram command
    periodogram_parser = subparsers.add_parser("periodogram", help="Periodogram at the Fourier frequencies")
    periodogram_parser.add_argument("data", help="CSV file; the first column is the series")
    periodogram_parser.add_argument("--sort", action="store_true", help="Sort by descending power")
    periodogram_parser.add_argument("--top", type=int, help="Show only the strongest harmonics")
    periodogram_parser.add_argument("--json", action="store_true", help="Output JSON format")
    periodogram_parser.set_defaults(func=periodogram_command)

    return parser


def main(args: Optional[list] = None) -> None:
    """Main entry point for CLI."""
    parser = build_parser()
    parsed_args = parser.parse_args(args)

    if not parsed_args.command:
        parser.print_help()
        sys.exit(EXIT_ERROR)

    level = logging.WARNING
    if parsed_args.verbose == 1:
        level = logging.INFO
    elif parsed_args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        parsed_args.func(parsed_args)
    except (FdslrmError, ValidationError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(exit_code(e))


if __name__ == "__main__":
    main()
