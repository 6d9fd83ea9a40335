"""
Command-line interface.

    dftsafety synth scenario.yaml -o system.dft
    dftsafety rewrite system.dft
    dftsafety check system.dft --measure reliability,mttf --time 10000
    dftsafety approx system.dft --measure unreliability --rel-err 0.01
    dftsafety export system.dft --ctmc dot
    dftsafety sweep system.dft --measure afh --param lambda_s=1e-7,1e-6

Exit codes: 0 on success, 2 for malformed or invalid input, 3 for an
undefined measure, 1 for any other analysis error.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from typing import Dict, List, Optional, Sequence

from dftsafety.analyzer import Analyzer
from dftsafety.errors import (
    CapReachedWithoutPrecisionError,
    DftError,
    DftSyntaxError,
    NoDegradedStatesError,
    ScenarioError,
    UndefinedExpectedTimeError,
    ValidationError,
)
from dftsafety.export import emit_results
from dftsafety.models.enums import ExportFormat
from dftsafety.models.results import MeasureParams
from dftsafety.models.settings import SolverSettings
from dftsafety.parser import serialize_dft
from dftsafety.scenario_io import load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_UNDEFINED = 3


def _parameters(values: Optional[List[str]]) -> Dict[str, List[float]]:
    parameters: Dict[str, List[float]] = {}
    for value in values or []:
        name, sep, numbers = value.partition("=")
        if not sep or not name:
            raise argparse.ArgumentTypeError("Expected --param name=value[,value...]")
        try:
            parameters[name.strip()] = [float(v) for v in numbers.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError("Parameter {} needs numeric values".format(name))
    return parameters


def _valuation(values: Optional[List[str]]) -> Dict[str, float]:
    valuation = {}
    for name, numbers in _parameters(values).items():
        if len(numbers) != 1:
            raise argparse.ArgumentTypeError("Parameter {} takes a single value".format(name))
        valuation[name] = numbers[0]
    return valuation


def _list(value: Optional[str]) -> List[str]:
    return [v.strip() for v in (value or "").split(",") if v.strip()]


def _params(args: argparse.Namespace) -> MeasureParams:
    return MeasureParams(args.time, args.lifetime, args.drivecycle)


def _write(args: argparse.Namespace, data: bytes):
    if args.out:
        with open(args.out, "wb") as f:
            f.write(data)
        logger.info("Wrote %s", args.out)
    else:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()


def _analyzer(args: argparse.Namespace) -> Analyzer:
    settings = SolverSettings(
        epsilon=args.epsilon, state_cap=args.state_cap, degraded_label=args.degraded_label
    )
    return Analyzer(settings, rewrite=getattr(args, "rewrite", False), workers=args.workers)


def _synth(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    dft = analyzer.synthesize(load_scenario(args.scenario))
    _write(args, serialize_dft(dft).encode("utf-8"))
    return EXIT_OK


def _rewrite(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    analyzer.rewrite = True
    _write(args, serialize_dft(analyzer.load(args.dft)).encode("utf-8"))
    return EXIT_OK


def _check(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    dft = analyzer.load(args.dft)
    measures = _list(args.measure) or ["reliability"]
    results = analyzer.evaluate(
        dft,
        measures,
        _params(args),
        _valuation(args.param),
        evidence=_list(args.evidence),
    )
    _write(args, emit_results(results))
    return EXIT_OK


def _approx(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    dft = analyzer.load(args.dft)
    try:
        interval = analyzer.approximate(
            dft, args.measure, args.rel_err, _params(args), _valuation(args.param)
        )
    except CapReachedWithoutPrecisionError as e:
        logger.warning("%s", e)
        interval = e.interval
    _write(args, emit_results(interval.trace or [interval]))
    return EXIT_OK


def _export(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    dft = analyzer.load(args.dft)
    ctmc = analyzer.chain(dft, _valuation(args.param), evidence=_list(args.evidence))
    _write(args, emit_results(ctmc, ExportFormat(args.ctmc)))
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    analyzer = _analyzer(args)
    dft = analyzer.load(args.dft)
    parameters = _parameters(args.param)
    names = sorted(parameters)
    valuations = [
        dict(zip(names, values)) for values in itertools.product(*(parameters[n] for n in names))
    ]
    rows = list(analyzer.sweep(dft, args.measure, valuations, _params(args)))
    _write(args, emit_results(rows))
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, measure_times: bool = True):
    parser.add_argument("-o", "--out", help="output file (default: standard output)")
    parser.add_argument(
        "--param",
        action="append",
        metavar="NAME=VALUE",
        help="rate parameter value; repeatable",
    )
    if measure_times:
        parser.add_argument("--time", type=float, help="horizon of bounded measures (hours)")
        parser.add_argument(
            "--lifetime", type=float, default=10_000.0, help="AFH lifetime (hours)"
        )
        parser.add_argument(
            "--drivecycle", type=float, default=1.0, help="FLOD/SILFO drive cycle (hours)"
        )
    parser.add_argument("--rewrite", action="store_true", help="simplify the DFT first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dftsafety",
        description="Synthesise dynamic fault trees and compute safety measures on their CTMCs.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="errors only")
    parser.add_argument("--epsilon", type=float, default=1e-10, help="uniformization accuracy")
    parser.add_argument("--state-cap", type=int, default=10_000_000, help="maximal state count")
    parser.add_argument(
        "--degraded-label", default="degraded", help="label marking degraded states"
    )
    parser.add_argument("--workers", type=int, default=1, help="threads for sweeps")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="synthesise the DFT of a scenario")
    synth.add_argument("scenario", help="YAML scenario document")
    synth.add_argument("-o", "--out", help="output DFT file (default: standard output)")
    synth.add_argument("--rewrite", action="store_true", help="simplify the DFT")
    synth.set_defaults(handler=_synth)

    rewrite = commands.add_parser("rewrite", help="simplify a DFT")
    rewrite.add_argument("dft", help="DFT text file or YAML scenario")
    rewrite.add_argument("-o", "--out", help="output DFT file (default: standard output)")
    rewrite.set_defaults(handler=_rewrite)

    check = commands.add_parser("check", help="compute measures exactly")
    check.add_argument("dft", help="DFT text file or YAML scenario")
    check.add_argument("--measure", default="reliability", help="comma-separated measures")
    check.add_argument("--evidence", help="comma-separated basic events assumed failed")
    _add_common(check)
    check.set_defaults(handler=_check)

    approx = commands.add_parser("approx", help="bound a measure from a partial state space")
    approx.add_argument("dft", help="DFT text file or YAML scenario")
    approx.add_argument(
        "--measure", default="unreliability", choices=["unreliability", "mttf"]
    )
    approx.add_argument("--rel-err", type=float, default=0.01, help="relative error target")
    _add_common(approx)
    approx.set_defaults(handler=_approx)

    export = commands.add_parser("export", help="write the CTMC")
    export.add_argument("dft", help="DFT text file or YAML scenario")
    export.add_argument(
        "--ctmc",
        default=ExportFormat.Dot.value,
        choices=[ExportFormat.Dot.value, ExportFormat.TransitionList.value],
    )
    export.add_argument("--evidence", help="comma-separated basic events assumed failed")
    _add_common(export, measure_times=False)
    export.set_defaults(handler=_export)

    sweep = commands.add_parser("sweep", help="evaluate a measure over parameter values")
    sweep.add_argument("dft", help="DFT text file or YAML scenario")
    sweep.add_argument("--measure", default="reliability")
    _add_common(sweep)
    sweep.set_defaults(handler=_sweep)
    return parser


def _configure_logging(args: argparse.Namespace):
    if args.quiet:
        level = logging.ERROR
    else:
        level = max(logging.DEBUG, logging.WARNING - 10 * args.verbose)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        return args.handler(args)
    except (argparse.ArgumentTypeError, ValueError) as e:
        logger.error("Argument error: %s", e)
        return EXIT_INVALID
    except (DftSyntaxError, ValidationError, ScenarioError) as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except (UndefinedExpectedTimeError, NoDegradedStatesError) as e:
        logger.error("Undefined measure: %s", e)
        return EXIT_UNDEFINED
    except DftError as e:
        logger.error("%s", e)
        return EXIT_ERROR
    except OSError as e:
        logger.error("%s", e)
        return EXIT_ERROR
