"""Command-line interface: ``cohering-power <command> ...``.

Exit codes: 0 success, 1 unreadable or malformed document, 2 invalid input, 3 internal
numerical failure (including a failing ``verify`` case).
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import pydantic

from cohering_power import __version__
from cohering_power.analyzer import CoheringPowerAnalyzer
from cohering_power.documents import dumps, write_document
from cohering_power.exceptions import CoheringPowerError, NumericalError, ValidationError
from cohering_power.models import (
    CircuitBound,
    CoherenceMeasure,
    DilationResult,
    OptimizerConfig,
    PowerReport,
    Profile,
    PropertyId,
    VerifyReport,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = NumericalError.exit_code


def _f(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.17g}"


def _emit(args: argparse.Namespace, data: Dict[str, Any], lines: List[str]) -> None:
    if args.output == "json":
        print(dumps(data))
    else:
        print("\n".join(lines))


def _power_lines(report: PowerReport) -> List[str]:
    lines = [
        f"measure: {report.measure.value}",
        f"method: {report.method.value}",
        f"s_value: {_f(report.s_value)}",
        f"argmax_basis_index: {report.argmax_basis_index}",
    ]
    if report.closed_form_value is not None:
        lines.append(f"closed_form_value: {_f(report.closed_form_value)}")
    if report.s_hat_value is not None:
        flag = " (lower bound)" if report.s_hat_is_lower_bound else ""
        lines.append(f"s_hat_value: {_f(report.s_hat_value)}{flag}")
    for key, value in report.diagnostics.items():
        lines.append(f"  {key}: {value}")
    return lines


def cmd_power(args: argparse.Namespace) -> int:
    report = CoheringPowerAnalyzer(measure=args.measure).power(args.input)
    _emit(args, report.model_dump(mode="json"), _power_lines(report))
    return EXIT_OK


def cmd_gpower(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {
        "restarts": args.restarts,
        "seed": args.seed,
        "max_iterations": args.max_iterations,
        "workers": args.workers,
    }
    if args.tol is not None:
        overrides.update(step_tolerance=args.tol, objective_tolerance=args.tol)
    analyzer = CoheringPowerAnalyzer(measure=args.measure)
    report = analyzer.generalized_power(args.input, **overrides)
    _emit(args, report.model_dump(mode="json"), _power_lines(report))
    return EXIT_OK


def _dilation_lines(result: DilationResult) -> List[str]:
    return [
        f"system_dim: {result.system_dim}",
        f"ancilla_dim: {result.ancilla_dim}",
        f"reconstruction_error: {_f(result.reconstruction_error)}",
        f"unitarity_defect: {_f(result.unitarity_defect)}",
        f"check_states: {result.check_states}",
    ]


def cmd_dilate(args: argparse.Namespace) -> int:
    analyzer = CoheringPowerAnalyzer(config=OptimizerConfig(seed=args.seed))
    result = analyzer.dilate(
        args.input, check_states=args.check_states, minimal_ancilla=args.minimal_ancilla
    )
    data = result.model_dump(mode="json")
    lines = _dilation_lines(result)
    if args.out:
        write_document(args.out, data)
        lines.append(f"written: {args.out}")
    _emit(args, data, lines)
    return EXIT_OK


def _verify_lines(report: VerifyReport) -> List[str]:
    lines = []
    for case in report.cases:
        status = "PASS" if case.passed else "FAIL"
        lines.append(
            f"{status} {case.id.value} trials={case.trials} failures={case.failures} "
            f"worst_margin={_f(case.worst_margin)} tolerance={_f(case.tolerance)}"
        )
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'} (seed {report.seed})")
    return lines


def cmd_verify(args: argparse.Namespace) -> int:
    report = CoheringPowerAnalyzer().verify(
        profile=args.profile, seed=args.seed, cases=args.case, workers=args.workers
    )
    data = report.model_dump(mode="json")
    if args.out:
        write_document(args.out, data)
    _emit(args, data, _verify_lines(report))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _circuit_lines(bound: CircuitBound) -> List[str]:
    return [
        f"qubits: {bound.qubit_count}",
        f"hadamard_count: {bound.hadamard_count}",
        f"bound: {_f(bound.bound)}",
        f"exact: {_f(bound.exact)}",
    ]


def cmd_circuit_bound(args: argparse.Namespace) -> int:
    bound = CoheringPowerAnalyzer().circuit_bound(args.input)
    _emit(args, bound.model_dump(mode="json"), _circuit_lines(bound))
    return EXIT_OK


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output", choices=["text", "json"], default="text", help="Report format"
    )


def _add_measure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--measure",
        choices=[m.value for m in CoherenceMeasure],
        default=CoherenceMeasure.L1.value,
        help="Coherence measure (default: l1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohering-power",
        description="Cohering power of quantum operations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    power = commands.add_parser("power", help="Cohering power of a channel document")
    power.add_argument("input", help="Channel document (JSON)")
    _add_measure(power)
    _add_output(power)
    power.set_defaults(handler=cmd_power)

    gpower = commands.add_parser(
        "gpower", help="Best-found generalized cohering power (a lower bound)"
    )
    gpower.add_argument("input", help="Channel document (JSON)")
    _add_measure(gpower)
    gpower.add_argument("--restarts", type=int, help="Number of local searches")
    gpower.add_argument("--seed", type=int, help="Optimizer seed")
    gpower.add_argument("--tol", type=float, help="Step and objective tolerance")
    gpower.add_argument("--max-iterations", type=int, help="Iterations per restart")
    gpower.add_argument("--workers", type=int, help="Threads running restarts")
    _add_output(gpower)
    gpower.set_defaults(handler=cmd_gpower)

    dilate = commands.add_parser("dilate", help="Stinespring dilation of a channel document")
    dilate.add_argument("input", help="Channel document (JSON)")
    dilate.add_argument("--check-states", type=int, default=20, help="Random check states")
    dilate.add_argument("--seed", type=int, default=0, help="Seed of the check states")
    dilate.add_argument(
        "--minimal-ancilla", action="store_true", help="Ancilla of Kraus-rank dimension"
    )
    dilate.add_argument("--out", help="Write the dilation document here")
    _add_output(dilate)
    dilate.set_defaults(handler=cmd_dilate)

    verify = commands.add_parser("verify", help="Run seeded property checks")
    verify.add_argument(
        "--profile", choices=[p.value for p in Profile], default=Profile.QUICK.value
    )
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument(
        "--case",
        action="append",
        choices=[p.value for p in PropertyId],
        help="Run only this case; repeatable",
    )
    verify.add_argument("--workers", type=int, default=1, help="Threads running cases")
    verify.add_argument("--out", help="Also write the JSON report here")
    _add_output(verify)
    verify.set_defaults(handler=cmd_verify)

    circuit = commands.add_parser(
        "circuit-bound", help="Hadamard-count bound of a circuit document"
    )
    circuit.add_argument("input", help="Circuit document (JSON)")
    _add_output(circuit)
    circuit.set_defaults(handler=cmd_circuit_bound)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except CoheringPowerError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    except pydantic.ValidationError as e:
        print(f"error: invalid option: {e.errors()[0].get('msg', e)}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
