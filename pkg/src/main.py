"""Command-line entry point for barcode convolution and its verification suites.

Results are printed to stdout as JSON; logs go to stderr.

Exit codes: 0 success, 1 verification failure, 2 bad input.
"""

import argparse
import json
import sys
from typing import List, Optional

import numpy as np
from loguru import logger
from pydantic import ValidationError

from src.analysis.checks import (
    SuiteResult,
    adjunction_suite,
    closed_form_trial,
    curry_suite,
    global_sections_suite,
    oracle_suite,
    random_box_module,
    stability_suite,
    symmetry_suite,
    three_way_suite,
    translation_suite,
)
from src.analysis.distance import convolution_distance, interleaving_distance
from src.analysis.stability import SimplicialComplex, stability_check
from src.config import FieldConfig, config, validate_config
from src.convolution.derived import grid_convolve_barcodes
from src.models.interval import UnsupportedIntervalError, convolve_barcodes, format_value, is_finite
from src.models.poset import GridPoset
from src.utils.logger import setup_logger
from src.utils.schemas import (
    dump_graded_barcode,
    load_barcode,
    load_complex,
    load_graded_barcode,
    load_module,
    load_vertex_function,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2


def _window(text: Optional[str]) -> Optional[GridPoset]:
    if text is None:
        return None
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise ValueError(f"--window expects 'lo,hi', got {text!r}") from exc
    return GridPoset.line(lo, hi)


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2))


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_convolve(args) -> int:
    first, second = load_barcode(args.first), load_barcode(args.second)
    try:
        result = convolve_barcodes(first, second, args.mode, args.derived)
    except UnsupportedIntervalError as e:
        logger.warning(f"⚠️ {e}; falling back to the grid oracle")
        result = grid_convolve_barcodes(first, second, args.mode, args.derived, config.field.prime)
    logger.info(f"{args.mode} convolution: {len(first)} x {len(second)} bars -> degrees {result.degrees()}")
    _emit(dump_graded_barcode(result))
    return EXIT_OK


def cmd_distance(args) -> int:
    if args.modules:
        m, n = load_module(args.first, config.field.prime), load_module(args.second, config.field.prime)
        value = interleaving_distance(m, n)
        _emit({"value": None if value is None else str(value), "bound_only": False})
        return EXIT_OK

    result = convolution_distance(load_graded_barcode(args.first), load_graded_barcode(args.second))
    _emit({
        "value": format_value(result.value),
        "bound_only": result.bound_only,
        "per_degree": [{"degree": d, "value": format_value(v)} for d, v in result.per_degree],
    })
    return EXIT_OK


def cmd_oracle(args) -> int:
    window = _window(args.window)
    modes = [args.mode] if args.mode_given else ["sheaf", "cosheaf"]
    if args.first is None:
        result = oracle_suite(args.trials, args.seed, window, modes)
    else:
        if args.second is None:
            raise ValueError("oracle needs two barcode files, or none for the random suite")
        first, second = load_barcode(args.first), load_barcode(args.second)
        ends = [int(v) for bar in list(first) + list(second)
                for v in (bar.left.value, bar.right.value) if is_finite(v)]
        if not ends:
            raise ValueError("oracle comparison needs at least one finite endpoint")
        box = GridPoset.line(min(ends) - 1, max(ends) + 1)
        result = SuiteResult("oracle")
        for i in first:
            for j in second:
                for mode in modes:
                    expected, observed = closed_form_trial(i, j, mode, box, window)
                    result.record(expected == observed, {
                        "mode": mode, "first": str(i), "second": str(j),
                        "expected": repr(expected), "observed": repr(observed),
                    })
    _emit(result.to_dict())
    return EXIT_OK if result.ok else EXIT_FAILED


def cmd_stability(args) -> int:
    given = [args.complex, args.f, args.g]
    if not any(given):
        result = stability_suite(args.trials, args.seed)
        _emit(result.to_dict())
        return EXIT_OK if result.ok else EXIT_FAILED
    if not all(given):
        raise ValueError("stability needs --complex, --f and --g together")

    complex_ = SimplicialComplex.closure(load_complex(args.complex).simplices)
    f, g = load_vertex_function(args.f), load_vertex_function(args.g)
    degrees = [args.degree] if args.degree is not None else [0, 1]
    reports = [stability_check(complex_, f, g, d) for d in degrees]
    _emit({"reports": [r.to_dict() for r in reports], "holds": all(r.holds for r in reports)})
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAILED


def cmd_adjunction(args) -> int:
    result = adjunction_suite(args.trials, args.seed, args.parameters)
    _emit(result.to_dict())
    return EXIT_OK if result.ok else EXIT_FAILED


def cmd_laws(args) -> int:
    rng = np.random.default_rng(args.seed)
    curry = curry_suite(random_box_module(rng, GridPoset.cube(0, 3, args.parameters), 3, config.field.prime))
    suites = [
        translation_suite(args.trials, args.seed),
        symmetry_suite(args.trials, args.seed),
        curry,
        global_sections_suite(args.trials, args.seed),
        three_way_suite(args.trials, args.seed),
    ]
    _emit({"suites": [s.to_dict() for s in suites]})
    return EXIT_OK if all(s.ok for s in suites) else EXIT_FAILED


COMMANDS = {
    "convolve": cmd_convolve,
    "distance": cmd_distance,
    "oracle": cmd_oracle,
    "stability": cmd_stability,
    "adjunction-check": cmd_adjunction,
    "laws": cmd_laws,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--field', type=int, help='Field characteristic p (default from CONVOLVE_FIELD_PRIME)')
    common.add_argument('--log-level', help='Override CONVOLVE_LOG_LEVEL')

    modes = argparse.ArgumentParser(add_help=False)
    group = modes.add_mutually_exclusive_group()
    group.add_argument('--sheaf', dest='mode', action='store_const', const='sheaf', help='Sheaf convolution')
    group.add_argument('--cosheaf', dest='mode', action='store_const', const='cosheaf', help='Cosheaf convolution')

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument('--seed', type=int, default=config.oracle.seed, help='Random seed')
    sampling.add_argument('--trials', type=int, default=config.oracle.trials, help='Number of random trials')

    parser = argparse.ArgumentParser(description='Sheaf and cosheaf convolution of persistence modules')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('convolve', parents=[common, modes], help='Closed-form convolution of two barcode files')
    p.add_argument('first')
    p.add_argument('second')
    p.add_argument('--derived', action='store_true', help='Include degree 1 of the derived convolution')

    p = sub.add_parser('distance', parents=[common], help='Convolution distance of two (graded) barcode files')
    p.add_argument('first')
    p.add_argument('second')
    p.add_argument('--modules', action='store_true', help='Inputs are grid module files; compute the interleaving distance')

    p = sub.add_parser('oracle', parents=[common, modes, sampling], help='Closed forms against the grid oracle')
    p.add_argument('first', nargs='?')
    p.add_argument('second', nargs='?')
    p.add_argument('--window', help="Oracle window 'lo,hi'")

    p = sub.add_parser('stability', parents=[common, sampling], help='Sublevel stability report, or the random suite')
    p.add_argument('--complex', help='Simplicial complex JSON file')
    p.add_argument('--f', help='Vertex function JSON file')
    p.add_argument('--g', help='Vertex function JSON file')
    p.add_argument('--degree', type=int, help='Homology degree (default: 0 and 1)')

    p = sub.add_parser('adjunction-check', parents=[common, sampling], help='Random adjunction dimension checks')
    p.add_argument('--parameters', type=int, default=1, help='Grid dimension of the target box')

    p = sub.add_parser('laws', parents=[common, sampling], help='Translation, symmetry, Curry, global section and distance checks')
    p.add_argument('--parameters', type=int, default=1, help='Grid dimension for the Curry check')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    args.mode_given = getattr(args, 'mode', None) is not None
    if getattr(args, 'mode', None) is None:
        args.mode = 'sheaf'

    setup_logger(args.log_level)
    try:
        if args.field is not None:
            config.field = FieldConfig(prime=args.field)
    except ValidationError as e:
        logger.error(f"❌ Invalid --field: {e.errors()[0]['msg']}")
        return EXIT_BAD_INPUT
    if not validate_config():
        logger.error("Configuration validation failed. Please check your .env file.")
        return EXIT_BAD_INPUT

    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        logger.error(f"❌ {args.command}: {e}")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
