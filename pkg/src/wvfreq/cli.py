"""Command-line entry point.

Subcommands: slope, spectrum, sensitivity, range, calibrate, simulate.
Exit codes: 0 success, 2 validation error, 3 physics-validity error,
4 numerical failure.
"""

import argparse
import sys

from . import recipes
from .config import CONFIG_FIELDS, ExperimentConfig, config_from_file, config_from_mapping
from .errors import (
    NumericalError,
    PhysicsValidityError,
    SimulationError,
    ValidationError,
)
from .units import fmt, parse_quantity

EXIT_VALIDATION = 2
EXIT_PHYSICS = 3
EXIT_NUMERICAL = 4


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat key = value config file")
    for name in CONFIG_FIELDS:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, metavar="VALUE", help=CONFIG_FIELDS[name][1])


def _build_config(args):
    base = ExperimentConfig()
    if args.config:
        base = config_from_file(args.config, base=base)
    overrides = {
        name: getattr(args, name)
        for name in CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return config_from_mapping(overrides, base=base)


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wvfreq",
        description=(
            "Simulator for weak-value-amplified optical frequency measurement: "
            "prism dispersion, Sagnac postselection, shot-noise split detection "
            "and the bandpass/peak-extraction signal chain."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("slope", help="modulation sweep and deflection-slope fit")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="CSV output path (default stdout)")

    p = sub.add_parser("spectrum", help="driven and undriven noise spectra")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="CSV output path (default stdout)")

    p = sub.add_parser("sensitivity", help="sensitivity and usable-range report")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="CSV output path (text report on stdout)")

    p = sub.add_parser("range", help="usable tuning range for the kick bound")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="CSV output path (default stdout)")

    p = sub.add_parser("calibrate", help="fit the scan-to-frequency calibration")
    p.add_argument("positions", help="file of observed line positions, one per line")
    p.add_argument(
        "--references",
        help="reference-line table (default: packaged Rb D2 set)",
    )
    p.add_argument(
        "--propagate",
        help="also propagate the slope error onto this frequency (e.g. 129kHz)",
    )
    p.add_argument("-o", "--output", help="report output path (default stdout)")

    p = sub.add_parser("simulate", help="dump one raw detector time series")
    _add_config_flags(p)
    p.add_argument("--dnu-peak", default="0Hz", help="modulation amplitude (e.g. 7.4MHz)")
    p.add_argument("--duration", default="2.5s", help="record length (whole cycles)")
    p.add_argument("-o", "--output", help="CSV output path (default stdout)")

    return parser


def _dispatch(args):
    if args.command == "slope":
        result = recipes.run_slope_sweep(_build_config(args))
        _write(recipes.slope_sweep_csv(result), args.output)
        return 0
    if args.command == "spectrum":
        freqs, driven, undriven, meta = recipes.run_spectrum_pair(_build_config(args))
        _write(recipes.spectrum_pair_csv(freqs, driven, undriven, meta), args.output)
        return 0
    if args.command == "sensitivity":
        report, meta = recipes.run_sensitivity(_build_config(args))
        sys.stdout.write(recipes.sensitivity_text(report))
        if args.output:
            _write(recipes.sensitivity_csv(report, meta), args.output)
        return 0
    if args.command == "range":
        span, meta = recipes.run_range(_build_config(args))
        text = "".join(f"# {k} = {fmt(v)}\n" for k, v in meta.items())
        text += "usable_range_hz,clamped\n"
        text += f"{span.frequency_span:.17g},{int(span.clamped)}\n"
        _write(text, args.output)
        return 0
    if args.command == "calibrate":
        probe = parse_quantity(args.propagate, "frequency") if args.propagate else None
        _, text = recipes.run_calibrate(args.positions, args.references, probe)
        _write(text, args.output)
        return 0
    if args.command == "simulate":
        config = _build_config(args)
        dnu_peak = parse_quantity(args.dnu_peak, "frequency")
        duration = parse_quantity(args.duration, "time")
        _write(recipes.run_simulate(config, dnu_peak, duration), args.output)
        return 0
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PhysicsValidityError as exc:
        print(f"physics validity error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SimulationError as exc:  # base-class fallback
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
