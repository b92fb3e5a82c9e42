"""Command-line entry point.

Exit status: 0 on success, 2 on invalid input, 3 when a solver fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import duality
from .errors import SolverFailure, ValidationError
from .gpt import StateSpaceModel
from .interferometer import CountsTable, sample_counts
from .ontic import nc_model_feasibility
from .orbit import OrbitQuadruple, check_orbit
from .pipeline import experiment, ideal_report, run_pipeline, secondary_from_fit
from .secondary import witness_report
from .tomography import TomographyFit, fit_gpt

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3

SPACES = {
    "disc": StateSpaceModel.disc,
    "diamond": StateSpaceModel.diamond,
    "square": StateSpaceModel.square,
    "polygon6": lambda: StateSpaceModel.regular_polygon(6),
    "polygon8": lambda: StateSpaceModel.regular_polygon(8),
}


def _unit(name):
    def check(text):
        v = float(text)
        if not (0.0 <= v <= 1.0) or math.isnan(v):
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1]")
        return v
    return check


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc.msg}") from None


def _load(cls, data, what):
    try:
        return cls.from_json(data)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValidationError(f"malformed {what}: {exc!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def cmd_curves(args) -> int:
    if args.grid < 2:
        raise ValidationError("grid must be at least 2")
    names = args.spaces.split(",")
    unknown = [n for n in names if n not in SPACES]
    if unknown:
        raise ValidationError(f"unknown state spaces: {', '.join(unknown)}")
    curves = {n: duality.tradeoff_sweep(SPACES[n](), args.grid) for n in names}
    combined = duality.curves_to_csv([duality.tradeoff_sweep(StateSpaceModel.disc(), args.grid),
                                      duality.nc_line(args.grid)])
    if args.out is None:
        _emit(combined, None)
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for n, c in curves.items():
        (out / f"curve_{n}.csv").write_text(duality.curves_to_csv([c]), encoding="utf-8")
    (out / "tradeoff.csv").write_text(combined, encoding="utf-8")
    print(f"wrote {len(curves) + 1} files to {out}")
    return EXIT_OK


def cmd_witness(args) -> int:
    rep = ideal_report(args.r, args.noise)
    if args.json:
        _emit(rep.dumps(), args.out)
    else:
        _emit(f"reflectivity r = {args.r}, depolarizing p = {args.noise}\n" + rep.summary(), args.out)
    return EXIT_OK


def cmd_orbit_check(args) -> int:
    q = _load(OrbitQuadruple, _read_json(args.input), "quadruple file")
    rep = check_orbit(q, args.tol)
    _emit(rep.dumps(), args.out)
    return EXIT_OK


def cmd_nc_model(args) -> int:
    q = _load(OrbitQuadruple, _read_json(args.input), "quadruple file")
    res = nc_model_feasibility(q, args.tol)
    _emit(res.dumps(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ids, states, meas = experiment(args.r, args.noise, args.eps)
    table = sample_counts(states, meas, args.shots, args.seed, ids)
    _emit(table.dumps() if args.format == "json" else table.to_csv(), args.out)
    return EXIT_OK


def _parse_ranks(text):
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise ValidationError("ranks must be a comma-separated list of integers") from None


def cmd_tomography(args) -> int:
    if args.input.endswith(".json"):
        table = _load(CountsTable, _read_json(args.input), "counts file")
    else:
        try:
            table = CountsTable.from_csv(_read(args.input))
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValidationError(f"malformed counts file: {exc!r}") from None
    fit = fit_gpt(table, _parse_ranks(args.ranks), args.seed, args.restarts)
    _emit(fit.dumps(), args.out)
    return EXIT_OK


def cmd_secondary(args) -> int:
    fit = _load(TomographyFit, _read_json(args.fit), "fit file")
    sq = secondary_from_fit(fit, args.m, args.m_prime)
    rep = witness_report(sq)
    _emit(rep.dumps() if args.json else rep.summary(), args.out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    res = run_pipeline(args.r, args.shots, args.noise, args.seed, args.eps, args.restarts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in res.artifacts().items():
        (out / name).write_text(text, encoding="utf-8")
    if args.json:
        print(json.dumps(res.report_json(), indent=2))
    else:
        print(f"rank {res.fit.rank}, recovery error {res.recovery_error:.4g}, "
              f"ideal V+P {res.ideal_witness:.6f}")
        print(res.report.summary())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wpduality",
                                description="Wave-particle duality as a contextuality witness.")
    p.add_argument("--json", action="store_true", help="machine-readable output and errors")
    p.add_argument("-v", "--verbose", action="store_true")
    # --json is also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    c = add("curves", help="tradeoff curves V(P) per state space")
    c.add_argument("--grid", type=int, default=101)
    c.add_argument("--spaces", default="disc,diamond,square,polygon6")
    c.add_argument("--out", help="output directory (default: combined CSV on stdout)")
    c.set_defaults(func=cmd_curves)

    c = add("witness", help="ideal orbit at reflectivity r")
    c.add_argument("--r", type=_unit("r"), required=True)
    c.add_argument("--noise", type=_unit("noise"), default=0.0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_witness)

    c = add("orbit-check", help="check orbit conditions of a quadruple")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--tol", type=_positive_float, default=1e-9)
    c.add_argument("--out")
    c.set_defaults(func=cmd_orbit_check)

    c = add("nc-model", help="noncontextual model feasibility for a quadruple")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--tol", type=_positive_float, default=1e-9)
    c.add_argument("--out")
    c.set_defaults(func=cmd_nc_model)

    c = add("simulate", help="sample outcome counts")
    c.add_argument("--r", type=_unit("r"), required=True)
    c.add_argument("--shots", type=_positive_int, required=True)
    c.add_argument("--seed", type=_seed, required=True)
    c.add_argument("--noise", type=_unit("noise"), default=0.0)
    c.add_argument("--eps", type=_unit("eps"), default=0.0)
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--out")
    c.set_defaults(func=cmd_simulate)

    c = add("tomography", help="fit GPT states and effects to counts")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--ranks", help="comma-separated rank candidates")
    c.add_argument("--seed", type=_seed, default=0)
    c.add_argument("--restarts", type=_positive_int, default=3)
    c.add_argument("--out")
    c.set_defaults(func=cmd_tomography)

    c = add("secondary", help="secondary quadruple and witness from a fit")
    c.add_argument("--fit", required=True)
    c.add_argument("--m", default="Z", help="label of the which-way measurement")
    c.add_argument("--m-prime", default="X", help="label of the which-phase measurement")
    c.add_argument("--out")
    c.set_defaults(func=cmd_secondary)

    c = add("pipeline", help="simulate, fit, build secondary states, report")
    c.add_argument("--r", type=_unit("r"), default=0.75)
    c.add_argument("--shots", type=_positive_int, default=100_000)
    c.add_argument("--noise", type=_unit("noise"), default=0.05)
    c.add_argument("--eps", type=_unit("eps"), default=0.0)
    c.add_argument("--seed", type=_seed, required=True)
    c.add_argument("--restarts", type=_positive_int, default=2)
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        code, kind = EXIT_INVALID, "invalid input"
        err = exc
    except SolverFailure as exc:
        code, kind = EXIT_SOLVER, "solver failure"
        err = exc
    if args.json:
        print(json.dumps({"error": type(err).__name__, "kind": kind, "message": str(err)}),
              file=sys.stderr)
    else:
        print(f"wpduality: {kind}: {err}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
