"""Command-line front end: ``toeplitz-lab <command> [options]``.

Commands
--------
berezin         Berezin transform of a measure on a grid (GridReport).
carleson        Carleson ratios, disk-condition verdicts and Berezin extrema.
tail            Grid supremum of the tail functional for one or more radii.
lattice         Generate and certify a square (Fock) or ring (Bergman) lattice.
spectrum        Invertibility profile (lambda_min, lambda_max per degree).
counterexample  Bundled report for the ``bergman`` or ``fock`` lattice measure.
verify          Run the acceptance suite and print a pass/fail table.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import dataclass

from . import acceptance
from .berezin import berezin_extrema, tail_sup
from .carleson import classify, default_grid
from .lattice import hyperbolic_lattice, lattice_weights, recheck_hyperbolic, square_lattice
from .measure import MeasureSpecError, SpaceTag, measure_from_json
from .quadrature import QuadratureSpec
from .report import emit_report
from .toeplitz import invertibility_profile

DEFAULT_FORMAT = {
    "berezin": "csv",
    "carleson": "json",
    "tail": "csv",
    "lattice": "json",
    "spectrum": "csv",
    "counterexample": "json",
    "verify": "json",
}


class UsageError(Exception):
    pass


def _parse_list(text, cast=float):
    try:
        return [cast(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def _load_measure(args):
    if args.measure is None:
        raise UsageError(f"{args.command} needs --measure")
    text = args.measure
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read measure file: {e}") from None
    return measure_from_json(text, space=args.space)


def _quad(args):
    return QuadratureSpec(tolerance=args.tol) if args.tol is not None else QuadratureSpec()


@dataclass
class LatticeReport:
    summary: dict
    points: object
    weights: object

    def to_json(self):
        return self.summary

    def csv_rows(self):
        yield ("re", "im", "weight")
        for p, w in zip(self.points, self.weights):
            yield (float(p.real), float(p.imag), float(w))


@dataclass
class TailSweep:
    space: str
    grid: dict
    radii: list
    sups: list
    argmax: list

    def to_json(self):
        return {"space": self.space, "grid": self.grid, "radii": self.radii, "tail_sup": self.sups, "argmax": [[z.real, z.imag] for z in self.argmax]}

    def csv_rows(self):
        yield ("radius", "tail_sup", "argmax_re", "argmax_im")
        for r, s, z in zip(self.radii, self.sups, self.argmax):
            yield (r, s, z.real, z.imag)


@dataclass
class TextReport:
    data: dict

    def to_json(self):
        return self.data


def cmd_berezin(args):
    mu = _load_measure(args)
    grid = default_grid(mu, args.grid_density, cell=args.r)
    return berezin_extrema(mu, grid, _quad(args))


def cmd_carleson(args):
    mu = _load_measure(args)
    grid = default_grid(mu, args.grid_density, cell=args.r if mu.space is SpaceTag.FOCK else None)
    return classify(mu, args.r, grid, quad=_quad(args))


def cmd_tail(args):
    mu = _load_measure(args)
    radii = _parse_list(args.r_list) if args.r_list else ([0.5] if mu.space is SpaceTag.BERGMAN else [2.0])
    n = args.grid_density if args.grid_density is not None else (16 if mu.space is SpaceTag.BERGMAN else 21)
    grid = default_grid(mu, n, cell=args.cell)
    reps = [tail_sup(mu, r, grid, _quad(args)) for r in radii]
    return TailSweep(mu.space.value, grid.to_json(), radii, [g.sup_value for g in reps], [g.argmax for g in reps])


def cmd_lattice(args):
    space = SpaceTag(args.space or "bergman")
    if space is SpaceTag.BERGMAN:
        R = 7.0 if args.r is None else args.r
        seq = hyperbolic_lattice(R, 3 if args.rings is None else args.rings)
        summary = dict(seq.summary())
        summary["recheck_separation_beta"], summary["recheck_covering_beta"] = recheck_hyperbolic(seq)
    else:
        seq = square_lattice(3.5 if args.r is None else args.r, 12 if args.window is None else args.window)
        summary = seq.summary()
    return LatticeReport(summary, seq.points, lattice_weights(seq))


def cmd_spectrum(args):
    mu = _load_measure(args)
    degrees = _parse_list(args.degrees, int) if args.degrees else [5, 10, 20]
    return invertibility_profile(mu, degrees, _quad(args))


def cmd_counterexample(args):
    if args.which == "fock":
        kw = {}
        if args.r is not None:
            kw["r"] = args.r
        if args.window is not None:
            kw["window"] = args.window
        if args.degrees:
            kw["degrees"] = _parse_list(args.degrees, int)
        if args.grid_density is not None:
            kw["grid_n"] = args.grid_density
        return TextReport(acceptance.fock_counterexample_report(**kw))
    kw = {}
    if args.r is not None:
        kw["R"] = args.r
    if args.rings is not None:
        kw["rings"] = args.rings
    if args.degrees:
        kw["degrees"] = _parse_list(args.degrees, int)
    if args.grid_density is not None:
        kw["grid"] = (args.grid_density, 2 * args.grid_density)
    rep = acceptance.bergman_counterexample_report(**kw)
    rep["control"] = acceptance.sampling_control_report(degrees=kw.get("degrees", acceptance.SAMPLING_DEGREES))
    return TextReport(rep)


def cmd_verify(args):
    samples = 1_000_000 if args.samples is None else args.samples
    seed = 42 if args.seed is None else args.seed
    results = acceptance.run_all(seed=seed, samples=samples, emit=lambda s: print(s, file=sys.stderr))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=sys.stderr)
    data = {"seed": seed, "samples": samples, "passed": passed == len(results), "results": [_without_time(r.to_json()) for r in results]}
    return TextReport(data), (0 if passed == len(results) else 1)


def _without_time(d):
    d = dict(d)
    d.pop("seconds", None)
    return d


COMMANDS = {
    "berezin": cmd_berezin,
    "carleson": cmd_carleson,
    "tail": cmd_tail,
    "lattice": cmd_lattice,
    "spectrum": cmd_spectrum,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


def _common(p):
    p.add_argument("--space", choices=[s.value for s in SpaceTag], help="bergman or fock")
    p.add_argument("--measure", help="measure spec as inline JSON or @path")
    p.add_argument("--r", type=float, help="disk radius r (Carleson), lattice spacing or R")
    p.add_argument("--window", type=int, help="square lattice half-width M (Fock)")
    p.add_argument("--rings", type=int, help="ring count (Bergman lattice)")
    p.add_argument("--degrees", help="comma-separated degrees, e.g. 10,20,40")
    p.add_argument("--grid-density", dest="grid_density", type=int, help="grid resolution")
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--output", default="-", help="output path (default stdout)")
    p.add_argument("--format", choices=["json", "csv"], help="output format")


def build_parser():
    parser = argparse.ArgumentParser(prog="toeplitz-lab", description="Toeplitz operators with measure symbols on Bergman and Fock spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "counterexample":
            p.add_argument("which", choices=["bergman", "fock"])
        if name == "tail":
            p.add_argument("--radii", dest="r_list", help="comma-separated tail radii")
            p.add_argument("--cell", type=float, help="Fock: side of the probe cell [0, cell]^2")
        if name == "verify":
            p.add_argument("--samples", type=int, help="Monte Carlo sample count (default 1e6)")
        _common(p)
    return parser


def _context(exc):
    """Deepest package module in the traceback, for error messages."""
    mod = None
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        name = frame.f_globals.get("__name__", "")
        if name.startswith("toeplitz_lab."):
            mod = name.split(".", 1)[1]
    return mod or "cli"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "tail" and args.r is not None and not args.r_list:
        args.r_list = str(args.r)
    fmt = args.format or DEFAULT_FORMAT[args.command]
    try:
        out = COMMANDS[args.command](args)
        status = 0
        if isinstance(out, tuple):
            out, status = out
        if fmt == "csv" and not hasattr(out, "csv_rows"):
            raise UsageError(f"{args.command} has no CSV form; use --format json")
        emit_report(out, fmt, args.output)
        return status
    except MeasureSpecError as e:
        where = f" (at {e.pointer})" if e.pointer else ""
        print(f"error: invalid measure spec: {e}{where}", file=sys.stderr)
        return 2
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, OverflowError) as e:
        print(f"error [{_context(e)}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
