"""Command-line interface.

Exit codes: 0 success, 1 negative finding, 2 parse/input failure,
3 unverifiable inverse or not Hénon–Sibony, 4 unsolved or over budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .automorphism import InverseMismatch, NotHenonSibony, PolyMap, iterate, regularity_report
from .dsl import MapDefinition, ParseError, find, load, print_definition
from .green import GreenOptions, NotRegular, SliceSpec, green_plus, raster_slice, write_csv, write_pgm
from .poly import Budget, BudgetExceeded
from .symmetry import SearchBudgetExceeded, compute_N, shared_iterate_search

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PARSE = 2
EXIT_NOT_HS = 3
EXIT_UNSOLVED = 4


@dataclass(frozen=True)
class RunConfig:
    escape_radius: float = 1e4
    max_iter: int = 200
    tolerance: float = 1e-6
    degree_budget: int = 256
    term_budget: int = 10**6
    v_cap: float = 1.0
    thread_count: int = 1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def budget(self) -> Budget:
        return Budget(self.degree_budget, self.term_budget)

    @property
    def green_options(self) -> GreenOptions:
        return GreenOptions(self.escape_radius, self.max_iter)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            escape_radius=args.radius,
            max_iter=args.max_iter,
            tolerance=args.tol,
            degree_budget=args.degree_budget,
            term_budget=args.term_budget,
            v_cap=args.v_cap,
            thread_count=args.threads,
        )


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def parse_complex(text: str) -> complex:
    """Accept ``1.5``, ``-2+0.5i``, ``3j`` and similar."""
    t = text.strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    try:
        return complex(t)
    except ValueError:
        raise CliError(f"not a complex number: {text!r}", EXIT_PARSE) from None


def parse_vector(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(p) for p in text.split(","))


def load_map(path: str, name: str) -> PolyMap:
    try:
        defs = load(path)
        return find(defs, name).to_polymap()
    except ParseError as exc:
        raise CliError(f"{path}:{exc}", EXIT_PARSE) from None
    except (OSError, KeyError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True) if as_json else text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map)
    try:
        report = regularity_report(F, cfg.budget)
    except (InverseMismatch, NotHenonSibony) as exc:
        raise CliError(str(exc), EXIT_NOT_HS) from None
    _emit(report.to_dict(), args.json, report.to_text())
    return EXIT_OK


def cmd_symmetries(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map)
    if F.inverse is None:
        raise CliError("map has no inverse", EXIT_NOT_HS)
    family = compute_N(F, max_rounds=args.rounds, budget=cfg.budget)
    print(json.dumps(family.to_json(), indent=2, sort_keys=True))
    if family.status != "solved" or not family.stabilized:
        residuals = family.to_json()["unresolved"] or family.to_json()["residual"]
        print(f"unsolved after {family.rounds} rounds; residuals:", file=sys.stderr)
        for r in residuals:
            print(f"  {r} = 0", file=sys.stderr)
        return EXIT_UNSOLVED
    return EXIT_OK


def cmd_iterate(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map)
    n = args.n
    if n < 0:
        if F.inverse is None:
            raise CliError("negative iterate needs an inverse", EXIT_NOT_HS)
        F, n = F.inverted(), -n
    Fn = iterate(F, n, cfg.budget)
    names = list(F.variable_names())
    name = f"{args.map}_{args.n}".replace("-", "m")
    definition = MapDefinition(name, tuple(names), Fn.components)
    doc = {"n": args.n, "degree": Fn.degree(), "components": [c.to_string(names) for c in Fn.components]}
    _emit(doc, args.json, print_definition(definition))
    return EXIT_OK


def cmd_shared_iterate(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map1)
    G = load_map(args.file, args.map2)
    found = shared_iterate_search(F, G, args.nmax, cfg.budget)
    doc = {"found": found is not None, "n": found and found[0], "m": found and found[1], "nmax": args.nmax}
    text = f"({found[0]},{found[1]})" if found else f"none with n, m <= {args.nmax}"
    _emit(doc, args.json, text)
    return EXIT_OK if found else EXIT_NEGATIVE


def cmd_green(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map)
    if args.minus:
        if F.inverse is None:
            raise CliError("G^- needs an inverse", EXIT_NOT_HS)
        F = F.inverted()
    z = tuple(parse_complex(p) for p in args.point)
    if len(z) != F.k:
        raise CliError(f"point has {len(z)} coordinates, map has {F.k}", EXIT_PARSE)
    try:
        est = green_plus(F, F.degree(), z, cfg.green_options)
    except NotRegular as exc:
        raise CliError(str(exc), EXIT_NOT_HS) from None
    doc = {
        "value": est.value,
        "iterations_used": est.iterations_used,
        "escaped": est.escaped,
        "error_bound": est.error_bound,
        "within_tolerance": est.error_bound <= cfg.tolerance,
    }
    text = "\n".join(f"{k} = {str(v).lower() if isinstance(v, bool) else v!r}" for k, v in doc.items())
    _emit(doc, args.json, text)
    return EXIT_OK


def cmd_render(args, cfg: RunConfig) -> int:
    F = load_map(args.file, args.map)
    k = F.k
    base = parse_vector(args.base) if args.base else (0j,) * k
    dir_u = parse_vector(args.dir_u) if args.dir_u else tuple(1 + 0j if j == 0 else 0j for j in range(k))
    dir_v = parse_vector(args.dir_v) if args.dir_v else tuple(1 + 0j if j == 1 else 0j for j in range(k))
    try:
        window = tuple(float(x) for x in args.window.split(","))
        if len(window) != 4:
            raise ValueError("window needs u0,u1,v0,v1")
        spec = SliceSpec(base, dir_u, dir_v, window, (args.width, args.height))
        if len(base) != k:
            raise ValueError(f"slice vectors have {len(base)} coordinates, map has {k}")
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    try:
        grid = raster_slice(F, F.degree(), spec, cfg.green_options, cfg.thread_count)
    except NotRegular as exc:
        raise CliError(str(exc), EXIT_NOT_HS) from None
    out = Path(args.out)
    pgm, csv = out.with_suffix(".pgm"), out.with_suffix(".csv")
    write_pgm(grid, pgm, cfg.v_cap)
    write_csv(grid, csv)
    doc = {"pgm": str(pgm), "csv": str(csv), "width": args.width, "height": args.height,
           "escaped_fraction": float(grid.escaped.mean())}
    _emit(doc, args.json, f"wrote {pgm} and {csv}")
    return EXIT_OK


def cmd_verify_paper(args, cfg: RunConfig) -> int:
    from .paper_suite import run_all

    results = run_all()
    if args.json:
        print(json.dumps([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results], indent=2))
    else:
        for r in results:
            print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    d = RunConfig()
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--radius", type=float, default=d.escape_radius, help="escape radius R")
    common.add_argument("--max-iter", type=int, default=d.max_iter, help="iteration cap N")
    common.add_argument("--tol", type=float, default=d.tolerance, help="target error bound")
    common.add_argument("--degree-budget", type=int, default=d.degree_budget)
    common.add_argument("--term-budget", type=int, default=d.term_budget)
    common.add_argument("--v-cap", type=float, default=d.v_cap, help="value mapped to white in PGM output")
    common.add_argument("--threads", type=int, default=d.thread_count)

    parser = argparse.ArgumentParser(prog="henon-sibony", description="Hénon–Sibony map toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="regularity report")
    p.add_argument("file")
    p.add_argument("map")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("symmetries", parents=[common], help="affine symmetry family N")
    p.add_argument("file")
    p.add_argument("map")
    p.add_argument("--rounds", type=int, default=8)
    p.set_defaults(func=cmd_symmetries)

    p = sub.add_parser("iterate", parents=[common], help="print F^n (negative n uses the inverse)")
    p.add_argument("file")
    p.add_argument("map")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("shared-iterate", parents=[common], help="search F^n = G^m")
    p.add_argument("file")
    p.add_argument("map1")
    p.add_argument("map2")
    p.add_argument("--nmax", type=int, default=3)
    p.set_defaults(func=cmd_shared_iterate)

    p = sub.add_parser("green", parents=[common], help="Green function estimate at a point")
    p.add_argument("file")
    p.add_argument("map")
    p.add_argument("point", nargs="+", help="coordinates, e.g. 1 0.5+2i")
    p.add_argument("--minus", action="store_true", help="use the inverse map (G^-)")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("render", parents=[common], help="rasterize G^+ on a 2-D slice")
    p.add_argument("file")
    p.add_argument("map")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--window", default="-3,3,-3,3", help="u0,u1,v0,v1")
    p.add_argument("--base", default=None, help="comma-separated base point (default origin)")
    p.add_argument("--dir-u", default=None, help="comma-separated direction (default e1)")
    p.add_argument("--dir-v", default=None, help="comma-separated direction (default e2)")
    p.add_argument("--out", default="slice", help="output prefix; writes PREFIX.pgm and PREFIX.csv")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify-paper", parents=[common], help="built-in reproduction checks")
    p.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SearchBudgetExceeded as exc:
        print(f"error: {exc}; unexplored pairs: {exc.frontier}", file=sys.stderr)
        return EXIT_UNSOLVED
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
