"""Command-line entry point: ``copdep <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 input failed validation,
4 a property suite found a violation (or could not find the expected one).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from functools import reduce

import numpy as np

from .algebra import star
from .copulas import (
    PI,
    M,
    W,
    Checkerboard,
    CheckerboardCopula,
    Copula,
    DomainError,
    GridConfig,
    InvalidCopulaError,
    Tent,
    convex_mix,
    flip_y,
    read_checkerboard,
    transpose,
    write_checkerboard,
)
from .estimation import (
    RNG_NAME,
    DegenerateSampleError,
    SampleSet,
    default_resolution,
    empirical_checkerboard,
    read_samples,
    sample_from,
    write_samples,
)
from .measures import MeasureError, measure, parse_measure
from .props import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_PROPERTY = 0, 2, 3, 4
DEFAULT_GRID = 512


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Copula argument grammar
# ---------------------------------------------------------------------------


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def parse_copula(text: str, normalize: bool = False) -> Copula:
    """Parse pi | m | w | tent:<theta> | file:<path> | transpose(<spec>) |
    flipy(<spec>) | mix:<w1>,<spec1>;<w2>,<spec2>..."""
    t = text.strip()
    low = t.lower()
    if low in ("pi", "m", "w"):
        return {"pi": PI, "m": M, "w": W}[low]
    if low.startswith("tent:"):
        try:
            theta = float(t[5:])
        except ValueError:
            raise UsageError(f"bad tent parameter in {text!r}") from None
        try:
            return Tent(theta)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    if low.startswith("file:"):
        path = t[5:]
        try:
            return Checkerboard(read_checkerboard(path, normalize=normalize))
        except OSError as exc:
            raise UsageError(f"cannot read {path!r}: {exc.strerror or exc}") from None
    for name, fn in (("transpose", transpose), ("flipy", flip_y)):
        if low.startswith(name + "(") and t.endswith(")"):
            return fn(parse_copula(t[len(name) + 1 : -1], normalize))
    if low.startswith("mix:"):
        weights, parts = [], []
        for item in _split_top(t[4:], ";"):
            w, sep, spec = item.partition(",")
            if not sep:
                raise UsageError(f"mix component {item!r} is not <weight>,<spec>")
            try:
                weights.append(float(w))
            except ValueError:
                raise UsageError(f"bad mix weight {w!r}") from None
            parts.append(parse_copula(spec, normalize))
        try:
            return convex_mix(weights, parts)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"unrecognized copula {text!r}")


def _board_size(c) -> int | None:
    return c.n if isinstance(c, (Checkerboard, CheckerboardCopula)) else None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _directions(d: str) -> list[str]:
    return ["xy", "yx"] if d == "both" else [d]


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_measure(args) -> int:
    spec = parse_measure(args.measure)
    dirs = _directions(args.direction)
    out = {"measure": spec.ident, "direction": args.direction}
    reports = {}
    if args.copula is not None:
        c = parse_copula(args.copula, args.normalize)
        cfg = GridConfig(quad_n=args.grid or DEFAULT_GRID)
        for d in dirs:
            reports[d] = measure(c, spec.with_direction(d), cfg)
        out["source"] = args.copula
    else:
        try:
            s = read_samples(args.input)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input!r}: {exc.strerror or exc}") from None
        n = args.grid or default_resolution(s.m)
        board = Checkerboard(empirical_checkerboard(s, n))
        for d in dirs:
            reports[d] = measure(board, spec.with_direction(d))
        out.update(source=args.input, m=s.m, n=n, generator=RNG_NAME)
        if args.bootstrap:
            out["bootstrap"] = args.bootstrap
            out["bootstrap_stderr"] = _bootstrap(s, spec, n, dirs, args.bootstrap, args.seed)
            out["seed"] = args.seed
    first = reports[dirs[0]]
    if len(dirs) == 1:
        out.update(value=first.value, raw_value=first.raw_value)
    else:
        out["values"] = {d: r.value for d, r in reports.items()}
        out["raw_values"] = {d: r.raw_value for d, r in reports.items()}
    out.update(grid=first.grid, path=first.path)
    if "bootstrap_stderr" in out and len(dirs) == 1:
        out["bootstrap_stderr"] = out["bootstrap_stderr"][dirs[0]]
    _emit(out)
    return EXIT_OK


def _bootstrap(s: SampleSet, spec, n, dirs, reps, seed) -> dict:
    rng = np.random.Generator(np.random.PCG64(seed))
    vals = {d: [] for d in dirs}
    for _ in range(reps):
        idx = rng.integers(0, s.m, s.m)
        board = Checkerboard(empirical_checkerboard(SampleSet(s.x[idx], s.y[idx]), n))
        for d in dirs:
            vals[d].append(measure(board, spec.with_direction(d)).value)
    return {d: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for d, v in vals.items()}


def cmd_star(args) -> int:
    a = parse_copula(args.left, args.normalize)
    b = parse_copula(args.right, args.normalize)
    sizes = [k for k in (_board_size(a), _board_size(b)) if k]
    grid = args.grid or (min(reduce(math.lcm, sizes), DEFAULT_GRID) if sizes else DEFAULT_GRID)
    both = len(sizes) == 2
    result = star(a, b, GridConfig(quad_n=grid))
    write_checkerboard(result.board, args.out)
    _emit({"out": args.out, "n": result.n, "path": "exact-checkerboard" if both else "quadrature"})
    return EXIT_OK


def cmd_props(args) -> int:
    results = run_suite(args.suite, args.trials, args.n, args.seed)
    ok = True
    for r in results:
        ok &= r.ok
        margin = "n/a" if not math.isfinite(r.margin) else f"{r.margin:.3e}"
        print(f"{r.suite}: {r.status}  checks={r.checks}  violations={r.violations}  worst_margin={margin}")
        for note in r.notes:
            print(f"    {note}")
    return EXIT_OK if ok else EXIT_PROPERTY


def tent_table(thetas, grid: int = DEFAULT_GRID) -> list[dict]:
    cfg = GridConfig(quad_n=grid)
    rows = []
    for th in thetas:
        c = Tent(th)
        got = {
            "tau1": measure(c, "tau1", cfg).value,
            "tau2": measure(c, "tau2", cfg).value,
            "tau1_t": measure(c, parse_measure("tau1", "yx"), cfg).value,
            "tau2_t": measure(c, parse_measure("tau2", "yx"), cfg).value,
        }
        want = {
            "tau1": 1.0,
            "tau2": 1.0,
            "tau1_t": th**2 + (1 - th) ** 2,
            "tau2_t": math.sqrt(3 * (th - 0.5) ** 2 + 0.25),
        }
        rows.append({"theta": th, "value": got, "target": want, "error": {k: abs(got[k] - want[k]) for k in got}})
    return rows


def cmd_table(args) -> int:
    try:
        thetas = [float(x) for x in args.theta.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad theta list {args.theta!r}") from None
    bad = [t for t in thetas if not 0.0 <= t <= 1.0]
    if bad or not thetas:
        raise UsageError(f"theta must lie in [0, 1], got {bad or args.theta!r}")
    rows = tent_table(thetas, args.grid)
    cols = ("tau1", "tau2", "tau1_t", "tau2_t")
    head = ["theta"] + [f"{k}" for k in cols] + [f"{k}*" for k in cols] + ["max_err"]
    print(f"# tent copula, grid {args.grid}; tau1_t = tau1 of the transpose, * = closed form")
    print("  ".join(f"{h:>9}" for h in head))
    for r in rows:
        cells = [r["theta"]] + [r["value"][k] for k in cols] + [r["target"][k] for k in cols]
        err = max(r["error"].values())
        print("  ".join(f"{x:9.6f}" for x in cells) + f"  {err:9.2e}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.m < 1:
        raise UsageError("-m must be a positive integer")
    c = parse_copula(args.copula, args.normalize)
    s = sample_from(c, args.m, seed=args.seed)
    write_samples(s, args.out or sys.stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="copdep", description="Copula-based nonsymmetric dependence measures.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="compute a dependence measure as JSON")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="two-column CSV of paired samples")
    src.add_argument("--copula", help="copula spec, e.g. tent:0.3 or transpose(file:b.cb)")
    m.add_argument("--measure", required=True, help="measure id, e.g. tau1, ns_renyi:1.5, gns_shannon:0")
    m.add_argument("--direction", choices=("xy", "yx", "both"), default="both")
    m.add_argument("--grid", type=_positive, help="quadrature points (copula) or board size (data)")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--bootstrap", type=int, default=0, metavar="K", help="bootstrap replicates (data only)")
    m.add_argument("--normalize", action="store_true", help="Sinkhorn-normalize checkerboard files")
    m.set_defaults(func=cmd_measure)

    s = sub.add_parser("star", help="write the * product of two copulas as a checkerboard file")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.add_argument("--grid", type=_positive)
    s.add_argument("--out", required=True)
    s.add_argument("--normalize", action="store_true")
    s.set_defaults(func=cmd_star)

    pr = sub.add_parser("props", help="run seeded property suites")
    pr.add_argument("--suite", choices=SUITES + ("all",), default="all")
    pr.add_argument("--trials", type=_positive, default=1000)
    pr.add_argument("--n", type=_positive, default=16)
    pr.add_argument("--seed", type=int)
    pr.set_defaults(func=cmd_props)

    t = sub.add_parser("table", help="tent copula values against their closed forms")
    t.add_argument("--theta", default="0,0.25,0.5,0.75,1")
    t.add_argument("--grid", type=_positive, default=DEFAULT_GRID)
    t.set_defaults(func=cmd_table)

    sa = sub.add_parser("sample", help="draw pairs from a copula by conditional inversion")
    sa.add_argument("--copula", required=True)
    sa.add_argument("-m", type=int, required=True)
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--out")
    sa.add_argument("--normalize", action="store_true")
    sa.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "bootstrap", 0) and args.copula is not None:
        parser.print_usage(sys.stderr)
        print("copdep: error: --bootstrap applies to --input data only", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "bootstrap", 0) < 0:
        print("copdep: error: --bootstrap must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, MeasureError, DomainError) as exc:
        print(f"copdep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidCopulaError, DegenerateSampleError) as exc:
        print(f"copdep: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
