"""Command-line entry point: ``faabruno <subcommand> ...``.

Exit codes: 0 on success, 1 when a verification fails, 2 on a usage or
dimension error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import free_algebra, partitions, strict_diff, verify
from .chain_rule import compose_towers
from .errors import BasePointError, DimensionError, OrderError, RingMismatchError
from .functions import parse_point, parse_spec
from .multilinear import FLOAT, RATIONAL, tower_to_dict

PRNG_NOTE = (
    "Random trials use the PCG64 generator (128-bit LCG state, XSL-RR 64-bit output) "
    "as in numpy.random.PCG64, seeded through SeedSequence([seed, stream]) with a fixed "
    "stream id per suite."
)

USAGE_ERRORS = (DimensionError, RingMismatchError, BasePointError, OrderError,
                partitions.CapacityError, ValueError, OSError, json.JSONDecodeError)


class UsageError(Exception):
    pass


def _load_spec(path: str, flag: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"{flag}: cannot read {path}: {e.strerror}") from None
    try:
        return parse_spec(json.loads(text))
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{flag}: invalid function spec in {path}: {e}") from None


def _looks_rational(text: str) -> bool:
    return all("." not in p and "e" not in p.lower() for p in text.split(","))


def _point(text: str, node, exact: bool, flag: str = "--x"):
    ring = RATIONAL if exact and _looks_rational(text) else FLOAT
    try:
        x = parse_point(text, ring)
    except ValueError as e:
        raise UsageError(f"{flag}: {e}") from None
    if len(x) != node.in_dim:
        raise DimensionError(f"{flag}: point has {len(x)} coordinates, map expects {node.in_dim}")
    return x, ring


def cmd_bell(args) -> int:
    print(partitions.bell(args.n))
    return 0


def cmd_partitions(args) -> int:
    blocks = [p.to_lists() for p in partitions.partitions_of(args.n)]
    if args.format == "json":
        print(json.dumps(blocks))
    else:
        for b in blocks:
            print(" | ".join(" ".join(str(i) for i in blk) for blk in b))
    return 0


def cmd_compose(args) -> int:
    f = _load_spec(args.f, "--f")
    g = _load_spec(args.g, "--g")
    if f.out_dim != g.in_dim:
        raise DimensionError(f"--f maps to dimension {f.out_dim} but --g expects {g.in_dim}")
    x, ring = _point(args.x, f, f.exact and g.exact)
    tf = f.tower(x, args.order, ring)
    tg = g.tower(tf.value, args.order, ring)
    tower = compose_towers(tg, tf, args.order)
    if args.format == "json":
        print(json.dumps(tower_to_dict(tower), indent=2))
    else:
        print(f"value: {list(map(str, tower.value))}")
        for d in tower.derivs:
            for key, val in d.items():
                print(f"d{list(key)}: {list(map(str, val))}")
    return 0


def _directions(text, dim: int, n: int):
    if text is None:
        return [np.eye(dim)[0]] * n
    dirs = [np.array([float(v) for v in part.split(",")]) for part in text.split(";") if part.strip()]
    if len(dirs) != n:
        raise UsageError(f"--dirs: expected {n} directions, got {len(dirs)}")
    for d in dirs:
        if d.shape != (dim,):
            raise DimensionError(f"--dirs: direction has {d.size} coordinates, map expects {dim}")
    return dirs


def cmd_diff_check(args) -> int:
    f = _load_spec(args.f, "--f")
    x, _ = _point(args.x, f, False)
    if args.h is not None and not args.h > 0:
        raise UsageError("--h: step scale must be positive")
    dirs = _directions(args.dirs, f.in_dim, args.order)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always", strict_diff.CancellationWarning)
        est = strict_diff.estimate_derivative(f.black_box(), x, dirs, args.h, args.richardson)
    out = {"order": est.order, "h": est.h, "richardson": est.richardson,
           "estimate": est.value.tolist(), "cancellation_digits": est.cancellation_digits,
           "warnings": est.warnings}
    # every spec in the vocabulary has a tower, so the exact value is always shown
    tower = f.tower(x, max(args.order, 1), FLOAT)
    exact = compose_eval_single(tower, dirs)
    out["chain_rule"] = exact.tolist()
    out["relative_error"] = strict_diff.relative_error(est.value, exact)
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        for k, v in out.items():
            print(f"{k}: {v}")
    return 0


def compose_eval_single(tower, dirs) -> np.ndarray:
    """``<f^(n)(x), dirs...>`` from a single tower (``n = 0`` gives the value)."""
    if not dirs:
        return np.asarray(tower.value, dtype=np.float64)
    return np.asarray(tower.deriv(len(dirs)).eval(dirs), dtype=np.float64)


def cmd_series_check(args) -> int:
    report = verify.run_series_suite(args.suite, args.seed, args.trials, args.vars, args.cap)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"{report.suite}: {'PASS' if report.passed else 'FAIL'} "
              f"({report.cases - len(report.failures)}/{report.cases})")
        for fail in report.failures:
            print(f"  counterexample: {fail['case']}")
    return 0 if report.passed else 1


def cmd_lemma2(args) -> int:
    lhs = free_algebra.lemma2_lhs(args.n)
    rhs = free_algebra.lemma2_rhs(args.n, args.method)
    ok = lhs == rhs
    print("PASS" if ok else "FAIL")
    if args.dump is not None:
        out = Path(args.dump)
        out.mkdir(parents=True, exist_ok=True)
        for side, s in (("lhs", lhs), ("rhs", rhs)):
            path = out / f"lemma2_n{args.n}_{side}.json"
            path.write_bytes(s.serialize() + b"\n")
            print(f"wrote {path}")
    return 0 if ok else 1


def cmd_verify_all(args) -> int:
    reports = verify.verify_all(args.seed)
    if args.format == "json":
        doc = {"seed": args.seed, "suites": [r.to_dict(args.timings) for r in reports]}
        print(json.dumps(doc, indent=2))
    else:
        for r in reports:
            line = f"{'PASS' if r.passed else 'FAIL'} {r.suite} cases={r.cases} failures={len(r.failures)}"
            if args.timings:
                line += f" time={r.wall_time:.2f}s"
            print(line)
            for fail in r.failures[:5]:
                print(f"  {fail['case']}: expected {fail['expected']}, got {fail['actual']}")
    return 0 if all(r.passed for r in reports) else 1


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faabruno",
        description="Higher-order chain rule by set partitions, with independent checks.",
        epilog=PRNG_NOTE + " Exit codes: 0 ok, 1 verification failure, 2 usage error.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("bell", help="print the Bell number B(n)")
    p.add_argument("--n", type=_nonneg, required=True)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("partitions", help="list set partitions of {0..n-1}")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("compose", help="derivative tower of g(f(x)) up to --order")
    p.add_argument("--f", required=True, help="inner function spec (JSON file)")
    p.add_argument("--g", required=True, help="outer function spec (JSON file)")
    p.add_argument("--x", required=True, help="base point, comma separated; a/b allowed")
    p.add_argument("--order", type=_positive, required=True)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("diff-check", help="difference-sum estimate against the chain rule")
    p.add_argument("--f", required=True, help="function spec (JSON file)")
    p.add_argument("--x", required=True, help="base point, comma separated")
    p.add_argument("--order", type=_nonneg, required=True)
    p.add_argument("--h", type=float, default=None,
                   help="step scale (default eps**(1/(order+2)))")
    p.add_argument("--dirs", default=None,
                   help="directions as 'a,b;c,d;...' (default: first basis vector repeated)")
    p.add_argument("--richardson", action="store_true", help="combine h and h/2 estimates")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_diff_check)

    p = sub.add_parser("series-check", help="seeded functional-calculus trials",
                       epilog=PRNG_NOTE)
    p.add_argument("--suite", choices=["leibniz", "split", "alg7"], required=True)
    p.add_argument("--vars", type=_positive, default=None,
                   help="number of variables (default: drawn from 1..3 per trial)")
    p.add_argument("--cap", type=_positive, default=None,
                   help="truncation degree (default: drawn from 1..6 per trial)")
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_series_check)

    p = sub.add_parser("lemma2", help="cover/partition identity in the free algebra")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--method", choices=["auto", "expand", "kernel"], default="auto",
                   help="'expand' multiplies every cover out literally (slow at n=4)")
    p.add_argument("--dump", nargs="?", const=".", default=None, metavar="DIR",
                   help="write both sides' canonical serializations into DIR")
    p.set_defaults(func=cmd_lemma2)

    p = sub.add_parser("verify-all", help="run every acceptance suite", epilog=PRNG_NOTE)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--timings", action="store_true",
                   help="include wall times (makes output run-dependent)")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (UsageError, *USAGE_ERRORS) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
