"""``twinbias`` command-line interface.

Data goes to stdout or ``--out``; diagnostics go to stderr.  Exit codes:
0 success, 1 usage or argument error, 2 checkpoint/state error,
3 arithmetic or precision error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, TextIO

from . import checkpoint, constants, density, scan, special
from .errors import ResourceError, StateError
from .sieve import DEFAULT_SEGMENT_LEN

SCHEMA_VERSION = 1
EXIT_USAGE = 1
EXIT_STATE = 2
EXIT_ARITHMETIC = 3

TABLE1_LIMIT = 2000
TABLE2_COUNT = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int(text: str) -> int:
    """Integer from ``12``, ``1_000_000``, ``1e9`` or ``2.5e6``; must be exact."""
    try:
        value = Decimal(text.strip().replace("_", ""))
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def parse_positive_int(text: str) -> int:
    n = parse_int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return n


def parse_float(text: str) -> float:
    try:
        return float(text.replace("_", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return parse_positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{name}: {exc}") from None


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--limit", type=parse_int, help="upper bound for p (accepts 1e9, 1_000_000)")
    g.add_argument(
        "--threads", type=parse_positive_int, help="worker processes [env TWINBIAS_THREADS, 1]"
    )
    g.add_argument(
        "--segment-len",
        type=parse_positive_int,
        help="sieve segment length [env TWINBIAS_SEGMENT_LEN]",
    )
    g.add_argument("--checkpoint", type=Path, help="checkpoint file for resumable scans")
    g.add_argument(
        "--checkpoint-every", type=parse_positive_int, default=checkpoint.DEFAULT_CHECKPOINT_EVERY
    )
    g.add_argument("--out", type=Path, help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), help="output format")
    g.add_argument("--qmax", type=parse_int, default=11, help="density cutoff Q")
    g.add_argument("--comparator", choices=("le", "lt"), default="le")
    g.add_argument(
        "--precision", type=parse_float, default=1e-9, help="absolute error target for constants"
    )
    g.add_argument("--modulus", type=parse_int, default=770)
    g.add_argument("--residue", type=parse_int, default=1)
    g.add_argument("--first-k", type=parse_positive_int)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="twinbias", description="Twin primes split by φ(p-1) versus φ(p+1).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "scan": "every twin pair p <= limit with both totients",
        "ratio": "running π_e/π₂ at each exceptional p",
        "table1": f"twin pairs with p <= {TABLE1_LIMIT}",
        "table2": f"the first {TABLE2_COUNT} exceptional primes (or --first-k)",
        "equality": "twin primes with φ(p-1) = φ(p+1)",
        "residue": "exceptional primes in a residue class",
        "constants": "C₂, the prime series and the derived density bounds",
        "density": "finite-cutoff density of exceptional twins",
        "quadruple": "primes r with r+1, 2r+1, 4r+3, 4r+5 prime",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


# ---------------------------------------------------------------- output


def _emit(args, writer: Callable[[TextIO], None]) -> None:
    if args.out is None:
        writer(sys.stdout)
        sys.stdout.flush()
        return
    tmp = args.out.with_name(args.out.name + ".part")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        writer(fh)
    os.replace(tmp, args.out)


def _emit_json(args, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION, **payload}
    _emit(args, lambda fh: fh.write(json.dumps(body, indent=2) + "\n"))


def _emit_csv(args, header: str, rows) -> None:
    def write(fh: TextIO) -> None:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")

    _emit(args, write)


def _require_limit(args) -> int:
    if args.limit is None:
        raise UsageError(f"{args.command} needs --limit")
    return args.limit


def _scan_kwargs(args) -> dict:
    return {"segment_len": args.segment_len, "threads": args.threads}


# --------------------------------------------------------------- commands


def cmd_scan(args) -> None:
    limit = _require_limit(args)
    residues = ((args.modulus, args.residue),)
    if args.format == "json":
        result = scan.scan(limit, residues=residues, **_scan_kwargs(args))
        _emit_json(args, {"counters": result.counters.to_json()})
        return
    if args.checkpoint is not None:
        if args.out is None:
            raise UsageError("--checkpoint needs --out")
        counters = checkpoint.scan_to_csv(
            limit,
            args.out,
            checkpoint_path=args.checkpoint,
            checkpoint_every=args.checkpoint_every,
            residues=residues,
            **_scan_kwargs(args),
        )
    elif args.out is not None:
        tmp = args.out.with_name(args.out.name + ".part")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            counters = checkpoint.stream_scan_csv(
                limit, fh, residues=residues, **_scan_kwargs(args)
            )
        os.replace(tmp, args.out)
    else:
        counters = checkpoint.stream_scan_csv(
            limit, sys.stdout, residues=residues, **_scan_kwargs(args)
        )
        sys.stdout.flush()
    print(
        f"pi2={counters.pi2} pie={counters.pie} piu={counters.piu} pieq={counters.pieq}",
        file=sys.stderr,
    )


def cmd_ratio(args) -> None:
    rows = scan.ratio_series(_require_limit(args), **_scan_kwargs(args))
    if args.format == "json":
        _emit_json(
            args,
            {
                "limit": args.limit,
                "rows": [
                    {"k": r.k, "p": r.p, "pie": r.pie, "pi2": r.pi2, "ratio": r.ratio} for r in rows
                ],
            },
        )
    else:
        _emit_csv(args, scan.RATIO_HEADER, (r.csv_row() for r in rows))


def cmd_table1(args) -> None:
    block = scan.table1(TABLE1_LIMIT)
    if args.format == "json":
        rows = [
            {"p": r.p, "phi_minus": r.phi_minus, "phi_plus": r.phi_plus, "delta": r.delta}
            for r in block.records()
        ]
        _emit_json(args, {"limit": TABLE1_LIMIT, "rows": rows})
    else:
        lines = (f"{r.p},{r.phi_minus},{r.phi_plus},{r.delta}" for r in block.records())
        _emit_csv(args, "p,phi_minus,phi_plus,delta", lines)


def cmd_table2(args) -> None:
    k = args.first_k or TABLE2_COUNT
    rows = scan.table2(k, **_scan_kwargs(args))
    if args.format == "json":
        keys = ("p", "delta", "pi2", "pie", "ratio")
        _emit_json(args, {"count": k, "rows": [dict(zip(keys, row)) for row in rows]})
    else:
        lines = (
            f"{p},{d},{pi2},{pie},{scan.format_ratio(ratio)}" for p, d, pi2, pie, ratio in rows
        )
        _emit_csv(args, "p,delta,pi2,pie,ratio", lines)


def cmd_equality(args) -> None:
    limit = _require_limit(args)
    records = special.equality_scan(limit, **_scan_kwargs(args))
    if args.format == "json":
        _emit(
            args,
            lambda fh: fh.write(
                json.dumps(special.equality_report(limit, records), indent=2) + "\n"
            ),
        )
    else:
        _emit_csv(args, special.EQUALITY_HEADER, (str(r.p) for r in records))


def cmd_residue(args) -> None:
    if (args.limit is None) == (args.first_k is None):
        raise UsageError("residue needs exactly one of --limit and --first-k")
    if args.first_k is not None:
        result = scan.first_exceptional(args.first_k, **_scan_kwargs(args))
        scope = {"first_k": args.first_k}
    else:
        result = scan.scan(args.limit, **_scan_kwargs(args))
        scope = {"limit": args.limit}
    hits = scan.residue_stats(args.modulus, args.residue, records=result.records)
    total = result.counters.pie
    payload = {
        "modulus": args.modulus,
        "residue": args.residue,
        **scope,
        "count": hits,
        "exceptional": total,
        "fraction": hits / total if total else 0.0,
    }
    if args.format == "json":
        _emit_json(args, payload)
    else:
        _emit_csv(
            args,
            "modulus,residue,count,exceptional",
            [f"{args.modulus},{args.residue},{hits},{total}"],
        )


def cmd_constants(args) -> None:
    c2 = constants.twin_prime_constant(args.precision)
    bounds = constants.theorem_bounds(target13=args.precision, target5=args.precision)
    values = [c2, bounds.tail13, bounds.tail5]
    if args.format == "csv":
        lines = (
            f"{v.name},{v.value!r},{v.tail_bound!r},{v.truncation_prime},{v.method.value}"
            for v in values
        )
        _emit_csv(args, "name,value,tail_bound,truncation_prime,method", lines)
        return
    _emit_json(
        args,
        {
            "constants": [v.to_json() for v in values],
            "bounds": {
                "lower_exceptional": bounds.lower_exceptional,
                "lower_unexceptional": bounds.lower_unexceptional,
            },
            "brun_k": constants.BRUN_K,
        },
    )


def cmd_density(args) -> None:
    params = density.DensityParams(args.qmax, density.Comparator(args.comparator))
    result = density.conjecture_value(params)
    payload = result.to_json()
    if args.format == "csv":
        keys = list(payload)
        _emit_csv(args, ",".join(keys), [",".join(str(payload[k]) for k in keys)])
    else:
        _emit_json(args, payload)


def cmd_quadruple(args) -> None:
    limit = _require_limit(args)
    found = special.graham_quadruple_scan(limit)
    if args.format == "json":
        _emit_json(args, {"limit": limit, "count": len(found), "records": found})
    else:
        _emit_csv(args, "r", (str(r) for r in found))


COMMANDS = {
    "scan": cmd_scan,
    "ratio": cmd_ratio,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "equality": cmd_equality,
    "residue": cmd_residue,
    "constants": cmd_constants,
    "density": cmd_density,
    "quadruple": cmd_quadruple,
}
JSON_BY_DEFAULT = {"constants", "density"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads is None:
            args.threads = _env_int("TWINBIAS_THREADS", 1)
        if args.segment_len is None:
            args.segment_len = _env_int("TWINBIAS_SEGMENT_LEN", DEFAULT_SEGMENT_LEN)
        if args.format is None:
            args.format = "json" if args.command in JSON_BY_DEFAULT else "csv"
        COMMANDS[args.command](args)
    except StateError as exc:
        print(f"twinbias: state error: {exc}", file=sys.stderr)
        return EXIT_STATE
    except ArithmeticError as exc:
        print(f"twinbias: arithmetic error: {exc}", file=sys.stderr)
        return EXIT_ARITHMETIC
    except (UsageError, ValueError, ResourceError) as exc:
        print(f"twinbias: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not our failure
        sys.stderr.close()
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
