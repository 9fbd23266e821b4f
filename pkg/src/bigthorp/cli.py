"""Command-line frontend.

Subcommands: ``keygen``, ``encrypt``, ``decrypt``, ``bounds``, ``curve``,
``verify``.  Exit status is 0 on success, 1 for usage errors, 2 for I/O or
format errors (unreadable or mismatched key files, malformed hex), and 3
when a verification suite reports a failure.

Messages travel as big-endian hex with an explicit ``--bits`` width, since
the width need not be a multiple of four; input whose value needs more
than ``--bits`` bits is rejected.  ``--key`` falls back to the
``BIGTHORP_KEY`` environment variable, the only environment override.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import mpmath

from . import bigkey, bounds, thorp, verify
from .bitstring import BitString
from .oracle import Shake256Oracle
from .prf import CipherParams

_ENV_KEY = "BIGTHORP_KEY"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad arguments; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bigthorp",
        description="Bit-level format-preserving cipher over huge keys, "
        "with advantage-bound calculators and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("keygen", help="generate and save a key file")
    p.add_argument("--bits", type=int, required=True, metavar="N",
                   help="key size in bits (at least 8)")
    p.add_argument("--out", required=True, metavar="PATH",
                   help="destination key file")
    p.add_argument("--seed", type=int, default=None, metavar="INT",
                   help="derive the key deterministically from this seed "
                   "instead of the system RNG")

    for name in ("encrypt", "decrypt"):
        p = sub.add_parser(name, help=f"{name} one m-bit message")
        p.add_argument("--key", default=os.environ.get(_ENV_KEY),
                       metavar="PATH",
                       help=f"key file (default: ${_ENV_KEY})")
        p.add_argument("--bits", type=int, required=True, metavar="M",
                       help="message width in bits (at least 2)")
        p.add_argument("--probes", type=int, required=True, metavar="K",
                       help="key probes per round-function call")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--passes", type=int, metavar="S",
                           help="pass count; rounds = S * (2M - 1)")
        group.add_argument("--rounds", type=int, metavar="T",
                           help="explicit round count (overrides the "
                           "derived form the advantage bound assumes)")
        p.add_argument("--in", dest="message", required=True, metavar="HEX",
                       help="message as big-endian hex of at most M bits")

    p = sub.add_parser("bounds", help="print advantage bounds")
    _add_bound_args(p)
    p.add_argument("--queries", type=float, required=True, metavar="Q",
                   help="number of known-plaintext queries")
    p.add_argument("--oracle-calls", type=float, default=0.0, metavar="P",
                   help="direct oracle calls by the adversary (default 0)")
    p.add_argument("--closed-form", action="store_true",
                   help="use the algebraic inverse-entropy upper bound "
                   "instead of bisection")

    p = sub.add_parser("curve", help="emit the leading-terms bound curve as CSV")
    _add_bound_args(p)
    p.add_argument("--q-from", type=float, required=True, metavar="A",
                   help="first query count (must be positive)")
    p.add_argument("--q-to", type=float, required=True, metavar="B",
                   help="last query count")
    p.add_argument("--points", type=int, required=True, metavar="P",
                   help="number of log-spaced points")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="CSV destination (default: stdout)")

    p = sub.add_parser("verify", help="run brute-force verification suites")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--all", action="store_true", help="run every suite")
    group.add_argument("--suite", action="append", metavar="NAME",
                       choices=sorted(verify.SUITES),
                       help="run one suite (repeatable); names: "
                       + ", ".join(sorted(verify.SUITES)))
    p.add_argument("--seed", type=int, default=None, metavar="INT",
                   help="override the per-suite default seeds")
    p.add_argument("--trials", type=int, default=10**4, metavar="INT",
                   help="Monte Carlo trials for the bias suite "
                   "(default 10^4)")
    p.add_argument("--json", default=None, metavar="PATH",
                   help="also write a machine-readable summary")
    return parser


def _add_bound_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, metavar="N",
                   help="key size in bits")
    p.add_argument("--leak", type=int, required=True, metavar="L",
                   help="leakage budget in bits")
    p.add_argument("--bits", type=int, required=True, metavar="M",
                   help="message width in bits")
    p.add_argument("--probes", type=int, required=True, metavar="K",
                   help="key probes per round-function call")
    p.add_argument("--passes", type=int, required=True, metavar="S",
                   help="pass count")
    p.add_argument("--rounds", type=int, default=None, metavar="T",
                   help="explicit round count (overrides the derived "
                   "T = S * (2M - 1), with a warning)")


def _bound_inputs(args, queries, oracle_calls=0.0) -> bounds.BoundInputs:
    if args.rounds is not None:
        print(
            "warning: --rounds overrides the derived round count; the "
            "advantage bound assumes T = passes * (2 * bits - 1)",
            file=sys.stderr,
        )
        rounds = args.rounds
    else:
        rounds = args.passes * (2 * args.bits - 1)
    return bounds.BoundInputs(
        n_bits=args.n,
        leak_bits=args.leak,
        msg_bits=args.bits,
        num_probes=args.probes,
        passes=args.passes,
        rounds=rounds,
        queries=queries,
        oracle_calls=oracle_calls,
    )


def _cipher_params(args, n_bits: int) -> CipherParams:
    if args.rounds is not None:
        print(
            "warning: --rounds overrides the derived round count; the "
            "advantage bound assumes T = passes * (2 * bits - 1)",
            file=sys.stderr,
        )
        return CipherParams(n_bits=n_bits, msg_bits=args.bits,
                            num_probes=args.probes, rounds=args.rounds)
    return CipherParams.from_passes(n_bits, args.bits, args.probes,
                                    args.passes)


def _cmd_keygen(args) -> int:
    if args.bits < 8:
        print("error: --bits must be at least 8", file=sys.stderr)
        return 1
    needed = (args.bits + 7) // 8
    if args.seed is not None:
        randomness = bigkey.seed_randomness(needed, args.seed)
    else:
        randomness = os.urandom(needed)
    key = bigkey.BigKey.generate(args.bits, randomness)
    key.save(args.out)
    print(f"wrote {args.bits}-bit key to {args.out}")
    return 0


def _cmd_crypt(args, forward: bool) -> int:
    if args.key is None:
        print(f"error: --key not given and ${_ENV_KEY} is unset",
              file=sys.stderr)
        return 1
    if args.bits < 2:
        print("error: --bits must be at least 2", file=sys.stderr)
        return 1
    if args.probes < 1:
        print("error: --probes must be at least 1", file=sys.stderr)
        return 1
    if args.passes is not None and args.passes < 1:
        print("error: --passes must be at least 1", file=sys.stderr)
        return 1
    if args.rounds is not None and args.rounds < 0:
        print("error: --rounds must be nonnegative", file=sys.stderr)
        return 1
    with bigkey.BigKey.load(args.key) as key:
        params = _cipher_params(args, key.n_bits)
        message = BitString.from_hex(args.message, args.bits)
        oracle = Shake256Oracle()
        if forward:
            out = thorp.encrypt(message, key, oracle, params)
        else:
            out = thorp.decrypt(message, key, oracle, params)
    print(out.to_hex())
    return 0


def _cmd_bounds(args) -> int:
    b = _bound_inputs(args, args.queries, args.oracle_calls)
    variant = "closed-form" if args.closed_form else "exact"
    value = bounds.theorem1_bound(b, variant=variant)
    naive = bounds.naive_adv_lower(b)
    with mpmath.workprec(bounds.PRECISION_BITS):
        simple = mpmath.mpf(naive.simple.numerator) / naive.simple.denominator
        hyper = (mpmath.mpf(naive.hypergeometric.numerator)
                 / naive.hypergeometric.denominator)
    print(f"advantage upper bound ({variant} inverse entropy): "
          f"{mpmath.nstr(value, 10)}")
    print(f"naive adversary lower bound (simple): {mpmath.nstr(simple, 10)}")
    print(f"naive adversary lower bound (hypergeometric): "
          f"{mpmath.nstr(hyper, 10)}")
    print(f"naive hypothesis q*floor(leak/bits) <= 2^bits: "
          f"{'holds' if naive.hypothesis_ok else 'violated'}")
    return 0


def _cmd_curve(args) -> int:
    if args.q_from <= 0:
        print("error: --q-from must be positive", file=sys.stderr)
        return 1
    if args.q_to < args.q_from:
        print("error: --q-to must be at least --q-from", file=sys.stderr)
        return 1
    if args.points < 1:
        print("error: --points must be at least 1", file=sys.stderr)
        return 1
    b = _bound_inputs(args, args.q_from)
    lg_a = mpmath.log(args.q_from, 2)
    lg_b = mpmath.log(args.q_to, 2)
    if args.points == 1:
        qs = [args.q_from]
    else:
        step = (lg_b - lg_a) / (args.points - 1)
        qs = [float(mpmath.mpf(2) ** (lg_a + i * step))
              for i in range(args.points)]
    points = bounds.gamma_curve(b, qs)
    if args.out is None:
        bounds.write_curve_csv(points, sys.stdout)
    else:
        with open(args.out, "w") as f:
            bounds.write_curve_csv(points, f)
        print(f"wrote {len(points)} curve points to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    names = sorted(verify.SUITES) if args.all else list(dict.fromkeys(args.suite))
    results = []
    for name in names:
        kwargs = {"trials": args.trials}
        if args.seed is not None:
            kwargs["seed"] = args.seed
        results.extend(verify.SUITES[name](**kwargs))
    print(verify.render_report(results))
    if args.json is not None:
        with open(args.json, "w") as f:
            json.dump(verify.report_rows(results), f, indent=2)
        print(f"wrote summary to {args.json}")
    return 0 if all(r.passed for r in results) else 3


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    try:
        if args.command == "keygen":
            return _cmd_keygen(args)
        if args.command == "encrypt":
            return _cmd_crypt(args, forward=True)
        if args.command == "decrypt":
            return _cmd_crypt(args, forward=False)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "curve":
            return _cmd_curve(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (bigkey.KeyFileError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
