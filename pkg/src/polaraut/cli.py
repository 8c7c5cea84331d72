"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .autgroup import (
    BlockProfile,
    block_profile,
    blta_log2_size,
    blta_size,
    partial_symmetry,
    verify_theorem2,
)
from .monomial import MonomialCode, parse_code
from .polar import ChannelModel, PolarCode, construct_polar
from .xlab import (
    DEFAULT_M_CAP,
    FERConfig,
    fer_simulate,
    format_table,
    rate_gap_report,
    records_to_csv,
    records_to_json,
    reliability_records,
    theorem1_scan,
    verify_paper_examples,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _m_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _add_code_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code selection")
    g.add_argument("--channel", default="bec:0.5", help="kind:param, e.g. bec:0.5, bsc:0.1, awgn:0.8")
    g.add_argument("--m", type=int, help="number of variables (n = 2^m)")
    g.add_argument("--k", type=int, help="code dimension")
    g.add_argument("--rate-rule", choices=["capacity"], help="choose k = round(2^m I(W))")
    g.add_argument("--monomials", help='explicit generating set, e.g. "1,x0,x1,x0*x2"')
    g.add_argument("--code", type=Path, help="JSON file with a code ({m, monomials} or polar code)")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="write machine-readable output here")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _channel(args) -> ChannelModel:
    try:
        return ChannelModel.parse(args.channel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _polar_code(args) -> PolarCode:
    if args.code or args.monomials:
        mono = _monomial_code(args)
        return PolarCode.from_monomial_code(mono, _channel(args))
    if args.m is None:
        raise UsageError("--m is required")
    if args.k is None and args.rate_rule is None:
        raise UsageError("give --k or --rate-rule capacity")
    return construct_polar(_channel(args), args.m, args.k, args.rate_rule)


def _monomial_code(args) -> MonomialCode:
    if args.code:
        data = json.loads(args.code.read_text())
        return MonomialCode.from_json(data)
    if args.monomials is not None:
        if args.m is None:
            raise UsageError("--monomials needs --m")
        return parse_code(args.monomials, args.m)
    return _polar_code(args).monomials


def _emit(args, records, payload=None) -> None:
    sys.stdout.write(format_table(records))
    if args.out:
        if args.format == "json":
            text = records_to_json(payload if payload is not None else records)
        else:
            text = records_to_csv(records)
        args.out.write_text(text)


def cmd_construct(args) -> int:
    code = _polar_code(args)
    print(f"n={code.n} k={code.k} channel={code.channel}")
    print(f"frozen: {sorted(code.frozen)}")
    print(f"monomials: {code.monomials}")
    if args.out:
        if args.format == "json":
            args.out.write_text(records_to_json(code.to_json()))
        else:
            args.out.write_text(records_to_csv(reliability_records(code)))
    return EXIT_OK


def cmd_profile(args) -> int:
    code = _monomial_code(args)
    profile = block_profile(code)
    rec = {
        "m": code.m,
        "k": code.dimension,
        "profile": profile.to_json(),
        "max_block": max(profile.sizes),
        "log2_blta": blta_log2_size(profile),
    }
    _emit(args, [rec], rec)
    return EXIT_OK


def cmd_symmetry(args) -> int:
    code = _monomial_code(args)
    report = partial_symmetry(code)
    rec = {"m": code.m, "k": code.dimension, **report.to_json()}
    _emit(args, [rec], rec)
    return EXIT_OK


def cmd_blta_size(args) -> int:
    profile = BlockProfile.parse(args.profile)
    size = blta_size(profile)
    rec = {"profile": profile.to_json(), "m": profile.m, "size": str(size), "log2_size": blta_log2_size(profile)}
    _emit(args, [rec], rec)
    return EXIT_OK


def cmd_verify_theorem2(args) -> int:
    code = _monomial_code(args)
    profile = BlockProfile.parse(args.profile) if args.profile else block_profile(code)
    if profile.m != code.m:
        raise UsageError(f"profile {profile} does not sum to m={code.m}")
    ok = verify_theorem2(code, profile)
    rec = {"m": code.m, "profile": profile.to_json(), "holds": ok}
    _emit(args, [rec], rec)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scan(args) -> int:
    if args.m is None:
        raise UsageError("--m is required (single value or lo:hi)")
    ms = _m_range(args.m)
    rows = theorem1_scan(_channel(args), ms, k=args.k, m_cap=args.m_cap)
    records = [r.to_record() for r in rows]
    _emit(args, records)
    return EXIT_OK


def cmd_rate_gaps(args) -> int:
    code = _polar_code(args)
    profile = BlockProfile.parse(args.profile) if args.profile else None
    rows = rate_gap_report(code, profile)
    _emit(args, rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    code = _polar_code(args)
    cfg = FERConfig(
        channel=code.channel,
        m=code.m,
        k=code.k,
        trials=args.trials,
        seed=args.seed,
        perms=args.perms,
        n_perms=args.n_perms,
        chunk_size=args.chunk_size,
        workers=args.workers,
        min_sum=args.min_sum,
    )
    result = fer_simulate(cfg, code)
    _emit(args, result["rows"], result)
    return EXIT_OK


def cmd_verify_examples(args) -> int:
    results = verify_paper_examples()
    records = [{"fixture": name, "status": "PASS" if ok else "FAIL", "detail": detail}
               for name, ok, detail in results]
    _emit(args, records)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polaraut", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="construct a polar code")
    _add_code_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("profile", help="detect the BLTA block profile")
    _add_code_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("symmetry", help="partial-derivative dimensions and t")
    _add_code_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("blta-size", help="exact size of BLTA(s, m)")
    p.add_argument("--profile", required=True, help="block sizes, e.g. 2,1,1")
    _add_output_args(p)
    p.set_defaults(func=cmd_blta_size)

    p = sub.add_parser("verify-theorem2", help="check invariance of the SC subcodes per block")
    _add_code_args(p)
    p.add_argument("--profile", help="block sizes (default: detected)")
    _add_output_args(p)
    p.set_defaults(func=cmd_verify_theorem2)

    p = sub.add_parser("scan", help="block profiles across m")
    p.add_argument("--channel", default="bec:0.5")
    p.add_argument("--m", help="single m or range lo:hi")
    p.add_argument("--k", type=int, help="fixed k (default: capacity rate rule)")
    p.add_argument("--rate-rule", choices=["capacity"], default="capacity")
    p.add_argument("--m-cap", type=int, default=DEFAULT_M_CAP)
    _add_output_args(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("rate-gaps", help="per-level rate and capacity gaps")
    _add_code_args(p)
    p.add_argument("--profile", help="block sizes (default: detected)")
    _add_output_args(p)
    p.set_defaults(func=cmd_rate_gaps)

    p = sub.add_parser("simulate", help="FER of SC vs. ensemble SC")
    _add_code_args(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perms", default="blta", help="lta | blta | varperm | explicit:<file>")
    p.add_argument("--n-perms", type=int, default=4)
    p.add_argument("--chunk-size", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--min-sum", action="store_true")
    _add_output_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-examples", help="run the worked-example fixtures")
    _add_output_args(p)
    p.set_defaults(func=cmd_verify_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"polaraut: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
