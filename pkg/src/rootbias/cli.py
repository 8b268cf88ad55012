"""Command line interface.

Subcommands compute single bias values, tabulate grids, re-verify the
closed trace formulas against the raw class-number sums, scan for
negative bias, and cross-check spaces against cached LMFDB data. Grid
output is ordered by (N, k) and is byte-identical for any --jobs value:
work is split into contiguous level blocks and merged back in order.
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys

from rootbias.arith import decompose_level, divisors, mobius
from rootbias.bias import classify_zero, refined_dims
from rootbias.classnum import warm_cache
from rootbias.lmfdb import CACHE_DIR_ENV, LmfdbClient, LmfdbError
from rootbias.trace import (
    trace_full_closed,
    trace_full_direct,
    trace_new_closed,
    trace_report,
)

TEXT_SCHEMA = 1

_TSV_COLUMNS = (
    "N",
    "k",
    "tr_full",
    "tr_new",
    "delta",
    "dim_new",
    "dim_plus",
    "dim_minus",
    "case_tag",
    "zero_class",
)


def _parse_range(text: str) -> tuple[int, int]:
    lo_text, sep, hi_text = text.partition("..")
    try:
        lo = int(lo_text)
        hi = int(hi_text) if sep else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected INT or LO..HI, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _level_range(text: str) -> tuple[int, int]:
    lo, hi = _parse_range(text)
    if lo < 1:
        raise argparse.ArgumentTypeError("level must be >= 1")
    return lo, hi


def _weight_range(text: str) -> tuple[int, int]:
    lo, hi = _parse_range(text)
    if lo < 2:
        raise argparse.ArgumentTypeError("weight must be >= 2")
    if lo % 2 or hi % 2:
        raise argparse.ArgumentTypeError("weight must be even")
    return lo, hi


def _level(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer level, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("level must be >= 1")
    return value


def _weight(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer weight, got {text!r}")
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError("weight must be even and >= 2")
    return value


def _grid_row(N: int, k: int) -> tuple:
    rep = trace_report(N, k)
    plus, minus = refined_dims(N, k)
    zc = classify_zero(N, k) if rep.delta == 0 else None
    return (
        N,
        k,
        rep.tr_full,
        rep.tr_new,
        rep.delta,
        plus + minus,
        plus,
        minus,
        rep.case_tag.value,
        "" if zc is None else zc.value,
    )


def _text_line(row: tuple) -> str:
    return (
        f"N={row[0]} k={row[1]} tr_full={row[2]} tr_new={row[3]} delta={row[4]}"
        f" dim_new={row[5]} dim_plus={row[6]} dim_minus={row[7]}"
        f" case_tag={row[8]} zero_class={row[9] or '-'}"
    )


def _blocks(n_lo: int, n_hi: int, jobs: int) -> list[tuple[int, int]]:
    span = n_hi - n_lo + 1
    count = max(1, min(span, jobs * 4))
    size = -(-span // count)
    out = []
    lo = n_lo
    while lo <= n_hi:
        out.append((lo, min(lo + size - 1, n_hi)))
        lo += size
    return out


def _table_block(task: tuple[int, int, int, int]) -> list[tuple]:
    n_lo, n_hi, k_lo, k_hi = task
    return [
        _grid_row(N, k)
        for N in range(n_lo, n_hi + 1)
        for k in range(k_lo, k_hi + 1, 2)
    ]


def _verify_block(task: tuple[int, int, int, int]) -> tuple[int, list[str]]:
    n_lo, n_hi, k_lo, k_hi = task
    cells = 0
    bad = []
    for N in range(n_lo, n_hi + 1):
        n2 = decompose_level(N).N2
        for k in range(k_lo, k_hi + 1, 2):
            cells += 1
            closed = trace_full_closed(N, k)
            direct = trace_full_direct(N, k)
            if closed != direct:
                bad.append(f"MISMATCH full trace N={N} k={k} closed={closed} direct={direct}")
            new_closed = trace_new_closed(N, k)
            new_direct = sum(
                mobius(q) * trace_full_direct(N // (q * q), k) for q in divisors(n2)
            )
            if new_closed != new_direct:
                bad.append(
                    f"MISMATCH new trace N={N} k={k} closed={new_closed} direct={new_direct}"
                )
    return cells, bad


def _scan_block(task: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    n_lo, n_hi, k_max = task
    out = []
    for N in range(n_lo, n_hi + 1):
        for k in range(2, k_max + 1, 2):
            d = (-1) ** (k // 2) * trace_new_closed(N, k)
            if d < 0:
                out.append((N, k, d))
    return out


def _run_blocked(worker, tasks, jobs: int, warm_limit: int) -> list:
    """Map worker over tasks, in order, optionally across processes."""
    if jobs <= 1 or len(tasks) == 1:
        warm_cache(warm_limit)
        return [worker(task) for task in tasks]
    with multiprocessing.Pool(jobs, initializer=warm_cache, initargs=(warm_limit,)) as pool:
        return list(pool.imap(worker, tasks))


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _cmd_delta(args) -> int:
    row = _grid_row(args.level, args.weight)
    print(_text_line(row))
    return 0


def _cmd_table(args) -> int:
    n_lo, n_hi = args.levels
    k_lo, k_hi = args.weights
    tasks = [(lo, hi, k_lo, k_hi) for lo, hi in _blocks(n_lo, n_hi, args.jobs)]
    chunks = _run_blocked(_table_block, tasks, args.jobs, 4 * n_hi)
    if args.format == "tsv":
        print("\t".join(_TSV_COLUMNS))
        for chunk in chunks:
            for row in chunk:
                print("\t".join(str(cell) for cell in row))
    else:
        print(f"# rootbias table schema {TEXT_SCHEMA}")
        for chunk in chunks:
            for row in chunk:
                print(_text_line(row))
    return 0


def _cmd_verify(args) -> int:
    n_lo, n_hi = args.levels
    k_lo, k_hi = args.weights
    tasks = [(lo, hi, k_lo, k_hi) for lo, hi in _blocks(n_lo, n_hi, args.jobs)]
    results = _run_blocked(_verify_block, tasks, args.jobs, 4 * n_hi)
    cells = sum(r[0] for r in results)
    bad = [line for r in results for line in r[1]]
    for line in bad:
        print(line)
    label = f"N={n_lo}..{n_hi} k={k_lo}..{k_hi}"
    if bad:
        print(f"verify {label}: {len(bad)} mismatches in {cells} cells")
        return 1
    print(f"verify {label}: OK ({cells} cells)")
    return 0


def _cmd_scan_negative(args) -> int:
    tasks = [(lo, hi, args.k_max) for lo, hi in _blocks(1, args.n_max, args.jobs)]
    chunks = _run_blocked(_scan_block, tasks, args.jobs, 4 * args.n_max)
    print("N\tk\tdelta")
    found = 0
    for chunk in chunks:
        for N, k, d in chunk:
            found += 1
            print(f"{N}\t{k}\t{d}")
    print(
        f"scan-negative N<={args.n_max} k<={args.k_max}: {found} negative cells",
        file=sys.stderr,
    )
    return 0


def _cmd_validate_lmfdb(args) -> int:
    client = LmfdbClient(cache_dir=args.cache_dir, offline=args.offline)
    try:
        report = client.validate_delta(args.level, args.weight)
        minimal = client.validate_minimal(args.level, args.weight) if args.minimal else None
    except LmfdbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"level={report.level} weight={report.weight}"
        f" computed_delta={report.computed_delta} external_sum={report.external_sum}"
        f" orbits={report.orbit_count} match={'yes' if report.match else 'NO'}"
    )
    ok = report.match
    if minimal is not None:
        if minimal.insufficient_data:
            print("minimal: insufficient data (orbits missing twist-minimality flags)")
        else:
            print(
                f"minimal: forced_zero={'yes' if minimal.forced_zero else 'no'}"
                f" external_minimal_sum={minimal.external_minimal_sum}"
                f" minimal_orbits={minimal.minimal_orbit_count}"
                f" consistent={'yes' if minimal.consistent else 'NO'}"
            )
            ok = ok and bool(minimal.consistent)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rootbias",
        description="Root number bias in spaces of newforms: traces, refined "
        "dimensions, zero classification, and external cross-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_delta = sub.add_parser("delta", help="compute the bias at a single (N, k)")
    p_delta.add_argument("level", type=_level, metavar="N")
    p_delta.add_argument("weight", type=_weight, metavar="k")
    p_delta.set_defaults(func=_cmd_delta)

    p_table = sub.add_parser("table", help="tabulate traces and bias over a grid")
    p_table.add_argument("--N", dest="levels", type=_level_range, required=True,
                         metavar="LO..HI", help="level range, e.g. 1..50")
    p_table.add_argument("--k", dest="weights", type=_weight_range, required=True,
                         metavar="LO..HI", help="even weight range, e.g. 2..24")
    p_table.add_argument("--format", choices=("tsv", "text"), default="tsv")
    p_table.add_argument("--jobs", type=int, default=_default_jobs())
    p_table.set_defaults(func=_cmd_table)

    p_verify = sub.add_parser(
        "verify", help="recheck closed trace formulas against the raw sums"
    )
    p_verify.add_argument("--N", dest="levels", type=_level_range, required=True,
                          metavar="LO..HI")
    p_verify.add_argument("--k", dest="weights", type=_weight_range, required=True,
                          metavar="LO..HI")
    p_verify.add_argument("--jobs", type=int, default=_default_jobs())
    p_verify.set_defaults(func=_cmd_verify)

    p_scan = sub.add_parser("scan-negative", help="list all cells with negative bias")
    p_scan.add_argument("--N-max", dest="n_max", type=_level, required=True)
    p_scan.add_argument("--k-max", dest="k_max", type=_weight, required=True)
    p_scan.add_argument("--jobs", type=int, default=_default_jobs())
    p_scan.set_defaults(func=_cmd_scan_negative)

    p_val = sub.add_parser(
        "validate-lmfdb", help="compare against newform data from the LMFDB"
    )
    p_val.add_argument("level", type=_level, metavar="N")
    p_val.add_argument("weight", type=_weight, metavar="k")
    p_val.add_argument("--minimal", action="store_true",
                       help="also check the balance of twist-minimal root numbers")
    p_val.add_argument("--offline", action="store_true",
                       help="never touch the network; fail on a cache miss")
    p_val.add_argument("--cache-dir", default=None,
                       help=f"cache directory (default: ${CACHE_DIR_ENV} or ~/.cache/rootbias/lmfdb)")
    p_val.set_defaults(func=_cmd_validate_lmfdb)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
