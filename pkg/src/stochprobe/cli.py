"""Command-line entry point: generate instances, report gaps, run property suites."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analysis import GapReport, gap_report
from .errors import LimitError, PreconditionError, StructuralError, TheoremViolation
from .instances import gen_alltypes_lb, gen_partition_lb, gen_random, gen_xos_tree_lb
from .serialize import SchemaError, dumps_instance, load_instance
from .suites import SUITES, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3

FAMILIES = ("partition", "xos_tree", "all_types", "coverage", "cut", "xos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stochprobe", description="Adaptivity-gap experiments for stochastic probing.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--family", required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--depth", type=int)
    g.add_argument("--variant", default="path_witness")
    g.add_argument("--copies", type=int)
    g.add_argument("--part-size", type=int)
    g.add_argument("--budget", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--width", type=int)
    g.add_argument("--constraint", choices=("cardinality", "partition_matroid"))
    g.add_argument("--out", help="output path (default stdout)")

    r = sub.add_parser("gap", help="exact adaptivity-gap report")
    r.add_argument("instance", nargs="?")
    r.add_argument("--batch", help="directory of *.json instances")
    r.add_argument("--assert-theorems", action="store_true")
    r.add_argument("--csv", help="append one row per instance to this CSV file")
    r.add_argument("--out", help="write JSON report(s) here (default stdout)")
    r.add_argument("--lam", type=float)
    r.add_argument("--max-states", type=int)
    r.add_argument("--workers", type=int)

    v = sub.add_parser("verify", help="run seeded property suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int)
    return ap


def _generate(args):
    fam = args.family
    if fam not in FAMILIES:
        raise UsageError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")
    if fam == "partition":
        inst = gen_partition_lb(args.k or 2, args.part_size, args.p, args.budget)
    elif fam == "xos_tree":
        inst = gen_xos_tree_lb(args.k or 2, args.depth or 2, args.variant, args.budget)
    elif fam == "all_types":
        inst = gen_alltypes_lb(args.k or 2, args.copies, 0.5 if args.p is None else args.p, args.budget)
    else:
        if args.n is None:
            raise UsageError(f"--n is required for family {fam}")
        params = {}
        if args.constraint:
            params["constraint"] = args.constraint
        if args.k is not None:
            params["k"] = args.k
        if args.width is not None:
            params["width"] = args.width
        inst = gen_random(fam, args.n, args.seed, params)
    text = dumps_instance(inst)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _one_report(path, args_tuple):
    assert_thm, lam, max_states = args_tuple
    inst = load_instance(path)
    return gap_report(inst, assert_theorems=assert_thm, lam=lam, max_states=max_states)


def _gap(args):
    if bool(args.instance) == bool(args.batch):
        raise UsageError("give exactly one of an instance path or --batch DIR")
    opts = (args.assert_theorems, args.lam, args.max_states)
    if args.batch:
        paths = sorted(Path(args.batch).glob("*.json"))
        if not paths:
            raise UsageError(f"no *.json instances in {args.batch}")
        if args.workers == 1 or len(paths) == 1:
            reports = [_one_report(p, opts) for p in paths]
        else:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                reports = list(pool.map(_one_report, paths, [opts] * len(paths)))
    else:
        paths = [Path(args.instance)]
        reports = [_one_report(paths[0], opts)]

    docs = [dict(r.to_dict(), instance=str(p)) for p, r in zip(paths, reports)]
    text = json.dumps(docs if args.batch else docs[0], indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.csv:
        write_csv(args.csv, reports)
    return EXIT_OK


def write_csv(path, reports: list[GapReport]) -> None:
    """Append rows, writing the header only when the file is new or empty."""
    p = Path(path)
    fresh = not p.exists() or p.stat().st_size == 0
    with p.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=GapReport.CSV_FIELDS)
        if fresh:
            w.writeheader()
        for r in reports:
            w.writerow(r.csv_row())


def _verify(args):
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    status = EXIT_OK
    for res in run_suite(args.suite, args.seed, args.count):
        if res.ok:
            print(f"{res.name}: ok ({res.checked} cases)")
        else:
            print(f"{res.name}: VIOLATION at case {res.checked}")
            print(json.dumps(res.witness, indent=1, default=str))
            status = EXIT_VIOLATION
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return {"generate": _generate, "gap": _gap, "verify": _verify}[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, StructuralError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LimitError as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except TheoremViolation as exc:
        print(f"theorem violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
