"""Command-line entry point: ``clonekit <command> <subcommand> ...``.

Tabular answers go to stdout tab-separated, reports as JSON.  Exit codes:
0 success (including timeouts, which warn on stderr), 1 a discrepancy or a
failed check, 2 a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import catalog, witnesses
from .clones import enumerate_tables, load_relation, membership, parse_spec
from .core import format_table, parse_table, preserves, write_relation
from .minor import Budget, PartialResultError, enumerate_classes, is_minor
from .relations import NAMED, parse_relation_ref, rosenberg_classify


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"3..7"`` -> [3, 4, 5, 6, 7]; also accepts ``"5"`` and ``"1,4,9"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed range {text!r}") from None


def parse_params(text: str | None) -> dict[str, int]:
    if not text:
        return {"a": 0, "b": 1, "c": 2}
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"malformed parameter {item!r}")
        out[key.strip()] = int(val)
    if sorted(out) != ["a", "b", "c"] or sorted(out.values()) != [0, 1, 2]:
        raise UsageError("--params needs a, b, c forming a permutation of 0, 1, 2")
    return out


def _budget(args) -> Budget:
    default = Budget()
    nodes = args.budget_nodes if args.budget_nodes is not None else default.max_nodes
    secs = args.budget_ms / 1000 if args.budget_ms is not None else default.max_seconds
    return Budget(max_nodes=nodes, max_seconds=secs)


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-nodes", type=int, default=None, help="search nodes per solver call (default 10^7)")
    p.add_argument("--budget-ms", type=int, default=None, help="milliseconds per solver call (default 600000)")


def _emit_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_relations_list(args) -> int:
    for name, (desc, _) in NAMED.items():
        print(f"{name}\t{desc}")
    return 0


def cmd_relations_show(args) -> int:
    rho = parse_relation_ref(args.ref)
    cls = rosenberg_classify(rho)
    print(f"# {args.ref}: {cls.tag}")
    sys.stdout.write(write_relation(rho))
    return 0


def cmd_check_preserve(args) -> int:
    f = parse_table(args.op)
    rho = load_relation(args.rel)
    print("yes" if preserves(f, rho) else "no")
    return 0


def cmd_clone_enumerate(args) -> int:
    C = parse_spec(args.spec)
    tabs = enumerate_tables(C, args.arity, limit=args.limit)
    if args.count:
        print(len(tabs))
        return 0
    for t in tabs.tolist():
        print("".join(map(str, t)))
    return 0


def cmd_clone_member(args) -> int:
    C = parse_spec(args.spec)
    print("yes" if membership(C, parse_table(args.op)) else "no")
    return 0


def cmd_minor_decide(args) -> int:
    f, g = parse_table(args.f), parse_table(args.g)
    rels = [load_relation(r) for r in args.rels]
    res = is_minor(f, g, rels, _budget(args))
    out = {
        "verdict": res.verdict.value,
        "witness": [format_table(h) for h in res.witness] if res.witness is not None else None,
        "nodes": res.nodes,
    }
    if res.reason:
        out["reason"] = res.reason
    _emit_json(out, None)
    if res.verdict.value == "unknown":
        print(f"warning: {res.reason}", file=sys.stderr)
    return 0


def cmd_equiv_classes(args) -> int:
    rels = [load_relation(r) for r in args.rels]
    try:
        part = enumerate_classes(rels, args.max_arity, _budget(args))
        classes, calls, status = part.classes, part.solver_calls, "complete"
    except PartialResultError as exc:
        classes, calls, status = exc.classes, None, "partial"
        print(f"warning: {exc}", file=sys.stderr)
    report = {
        "relations": list(args.rels),
        "max_arity": args.max_arity,
        "status": status,
        "class_count": len(classes),
        "solver_calls": calls,
        "classes": [[format_table(f) for f in cls] for cls in classes],
    }
    _emit_json(report, args.out)
    if args.out:
        print(f"{len(classes)}\tclasses\t{args.out}")
    if args.figure:
        from .plotting import class_size_histogram

        class_size_histogram([len(c) for c in classes], args.figure, f"{len(classes)} classes, arity <= {args.max_arity}")
    return 0


def cmd_catalog_instantiate(args) -> int:
    lines = [args.line] if args.line is not None else None
    total = 0
    for e in catalog.entries(args.table, lines):
        inst = catalog.instantiate_line(args.table, e.line)
        for i in inst.instances:
            print(f"{args.table}\t{e.line}\t{i.label()}\t{e.text}")
        for w in inst.warnings:
            print(f"note: line {e.line}: {w}", file=sys.stderr)
        total += len(inst)
    print(f"total\t{total}", file=sys.stderr)
    if args.collisions and args.line is None:
        found = catalog.cross_line_collisions(args.table)
        for a, b, _ in found:
            print(f"collision\t{a}\t{b}", file=sys.stderr)
        print(f"collisions\t{len(found)}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    lines = parse_range(args.lines) if args.lines else None
    b = _budget(args)
    budget = catalog.VerifyBudget(
        solver=b,
        classes=b if args.budget_nodes is not None or args.budget_ms is not None else catalog.VerifyBudget().classes,
        reverse=Budget(min(b.max_nodes, 10**5), min(b.max_seconds, 10.0)),
    )

    def progress(rep):
        print(f"line {rep['line']}: {rep['status']}", file=sys.stderr)

    report = catalog.run_verification(args.table, lines, budget, progress=None if args.quiet else progress)
    if args.no_timings:
        report = catalog.strip_timings(report)
    _emit_json(report, args.out)
    if args.figures:
        from .plotting import status_chart

        d = Path(args.figures)
        d.mkdir(parents=True, exist_ok=True)
        status_chart(report, d / f"verify_table{args.table}.png")
    statuses = {e["status"] for e in report["entries"]}
    if "timeout" in statuses:
        print("warning: some checks ran out of budget", file=sys.stderr)
    return 1 if "discrepancy" in statuses else 0


def cmd_witness_build(args) -> int:
    p = parse_params(args.params)
    w = witnesses.WitnessFamily(args.lemma, args.n, (p["a"], p["b"], p["c"]))
    f = witnesses.build_family(w)
    print(f"{args.lemma}\t{args.n}\t{f.arity}\t{format_table(f)}")
    return 0


def cmd_witness_facts(args) -> int:
    checker = {"26": witnesses.check_fact_26, "35": witnesses.check_fact_35, "40": witnesses.check_fact_40}.get(args.lemma)
    if checker is None:
        raise UsageError("facts exist for lemmas 26, 35 and 40")
    p = parse_params(args.params)
    ok_all = True
    for n in parse_range(args.p):
        if args.lemma == "40" and n % 2 == 0:
            continue
        if args.lemma == "26":
            ok = checker(n, p, include_diagonal=args.with_diagonal)
        else:
            ok = checker(n, p)
        ok_all &= ok
        print(f"{args.lemma}\t{n}\t{'pass' if ok else 'fail'}")
    return 0 if ok_all else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clonekit", description="Clones, C-minors and the three-element catalog.")
    sub = ap.add_subparsers(dest="command", required=True)

    rel = sub.add_parser("relations", help="named relations").add_subparsers(dest="sub", required=True)
    rel.add_parser("list").set_defaults(func=cmd_relations_list)
    p = rel.add_parser("show")
    p.add_argument("ref", help="e.g. eps3[a=0,b=1,c=2]")
    p.set_defaults(func=cmd_relations_show)

    chk = sub.add_parser("check").add_subparsers(dest="sub", required=True)
    p = chk.add_parser("preserve")
    p.add_argument("--op", required=True)
    p.add_argument("--rel", required=True, help="relation file or named reference")
    p.set_defaults(func=cmd_check_preserve)

    cl = sub.add_parser("clone").add_subparsers(dest="sub", required=True)
    p = cl.add_parser("enumerate")
    p.add_argument("--spec", required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--limit", type=int, default=None, help="fail instead of listing more than this many")
    p.add_argument("--count", action="store_true", help="print only the number of members")
    p.set_defaults(func=cmd_clone_enumerate)
    p = cl.add_parser("member")
    p.add_argument("--spec", required=True)
    p.add_argument("--op", required=True)
    p.set_defaults(func=cmd_clone_member)

    mn = sub.add_parser("minor").add_subparsers(dest="sub", required=True)
    p = mn.add_parser("decide")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--rels", nargs="*", default=[])
    _add_budget(p)
    p.set_defaults(func=cmd_minor_decide)

    eq = sub.add_parser("equiv").add_subparsers(dest="sub", required=True)
    p = eq.add_parser("classes")
    p.add_argument("--rels", nargs="*", default=[])
    p.add_argument("--max-arity", type=int, default=2)
    p.add_argument("--out", default=None)
    p.add_argument("--figure", default=None, help="write a class-size histogram to this file")
    _add_budget(p)
    p.set_defaults(func=cmd_equiv_classes)

    cat = sub.add_parser("catalog").add_subparsers(dest="sub", required=True)
    p = cat.add_parser("instantiate")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--line", type=int, default=None)
    p.add_argument("--collisions", action="store_true", help="also report cross-line canonical collisions")
    p.set_defaults(func=cmd_catalog_instantiate)

    p = sub.add_parser("verify")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--lines", default=None, help="e.g. 1..3")
    p.add_argument("--out", default=None)
    p.add_argument("--figures", default=None, help="directory for the status chart")
    p.add_argument("--no-timings", action="store_true", help="zero the millis fields")
    p.add_argument("--quiet", action="store_true")
    _add_budget(p)
    p.set_defaults(func=cmd_verify)

    wt = sub.add_parser("witness").add_subparsers(dest="sub", required=True)
    p = wt.add_parser("build")
    p.add_argument("--lemma", required=True, choices=("26", "34", "35", "40"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--params", default=None, help="a=0,b=1,c=2")
    p.set_defaults(func=cmd_witness_build)
    p = wt.add_parser("facts")
    p.add_argument("--lemma", required=True, choices=("26", "35", "40"))
    p.add_argument("--p", required=True, help="e.g. 3..7")
    p.add_argument("--params", default=None)
    p.add_argument("--with-diagonal", action="store_true", help="lemma 26: also accept i = j")
    p.set_defaults(func=cmd_witness_facts)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
