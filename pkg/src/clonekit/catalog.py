"""The maximal and submaximal clones on a three-element set as data, their
instantiation over element relabelings, and the per-line verification
pipeline that produces a JSON report."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .clones import (
    BurleChain,
    CloneSpec,
    Generated,
    PolOf,
    UnsupportedArity,
    all_unary,
    contained_up_to,
    enumerate_tables,
    membership,
    separating_op,
    transformation_monoid_minus,
)
from .core import Operation, Relation, discriminator, essential_arity, preserves, restrict_relation
from .minor import Budget, PartialResultError, Verdict, enumerate_classes, is_minor
from .relations import (
    central_elements,
    cycle3,
    eps3,
    equivalence_blocks,
    gamma3,
    iota3,
    is_central,
    is_chain,
    is_equivalence,
    lambda2,
    lambda3,
    literal_relation,
    order2,
    order3,
    phi3,
    rosenberg_classify,
    subset,
    transposition2,
    transposition3,
)
from .core import pullback_relation
from . import witnesses as W

__all__ = [
    "CatalogEntry",
    "CatalogIntegrityError",
    "Instance",
    "LineInstantiation",
    "TABLE1",
    "TABLE2",
    "entry",
    "entries",
    "canonical_key",
    "instantiate_line",
    "cross_line_collisions",
    "VerifyBudget",
    "verify_entry",
    "run_verification",
    "report_json",
    "strip_timings",
    "derived_membership_groups",
    "covering_maximal",
    "tactic_label",
]


class CatalogIntegrityError(RuntimeError):
    """Instantiating a line did not give the printed number of clones."""


Params = Mapping[str, int]


@dataclass(frozen=True)
class CatalogEntry:
    table: int
    line: int
    text: str
    builder: Callable[[Params], CloneSpec]
    expected_count: int
    expected_in_F: bool
    tactic: str
    scheme: str = "abc"  # "abc", "abc+greek", "fixed" or "abc/a<c"
    restrict_to: tuple[str, str] | None = None
    lemma: str | None = None
    rosenberg: str | None = None

    def assignments(self) -> list[dict[str, int]]:
        perms = list(itertools.permutations(range(3)))
        if self.scheme == "fixed":
            return [{"a": 0, "b": 1, "c": 2}]
        out = []
        for a, b, c in perms:
            if self.scheme == "abc/a<c" and not a < c:
                continue
            if self.scheme == "abc+greek":
                for al, be, ga in perms:
                    out.append({"a": a, "b": b, "c": c, "alpha": al, "beta": be, "gamma": ga})
            else:
                out.append({"a": a, "b": b, "c": c})
        return out


# ---------------------------------------------------------------------------
# builders


def _pol(*rels: Relation) -> PolOf:
    return PolOf(tuple(rels))


def _unary(values: Sequence[int]) -> Operation:
    return Operation(3, 1, tuple(values))


def _max_op(a: int, b: int, c: int, use_max: bool = True) -> Operation:
    rank = {a: 0, b: 1, c: 2}
    pick = max if use_max else min
    return Operation.from_function(3, 2, lambda x, y: pick(x, y, key=rank.__getitem__))


def monotone_unary(a: int, b: int, c: int) -> list[Operation]:
    rho = order3(a, b, c)
    return [u for u in all_unary() if preserves(u, rho)]


def lattice_generated(p: Params, use_max: bool, reading: str = "monotone") -> Generated:
    """``<{max} u U>`` (or min) where U is the monotone unary maps (``reading="monotone"``)
    or all unary maps (``reading="printed"``)."""
    a, b, c = p["a"], p["b"], p["c"]
    unaries = monotone_unary(a, b, c) if reading == "monotone" else all_unary()
    return Generated((_max_op(a, b, c, use_max), *unaries), cap=2)


def _affine_unary() -> list[Operation]:
    rho = lambda3()
    return [u for u in all_unary() if preserves(u, rho)]


def _transposition_map(a: int, b: int) -> Operation:
    perm = list(range(3))
    perm[a], perm[b] = b, a
    return _unary(perm)


def _lit(line: int) -> Callable[[Params], CloneSpec]:
    return lambda p: _pol(literal_relation(line, p))


_T1 = [
    (1, "Pol {a}", lambda p: _pol(subset(3, [p["a"]])), 3, True, "discriminator", "central"),
    (2, "Pol {a, b}", lambda p: _pol(subset(3, sorted((p["a"], p["b"])))), 3, True, "discriminator", "central"),
    (3, "Pol pi_3^{012}", lambda p: _pol(cycle3(0, 1, 2)), 1, True, "discriminator", "prime-permutation"),
    (4, "Pol eps_3^{ab|c}", lambda p: _pol(eps3(p["a"], p["b"], p["c"])), 3, True, "eps-conditions", "nontrivial-equivalence"),
    (5, "Pol <=_3^{abc}", lambda p: _pol(order3(p["a"], p["b"], p["c"])), 3, False, "linmon-cited", "bounded-order"),
    (6, "Pol gamma_3^a", lambda p: _pol(gamma3(p["a"])), 3, True, "central-conditions", "central"),
    (7, "Pol lambda_3", lambda p: _pol(lambda3()), 1, False, "linmon-cited", "prime-affine"),
    (8, "Pol iota_3^3", lambda p: _pol(iota3()), 1, True, "burle", "h-regular"),
]

TABLE1: list[CatalogEntry] = [
    CatalogEntry(1, line, text, build, n, inF, tactic, "fixed" if n == 1 else "abc", rosenberg=ros)
    for line, text, build, n, inF, tactic, ros in _T1
]


def _e(line, text, build, n, inF, tactic, scheme="abc", B=None, lemma=None) -> CatalogEntry:
    return CatalogEntry(2, line, text, build, n, inF, tactic, scheme, B, lemma)


TABLE2: list[CatalogEntry] = [
    _e(1, "Pol {a} & Pol {b}", lambda p: _pol(subset(3, [p["a"]]), subset(3, [p["b"]])), 3, True, "discriminator"),
    _e(2, "Pol {a} & Pol {a, b}", lambda p: _pol(subset(3, [p["a"]]), subset(3, sorted((p["a"], p["b"])))), 6, True, "discriminator"),
    _e(3, "Pol {a} & Pol {b, c}", lambda p: _pol(subset(3, [p["a"]]), subset(3, sorted((p["b"], p["c"])))), 3, True, "discriminator"),
    _e(4, "Pol {a} & Pol eps_3^{bc|a}", lambda p: _pol(subset(3, [p["a"]]), eps3(p["b"], p["c"], p["a"])), 3, True, "eps-conditions"),
    _e(5, "Pol {a} & Pol gamma_3^a", lambda p: _pol(subset(3, [p["a"]]), gamma3(p["a"])), 3, True, "central-conditions"),
    _e(6, "Pol {a} & Pol <=_3^{abc}", lambda p: _pol(subset(3, [p["a"]]), order3(p["a"], p["b"], p["c"])), 6, False, "linmon-cited"),
    _e(7, "Pol {a} & Pol lambda_3", lambda p: _pol(subset(3, [p["a"]]), lambda3()), 3, False, "linmon-cited"),
    _e(8, "Pol {a} & Pol pi_3^{012}", lambda p: _pol(subset(3, [p["a"]]), cycle3(0, 1, 2)), 1, True, "discriminator"),
    _e(9, "Pol {a, b} & Pol eps_3^{ab|c}", lambda p: _pol(subset(3, sorted((p["a"], p["b"]))), eps3(p["a"], p["b"], p["c"])), 3, True, "eps-conditions"),
    _e(10, "Pol {a, b} & Pol eps_3^{ac|b}", lambda p: _pol(subset(3, sorted((p["a"], p["b"]))), eps3(p["a"], p["c"], p["b"])), 6, True, "eps-conditions"),
    _e(11, "Pol {a, b} & Pol <=_3^{alpha beta gamma}",
       lambda p: _pol(subset(3, sorted((p["a"], p["b"]))), order3(p["alpha"], p["beta"], p["gamma"])), 9, False, "linmon-cited", "abc+greek"),
    _e(12, "Pol {a, b} & Pol gamma_3^alpha",
       lambda p: _pol(subset(3, sorted((p["a"], p["b"]))), gamma3(p["alpha"])), 9, False, "central-conditions", "abc+greek"),
    _e(13, "Pol eps_3^{ab|c} & Pol <=_3^{abc}", lambda p: _pol(eps3(p["a"], p["b"], p["c"]), order3(p["a"], p["b"], p["c"])), 6, False, "linmon-cited"),
    _e(14, "Pol eps_3^{ab|c} & Pol gamma_3^a", lambda p: _pol(eps3(p["a"], p["b"], p["c"]), gamma3(p["a"])), 6, False, "central-conditions"),
    _e(15, "Pol <=_3^{abc} & Pol gamma_3^alpha",
       lambda p: _pol(order3(p["a"], p["b"], p["c"]), gamma3(p["alpha"])), 9, False, "linmon-cited", "abc+greek"),
    _e(16, "Pol <=_3^{abc} & Pol iota_3^3", lambda p: _pol(order3(p["a"], p["b"], p["c"]), iota3()), 3, False, "linmon-cited"),
    _e(17, "Pol pi_3^{012} & Pol lambda_3", lambda p: _pol(cycle3(0, 1, 2), lambda3()), 1, False, "linmon-cited", "fixed"),
    _e(18, "Pol pi_3^{ab}", lambda p: _pol(transposition3(p["a"], p["b"])), 3, True, "discriminator"),
    _e(19, "Pol (line 19 matrix)", _lit(19), 3, False, "restriction", B=("a", "b")),
    _e(20, "Pol (line 20 matrix)", _lit(20), 3, False, "restriction", B=("a", "b")),
    _e(21, "Pol <=_2^{ab}", lambda p: _pol(order2(p["a"], p["b"])), 3, False, "restriction", B=("a", "b")),
    _e(22, "Pol pi_2^{ab}", lambda p: _pol(transposition2(p["a"], p["b"])), 3, True, "discriminator"),
    _e(23, "Pol lambda_2^{ab}", lambda p: _pol(lambda2(p["a"], p["b"])), 3, False, "restriction", B=("a", "b")),
    _e(24, "Pol (line 24 matrix)", _lit(24), 6, True, "lemma", lemma="24P"),
    _e(25, "Pol (line 25 matrix)", _lit(25), 3, False, "restriction", B=("a", "c")),
    _e(26, "Pol (line 26 matrix)", _lit(26), 3, False, "lemma", lemma="26"),
    _e(27, "Pol (line 27 matrix)", _lit(27), 3, True, "lemma", lemma="27Q"),
    _e(28, "<{max} u unary maps> inside Pol <=_3^{abc}", lambda p: lattice_generated(p, True), 3, False, "linmon-cited", "abc/a<c"),
    _e(29, "<{min} u unary maps> inside Pol <=_3^{abc}", lambda p: lattice_generated(p, False), 3, False, "linmon-cited", "abc/a<c"),
    _e(30, "<(Pol lambda_3)^(1)>", lambda p: Generated(tuple(_affine_unary()), cap=2), 1, False, "linmon-cited", "fixed"),
    _e(31, "Pol (line 31 matrix)", _lit(31), 3, False, "restriction", B=("a", "b")),
    _e(32, "Pol (phi^-1 o pi_2^{01} o phi), phi = phi_3^{ab|c}",
       lambda p: _pol(pullback_relation(transposition2(0, 1, 2), phi3(p["a"], p["b"], p["c"]))), 3, True, "lemma", lemma="32"),
    _e(33, "Pol (line 33 matrix)", _lit(33), 3, False, "restriction", B=("a", "c")),
    _e(34, "Pol (line 34 matrix)", _lit(34), 3, False, "lemma", lemma="34"),
    _e(35, "Pol (line 35 matrix)", _lit(35), 3, False, "lemma", lemma="35"),
    _e(36, "Pol (lambda_2^{ab} u {c}^4)",
       lambda p: _pol(Relation(3, 4, lambda2(p["a"], p["b"]).bits | 1 << (40 * p["c"]))), 3, False, "restriction", B=("a", "b")),
    _e(37, "Pol (phi^-1 o lambda_2^{01} o phi), phi = phi_3^{ab|c}",
       lambda p: _pol(pullback_relation(lambda2(0, 1, 2), phi3(p["a"], p["b"], p["c"]))), 3, False, "restriction", B=("a", "c")),
    _e(38, "Pol (line 38 matrix)", _lit(38), 3, False, "restriction", B=("a", "b")),
    _e(39, "Pol (line 39 matrix)", _lit(39), 3, False, "restriction", B=("b", "c")),
    _e(40, "Pol (line 40 matrix)", _lit(40), 3, False, "lemma", lemma="40"),
    _e(41, "B_2(T_3^- u {pi_3^{ab}})",
       lambda p: BurleChain(2, (*transformation_monoid_minus(), _transposition_map(p["a"], p["b"]))), 3, True, "burle"),
    _e(42, "B_2(T_3^- u {pi_3^{012}, pi_3^{021}})",
       lambda p: BurleChain(2, (*transformation_monoid_minus(), _unary((1, 2, 0)), _unary((2, 0, 1)))), 1, True, "burle", "fixed"),
    _e(43, "B_1", lambda p: BurleChain(1, None), 1, False, "burle", "fixed"),
]


def entry(table: int, line: int) -> CatalogEntry:
    src = TABLE1 if table == 1 else TABLE2 if table == 2 else None
    if src is None:
        raise ValueError("table must be 1 or 2")
    for e in src:
        if e.line == line:
            return e
    raise ValueError(f"table {table} has no line {line}")


def entries(table: int, lines: Iterable[int] | None = None) -> list[CatalogEntry]:
    src = TABLE1 if table == 1 else TABLE2
    if lines is None:
        return list(src)
    wanted = set(lines)
    bad = wanted - {e.line for e in src}
    if bad:
        raise ValueError(f"table {table} has no lines {sorted(bad)}")
    return [e for e in src if e.line in wanted]


# ---------------------------------------------------------------------------
# canonical descriptions and instantiation


def _canonical_relation(rho: Relation) -> tuple:
    """Least tuple list over all coordinate permutations; Pol is blind to that choice."""
    best = min(
        tuple(sorted(rho.permute_coordinates(perm).indices))
        for perm in itertools.permutations(range(rho.arity))
    )
    return (rho.arity, best)


def canonical_key(spec: CloneSpec) -> tuple:
    if isinstance(spec, PolOf):
        return ("pol", tuple(sorted({_canonical_relation(r) for r in spec.relations})))
    if isinstance(spec, Generated):
        return ("gen", spec.cap, tuple(sorted({g.table for g in spec.generators})))
    if isinstance(spec, BurleChain):
        mon = None if spec.monoid is None else tuple(sorted(u.table for u in spec.monoid))
        return ("burle", spec.level, mon)
    raise TypeError(f"no canonical form for {spec!r}")


@dataclass
class Instance:
    params: dict[str, int]
    spec: CloneSpec
    key: tuple

    def label(self) -> str:
        return ",".join(f"{k}={v}" for k, v in self.params.items())


@dataclass
class LineInstantiation:
    entry: CatalogEntry
    instances: list[Instance]
    descriptions: int
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.instances)


def instantiate_line(table: int, line: int, check_distinct: bool = True, strict: bool = True) -> LineInstantiation:
    """All clones a line stands for, one per distinct clone.

    Descriptions are first deduplicated by canonical form.  The survivors are
    then compared by their parts of arity <= 2; pairs that agree there are
    compared at arity 3 and, if still equal, merged with a warning.
    """
    e = entry(table, line)
    seen: dict[tuple, Instance] = {}
    for p in e.assignments():
        spec = e.builder(p)
        key = canonical_key(spec)
        if key not in seen:
            seen[key] = Instance(p, spec, key)
    survivors = list(seen.values())
    warnings: list[str] = []
    if check_distinct and len(survivors) > 1:
        kept: list[Instance] = []
        for inst in survivors:
            merged = False
            for other in kept:
                if separating_op(inst.spec, other.spec, 2) is not None:
                    continue
                try:
                    sep3 = separating_op(inst.spec, other.spec, 3)
                except UnsupportedArity:
                    warnings.append(f"{inst.label()} and {other.label()} agree up to arity 2; arity 3 not comparable")
                    continue
                if sep3 is None:
                    warnings.append(f"{inst.label()} and {other.label()} agree up to arity 3; treated as one clone")
                    merged = True
                    break
                warnings.append(f"{inst.label()} and {other.label()} first differ at arity 3")
            if not merged:
                kept.append(inst)
        survivors = kept
    result = LineInstantiation(e, survivors, len(seen), warnings)
    if strict and len(survivors) != e.expected_count:
        raise CatalogIntegrityError(
            f"table {table} line {line}: {len(survivors)} clones, expected {e.expected_count}"
        )
    return result


def cross_line_collisions(table: int = 2) -> list[tuple[int, int, tuple]]:
    """Canonical descriptions that occur in more than one line (expected: none)."""
    owner: dict[tuple, int] = {}
    out = []
    for e in entries(table):
        for p in e.assignments():
            key = canonical_key(e.builder(p))
            if key in owner and owner[key] != e.line:
                out.append((owner[key], e.line, key))
            owner.setdefault(key, e.line)
    return out


def _tables_upto(spec: CloneSpec, n: int) -> list[frozenset]:
    return [frozenset(map(tuple, enumerate_tables(spec, m).tolist())) for m in range(1, n + 1)]


def covering_maximal(spec: CloneSpec, n: int = 2) -> tuple[int, str, Operation] | None:
    """A Table 1 clone containing ``spec`` at arities <= n together with a member
    of that maximal clone missing from ``spec``, or None if there is none."""
    mine = _tables_upto(spec, n)
    for e in TABLE1:
        for inst in instantiate_line(1, e.line, check_distinct=False).instances:
            theirs = _tables_upto(inst.spec, n)
            if all(a <= b for a, b in zip(mine, theirs)):
                for m, (a, b) in enumerate(zip(mine, theirs), start=1):
                    extra = sorted(b - a)
                    if extra:
                        return e.line, inst.label(), Operation(3, m, extra[0])
    return None


def derived_membership_groups() -> dict[str, list[int]]:
    """Table 2 lines grouped the way the membership theorem lists them, read off the catalog."""
    out: dict[str, list[int]] = {"in": [], "out": []}
    for e in TABLE2:
        out["in" if e.expected_in_F else "out"].append(e.line)
    return out


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerifyBudget:
    solver: Budget = Budget()
    classes: Budget = Budget(max_nodes=10**6, max_seconds=60)
    # the unproven direction is only reported; None skips it
    reverse: Budget | None = Budget(max_nodes=10**5, max_seconds=10)
    fact_range: tuple[int, ...] = (3, 4, 5, 6, 7)


class _Checks:
    def __init__(self) -> None:
        self.items: list[dict[str, Any]] = []

    def add(self, name: str, result: str, detail: str = "", t0: float | None = None) -> None:
        millis = int((time.monotonic() - t0) * 1000) if t0 is not None else 0
        item = {"name": name, "result": result, "millis": millis}
        if detail:
            item["detail"] = detail
        self.items.append(item)

    def check(self, name: str, ok: bool, detail: str = "", t0: float | None = None) -> bool:
        self.add(name, "pass" if ok else "fail", detail, t0)
        return ok


_CITED = {"linmon-cited", "burle", "henno-cited"}


def _relations_of(spec: CloneSpec) -> tuple[Relation, ...]:
    if not isinstance(spec, PolOf):
        raise TypeError("tactic needs a Pol description")
    return spec.relations


def tactic_label(e: CatalogEntry) -> str:
    if e.tactic == "restriction":
        return "restriction({" + ",".join(e.restrict_to or ()) + "})"
    if e.tactic == "lemma":
        return "lemma" + "".join(ch for ch in (e.lemma or "") if ch.isdigit())
    return e.tactic


def verify_entry(e: CatalogEntry, budget: VerifyBudget | None = None) -> dict[str, Any]:
    budget = budget or VerifyBudget()
    inst = instantiate_line(e.table, e.line)
    checks = _Checks()
    notes: list[str] = list(inst.warnings)
    handler = _TACTICS[e.tactic]
    handler(e, inst, checks, budget, notes)
    results = {c["result"] for c in checks.items}
    if "fail" in results:
        status = "discrepancy"
    elif "timeout" in results:
        status = "timeout"
    elif e.tactic in _CITED:
        status = "expected-recorded"
    else:
        status = "verified"
    return {
        "table": e.table,
        "line": e.line,
        "params": [i.label() for i in inst.instances],
        "status": status,
        "tactic": tactic_label(e),
        "expected_in_F": e.expected_in_F,
        "checks": checks.items,
        "notes": notes,
    }


def _tactic_discriminator(e, inst, checks, budget, notes) -> None:
    t3 = discriminator(3)
    for i in inst.instances:
        t0 = time.monotonic()
        checks.check(f"t3 preserves all relations [{i.label()}]", all(preserves(t3, r) for r in _relations_of(i.spec)), t0=t0)


def _decompose(rels: Sequence[Relation]):
    E, G, S, other = [], [], [], []
    for r in rels:
        if r.arity == 1:
            S.append(r)
        elif is_equivalence(r):
            E.append(r)
        elif rosenberg_classify(r).tag == "prime-permutation" or (
            r.arity == 2 and len(r) == r.k and len({x for x, _ in r}) == r.k and len({y for _, y in r}) == r.k
        ):
            G.append(r)
        else:
            other.append(r)
    return E, G, S, other


def _tactic_eps(e, inst, checks, budget, notes) -> None:
    for i in inst.instances:
        t0 = time.monotonic()
        E, G, S, other = _decompose(_relations_of(i.spec))
        checks.check(f"decomposes as (E, Gamma, Sigma) [{i.label()}]", not other, t0=t0)
        checks.check(f"E is a chain [{i.label()}]", is_chain(E) if E else True)
        ok = all(preserves(Operation(3, 1, tuple(y for _, y in sorted(g))), eq) for g in G for eq in E)
        checks.check(f"Gamma preserves E [{i.label()}]", ok)
        # the criterion's conclusion must match the printed column
        checks.check(f"criterion gives {e.expected_in_F} [{i.label()}]", (not other and (is_chain(E) if E else True) and ok) == e.expected_in_F)


def _tactic_central(e, inst, checks, budget, notes) -> None:
    for i in inst.instances:
        rels = _relations_of(i.spec)
        central = [r for r in rels if r.arity == 2 and r.arity > 1 and is_central(r)]
        t0 = time.monotonic()
        if not checks.check(f"binary (k-1)-ary central relation present [{i.label()}]", len(central) == 1, t0=t0):
            continue
        rho = central[0]
        centers = central_elements(rho)
        if not checks.check(f"unique center [{i.label()}]", len(centers) == 1, detail=f"centers {sorted(centers)}"):
            continue
        (c,) = centers
        rest = [r for r in rels if r is not rho]
        if not rest:
            derived, why = True, "maximal clone of a (k-1)-ary central relation"
        elif rest[0].arity == 1:
            S = {t[0] for t in rest[0]}
            derived = S == {c}
            why = f"S = {sorted(S)}, center {c}"
        elif is_equivalence(rest[0]):
            derived, why = False, f"nontrivial equivalence {[sorted(b) for b in equivalence_blocks(rest[0])]}"
        else:
            checks.check(f"second relation is a subset or an equivalence [{i.label()}]", False)
            continue
        checks.check(f"criterion gives {e.expected_in_F} [{i.label()}]", derived == e.expected_in_F, detail=why)


def _tactic_restriction(e, inst, checks, budget, notes) -> None:
    t2 = discriminator(2)
    for i in inst.instances:
        B = sorted(i.params[s] for s in e.restrict_to)
        (rho,) = _relations_of(i.spec)
        t0 = time.monotonic()
        rb = restrict_relation(rho, B)
        checks.check(
            f"2-element discriminator fails on the restriction to {B} [{i.label()}]",
            not preserves(t2, rb),
            detail=f"restriction {sorted(rb.tuples)}",
            t0=t0,
        )


def _tactic_lemma(e, inst, checks, budget, notes) -> None:
    lemma = e.lemma
    if lemma in ("24P", "27Q", "32"):
        _lemma_finite(e, inst, checks, budget, notes)
    else:
        _lemma_infinite(e, inst, checks, budget, notes)


def _lemma_finite(e, inst, checks, budget, notes) -> None:
    import functools

    for i in inst.instances:
        params = {k: i.params[k] for k in "abc"}
        rels = _relations_of(i.spec)
        sig = functools.partial(W.signature, kind=e.lemma, params=params)
        t0 = time.monotonic()
        try:
            part = enumerate_classes(rels, 2, budget.classes, hint=sig)
        except PartialResultError as exc:
            checks.add(f"classes at arity <= 2 [{i.label()}]", "timeout", str(exc), t0)
            continue
        by_sig: dict[Any, set[int]] = {}
        for ci, cls in enumerate(part.classes):
            for f in cls:
                by_sig.setdefault(sig(f), set()).add(ci)
        split = [s for s, cs in by_sig.items() if len(cs) > 1]
        mixed = [ci for ci, cls in enumerate(part.classes) if len({sig(f) for f in cls}) > 1]
        # only "same signature => equivalent" is claimed; classes may merge signatures
        checks.add(
            f"classes carrying several signatures [{i.label()}]",
            "info",
            f"{len(mixed)} of {len(part)}",
        )
        checks.check(
            f"equal signature implies equivalent [{i.label()}]",
            not split,
            detail=f"{len(part)} classes, {len(by_sig)} signatures, {part.solver_calls} solver calls",
            t0=t0,
        )


def _fact_checker(lemma: str):
    return {"26": W.check_fact_26, "35": W.check_fact_35, "40": W.check_fact_40}.get(lemma)


def _lemma_infinite(e, inst, checks, budget, notes) -> None:
    lemma = e.lemma
    small, large = (3, 5) if lemma == "40" else (3, 4)
    fact = _fact_checker(lemma)
    for i in inst.instances:
        params = {k: i.params[k] for k in "abc"}
        if fact is not None:
            ps = [p for p in budget.fact_range if lemma != "40" or p % 2 == 1]
            if lemma == "40":
                ps = sorted(set(ps) | {9})
            t0 = time.monotonic()
            bad = [p for p in ps if not fact(p, params)]
            checks.check(f"relatedness criterion as printed, p in {ps} [{i.label()}]", not bad, detail=f"fails for p = {bad}" if bad else "", t0=t0)
            if bad and lemma == "26":
                ok = all(W.check_fact_26(p, params, include_diagonal=True) for p in ps)
                checks.add(
                    f"relatedness criterion with i = j added [{i.label()}]",
                    "pass" if ok else "fail",
                    "every (e_i, e_i, d_l) is related since the relation contains all (x, x, y) columns",
                )
        tup = (params["a"], params["b"], params["c"])
        fn = W.build_family(W.WitnessFamily(lemma, small, tup))
        fm = W.build_family(W.WitnessFamily(lemma, large, tup))
        rels = _relations_of(i.spec)
        t0 = time.monotonic()
        res = is_minor(fn, fm, rels, budget.solver)
        name = f"f_{small} is not a minor of f_{large} [{i.label()}]"
        if res.verdict is Verdict.UNKNOWN:
            checks.add(name, "timeout", res.reason, t0)
        else:
            checks.check(name, res.verdict is Verdict.NO, detail=f"{res.nodes} nodes", t0=t0)
        if budget.reverse is None:
            continue
        t0 = time.monotonic()
        rev = is_minor(fm, fn, rels, budget.reverse)
        detail = f"{rev.verdict.value} after {rev.nodes} nodes" if rev.verdict is not Verdict.UNKNOWN else "unknown (budget exhausted)"
        checks.add(f"reverse direction f_{large} vs f_{small} [{i.label()}]", "info", detail, t0)


def _bounded_or_affine(rels: Sequence[Relation]) -> list[str]:
    return [t for t in (rosenberg_classify(r).tag for r in rels) if t in ("bounded-order", "prime-affine")]


def _tactic_linmon(e, inst, checks, budget, notes) -> None:
    for i in inst.instances:
        spec = i.spec
        t0 = time.monotonic()
        if isinstance(spec, PolOf):
            tags = _bounded_or_affine(spec.relations)
            checks.check(f"a bounded order or prime affine relation is among the defining relations [{i.label()}]", bool(tags), detail=", ".join(tags), t0=t0)
            continue
        if e.line in (28, 29):
            a, b, c = i.params["a"], i.params["b"], i.params["c"]
            target = PolOf((order3(a, b, c),))
            sep = contained_up_to(spec, target, 2)
            checks.check(f"<{{{'max' if e.line == 28 else 'min'}}} u monotone unary maps> inside Pol <= at arity <= 2 [{i.label()}]", sep is None, t0=t0)
            printed = lattice_generated(i.params, e.line == 28, reading="printed")
            t0 = time.monotonic()
            sep2 = contained_up_to(printed, target, 2)
            checks.add(
                f"printed generator set <{{{'max' if e.line == 28 else 'min'}}} u O^(1)> inside Pol <= at arity <= 2 [{i.label()}]",
                "info",
                "holds" if sep2 is None else f"fails, e.g. {sep2.table!r} is generated but not monotone",
                t0,
            )
            if sep2 is not None:
                notes.append(
                    "the generator set printed with all unary maps is not contained in Pol <=; "
                    "the monotone unary maps are used instead"
                )
            continue
        if e.line == 30:
            sep = contained_up_to(spec, PolOf((lambda3(),)), 2)
            checks.check("<(Pol lambda_3)^(1)> inside Pol lambda_3 at arity <= 2", sep is None, t0=t0)
            continue
        raise AssertionError(f"no linmon check for line {e.line}")


def _tactic_burle(e, inst, checks, budget, notes) -> None:
    tminus = BurleChain(2, tuple(transformation_monoid_minus()))
    iota = PolOf((iota3(),))
    for i in inst.instances:
        spec = i.spec
        t0 = time.monotonic()
        checks.check(f"contains T_3^- [{i.label()}]", all(membership(spec, u) for u in transformation_monoid_minus()), t0=t0)
        t0 = time.monotonic()
        sep = contained_up_to(tminus, spec, 2)
        derived = sep is None
        checks.check(
            f"B_2(T_3^-) inside the clone at arity <= 2 is {e.expected_in_F} [{i.label()}]",
            derived == e.expected_in_F,
            detail="" if sep is None else f"separator {sep.table} of essential arity {essential_arity(sep)}",
            t0=t0,
        )
        t0 = time.monotonic()
        if isinstance(spec, BurleChain):
            checks.check(f"inside Pol iota_3^3 at arity <= 2 [{i.label()}]", contained_up_to(spec, iota, 2) is None, t0=t0)
        else:
            # the maximal clone itself: Slupecki's description
            ok = all(
                membership(spec, f) == (len(set(f.table)) <= 2 or essential_arity(f) <= 1)
                for n in (1, 2)
                for f in (Operation(3, n, tuple(t)) for t in itertools.product(range(3), repeat=3**n))
            )
            checks.check("Pol iota_3^3 = range <= 2 or essentially unary, arity <= 2", ok, t0=t0)


_TACTICS = {
    "discriminator": _tactic_discriminator,
    "eps-conditions": _tactic_eps,
    "central-conditions": _tactic_central,
    "restriction": _tactic_restriction,
    "lemma": _tactic_lemma,
    "linmon-cited": _tactic_linmon,
    "burle": _tactic_burle,
}


def _rosenberg_check(e: CatalogEntry, inst: LineInstantiation) -> dict[str, Any]:
    tags = [rosenberg_classify(r).tag for i in inst.instances for r in _relations_of(i.spec)]
    ok = all(t == e.rosenberg for t in tags)
    return {"name": f"Rosenberg type is {e.rosenberg}", "result": "pass" if ok else "fail", "millis": 0}


def run_verification(
    table: int,
    lines: Iterable[int] | None = None,
    budget: VerifyBudget | None = None,
    progress: Callable[[dict], None] | None = None,
) -> dict[str, Any]:
    out = []
    for e in entries(table, lines):
        rep = verify_entry(e, budget)
        if table == 1:
            inst = instantiate_line(1, e.line)
            rep["checks"].insert(0, _rosenberg_check(e, inst))
            if rep["checks"][0]["result"] == "fail":
                rep["status"] = "discrepancy"
        out.append(rep)
        if progress:
            progress(rep)
    totals: dict[str, int] = {}
    for rep in out:
        totals[rep["status"]] = totals.get(rep["status"], 0) + 1
    return {
        "table": table,
        "entries": out,
        "instances": sum(len(r["params"]) for r in out),
        "totals": dict(sorted(totals.items())),
    }


def strip_timings(report: dict[str, Any]) -> dict[str, Any]:
    rep = json.loads(json.dumps(report))
    for e in rep.get("entries", []):
        for c in e["checks"]:
            c["millis"] = 0
    return rep


def report_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"
