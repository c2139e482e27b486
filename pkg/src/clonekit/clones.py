"""Intensional clone descriptions: membership, bounded-arity enumeration,
generated closures and transformation-monoid closures."""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .core import (
    Operation,
    Relation,
    compose,
    parse_table,
    points,
    preserves_tables,
    projection,
    read_relation,
    unary_collapse,
)
from .minor import Budget, BudgetExceeded, solve_all
from .relations import parse_relation_ref

__all__ = [
    "CapExceeded",
    "UnsupportedArity",
    "PolOf",
    "Intersection",
    "Generated",
    "BurleChain",
    "CloneSpec",
    "membership",
    "enumerate_ops",
    "enumerate_tables",
    "generate_closure",
    "Closure",
    "monoid_closure",
    "all_unary",
    "transformation_monoid_minus",
    "is_quasilinear",
    "is_quasilinear_exhaustive",
    "clones_equal_up_to",
    "separating_op",
    "contained_up_to",
    "parse_spec",
    "load_relation",
]


class CapExceeded(ValueError):
    """A generated clone was queried above its arity cap."""


class UnsupportedArity(ValueError):
    """Enumeration was requested at an arity the description cannot handle."""


# ---------------------------------------------------------------------------
# descriptions


@dataclass(frozen=True)
class PolOf:
    relations: tuple[Relation, ...]
    k: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", tuple(self.relations))
        if any(r.k != self.k for r in self.relations):
            raise ValueError("universe mismatch")


@dataclass(frozen=True)
class Intersection:
    parts: tuple["CloneSpec", ...]
    k: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("empty intersection")
        if any(p.k != self.k for p in self.parts):
            raise ValueError("universe mismatch")


@dataclass(frozen=True)
class Generated:
    generators: tuple[Operation, ...]
    cap: int = 2
    k: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        if any(g.k != self.k for g in self.generators):
            raise ValueError("universe mismatch")
        if self.cap < 1:
            raise ValueError("arity cap must be >= 1")


@dataclass(frozen=True)
class BurleChain:
    """``B_level(M)``; ``monoid=None`` means the full transformation monoid."""

    level: int
    monoid: tuple[Operation, ...] | None = None
    k: int = 3

    def __post_init__(self) -> None:
        if not 0 <= self.level <= self.k:
            raise ValueError(f"Burle level must be in 0..{self.k}")
        if self.monoid is not None:
            ms = tuple(monoid_closure(self.monoid, self.k))
            object.__setattr__(self, "monoid", ms)

    @functools.cached_property
    def unary_tables(self) -> frozenset[tuple[int, ...]]:
        ms = self.monoid if self.monoid is not None else all_unary(self.k)
        return frozenset(m.table for m in ms)


CloneSpec = Union[PolOf, Intersection, Generated, BurleChain]


# ---------------------------------------------------------------------------
# unary maps and monoids


def all_unary(k: int = 3) -> list[Operation]:
    return [Operation(k, 1, t) for t in itertools.product(range(k), repeat=k)]


def transformation_monoid_minus(k: int = 3) -> list[Operation]:
    """Identity plus all non-permutations."""
    return [u for u in all_unary(k) if len(set(u.table)) < k or u.table == tuple(range(k))]


def monoid_closure(maps: Iterable[Operation], k: int | None = None) -> list[Operation]:
    """Closure of ``maps`` and the identity under composition, sorted by table."""
    maps = list(maps)
    if k is None:
        k = maps[0].k if maps else 3
    if any(u.arity != 1 or u.k != k for u in maps):
        raise ValueError("monoid generators must be unary maps on the same universe")
    gens = {u.table for u in maps}
    seen = {tuple(range(k))} | gens
    frontier = list(seen)
    while frontier:
        nxt = []
        for s in frontier:
            for g in gens:
                for t in (tuple(g[x] for x in s), tuple(s[x] for x in g)):
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
        frontier = nxt
    return [Operation(k, 1, t) for t in sorted(seen)]


# ---------------------------------------------------------------------------
# quasilinearity


def is_quasilinear(f: Operation) -> bool:
    """Is ``f = g(h_1(x_1) xor ... xor h_n(x_n))`` for some ``h_i: A -> {0,1}``, ``g: {0,1} -> A``?

    Such an f has at most two values, and for a two-valued f the indicator of
    one value must be a xor of unary functions.  A xor-separable 0/1 function
    is determined by its values on the lines through the all-zero point, which
    gives a direct test.
    """
    vals = sorted(set(f.table))
    if len(vals) > 2:
        return False
    if len(vals) == 1:
        return True
    k, n = f.k, f.arity
    F = (f.array == vals[1]).astype(np.int64).reshape((k,) * n)
    base = F[(0,) * n]
    acc = np.full((k,) * n, base, dtype=np.int64)
    for i in range(n):
        idx = [0] * n
        idx[i] = slice(None)
        line = F[tuple(idx)] ^ base  # h_i normalised so that h_i(0) = 0
        shape = [1] * n
        shape[i] = k
        acc = acc ^ line.reshape(shape)
    return bool((acc == F).all())


def is_quasilinear_exhaustive(f: Operation) -> bool:
    """The same question decided by trying every ``g`` and every tuple of ``h_i``."""
    k, n = f.k, f.arity
    pts = points(k, n)
    hs = list(itertools.product((0, 1), repeat=k))
    for g in itertools.product(range(k), repeat=2):
        for choice in itertools.product(hs, repeat=n):
            ok = True
            for p, v in zip(pts.tolist(), f.table):
                s = 0
                for i in range(n):
                    s ^= choice[i][p[i]]
                if g[s] != v:
                    ok = False
                    break
            if ok:
                return True
    return False


# ---------------------------------------------------------------------------
# membership


def membership(C: CloneSpec, f: Operation) -> bool:
    if f.k != C.k:
        raise ValueError("universe mismatch")
    if isinstance(C, PolOf):
        return all(bool(preserves_tables(f.array[None, :], r)[0]) for r in C.relations)
    if isinstance(C, Intersection):
        return all(membership(p, f) for p in C.parts)
    if isinstance(C, Generated):
        if f.arity > C.cap:
            raise CapExceeded(f"arity {f.arity} exceeds the cap {C.cap} of the generated clone")
        return f.table in _closure_for(C).tables(f.arity)
    if isinstance(C, BurleChain):
        return _burle_member(C, f)
    raise TypeError(f"not a clone description: {C!r}")


def _burle_member(C: BurleChain, f: Operation) -> bool:
    u = unary_collapse(f)
    if u is not None:
        # essentially at most unary: in <M> or omitted
        return u.table in C.unary_tables
    if C.level == 0:
        return False
    if C.level == 1:
        return is_quasilinear(f)
    return len(set(f.table)) <= C.level


# ---------------------------------------------------------------------------
# enumeration


def _all_tables(k: int, n: int) -> np.ndarray:
    return points(k, k**n)


def enumerate_tables(C: CloneSpec, n: int, limit: int | None = None) -> np.ndarray:
    """Value tables of ``C^(n)`` as an array, in ascending (lexicographic) order.

    With ``limit``, a part with more than ``limit`` members raises
    ``CapExceeded`` instead of being materialised in full.
    """
    if limit is None:
        return _cached_tables(C, n)
    try:
        out = _enumerate_tables(C, n, limit)
    except UnsupportedArity as exc:
        if isinstance(exc.__cause__, BudgetExceeded):
            raise CapExceeded(f"more than {limit} operations of arity {n}") from exc
        raise
    if len(out) > limit:
        raise CapExceeded(f"more than {limit} operations of arity {n}")
    return out


@functools.lru_cache(maxsize=1024)
def _cached_tables(C: CloneSpec, n: int) -> np.ndarray:
    out = _enumerate_tables(C, n, None)
    out.setflags(write=False)
    return out


def _enumerate_tables(C: CloneSpec, n: int, limit: int | None) -> np.ndarray:
    if n < 1:
        raise ValueError("arity must be >= 1")
    k = C.k
    if isinstance(C, PolOf):
        if n <= 2:
            tabs = _all_tables(k, n)
            keep = np.ones(len(tabs), dtype=bool)
            for r in C.relations:
                keep[keep] = preserves_tables(tabs[keep], r)
            return tabs[keep]
        if n == 3:
            try:
                rows = solve_all(k, 3, C.relations, Budget(max_nodes=10**7, max_seconds=600), limit=limit)
            except BudgetExceeded as exc:
                raise UnsupportedArity(f"ternary enumeration gave up: {exc}") from exc
            return np.array(rows, dtype=np.int64).reshape(-1, k**3)
        raise UnsupportedArity(f"Pol enumeration supports arity <= 3, not {n}")
    if isinstance(C, Intersection):
        pols = [p for p in C.parts if isinstance(p, PolOf)]
        others = [p for p in C.parts if not isinstance(p, PolOf)]
        if pols:
            base = enumerate_tables(PolOf(tuple(r for p in pols for r in p.relations), k), n, limit)
        else:
            base = enumerate_tables(others[0], n, limit)
            others = others[1:]
        keep = [i for i, t in enumerate(base.tolist()) if all(membership(p, Operation(k, n, tuple(t))) for p in others)]
        return base[keep]
    if isinstance(C, Generated):
        if n > C.cap:
            raise CapExceeded(f"arity {n} exceeds the cap {C.cap} of the generated clone")
        return _closure_for(C).array(n)
    if isinstance(C, BurleChain):
        if n > 2:
            raise UnsupportedArity("Burle-chain enumeration supports arity <= 2")
        tabs = _all_tables(k, n)
        keep = [i for i, t in enumerate(tabs.tolist()) if _burle_member(C, Operation(k, n, tuple(t)))]
        return tabs[keep]
    raise TypeError(f"not a clone description: {C!r}")


def enumerate_ops(C: CloneSpec, n: int, limit: int | None = None) -> list[Operation]:
    return [Operation(C.k, n, tuple(t)) for t in enumerate_tables(C, n, limit).tolist()]


# ---------------------------------------------------------------------------
# generated clones


@dataclass
class Closure:
    """Per-arity parts of ``<F>`` with a derivation for every element.

    ``derivation[n][i]`` is ``None`` for the ``i``-th projection, otherwise
    ``(g, children)``: element ``i`` equals ``generators[g]`` applied to the
    elements ``children`` of the same arity.
    """

    k: int
    generators: tuple[Operation, ...]
    cap: int
    parts: dict[int, np.ndarray] = field(default_factory=dict)
    derivation: dict[int, list] = field(default_factory=dict)

    def array(self, n: int) -> np.ndarray:
        if n not in self.parts:
            raise CapExceeded(f"arity {n} exceeds the cap {self.cap}")
        tabs = self.parts[n]
        return tabs[np.lexsort(tabs.T[::-1])] if len(tabs) else tabs

    def tables(self, n: int) -> frozenset[tuple[int, ...]]:
        cache = self.__dict__.setdefault("_table_sets", {})
        if n not in cache:
            cache[n] = frozenset(tuple(t) for t in self.array(n).tolist())
        return cache[n]

    def ops(self, n: int) -> list[Operation]:
        return [Operation(self.k, n, tuple(t)) for t in self.array(n).tolist()]

    def replay(self, n: int, i: int) -> Operation:
        """Rebuild element ``i`` of the ``n``-ary part from its derivation tree."""
        d = self.derivation[n][i]
        if d is None:
            return Operation(self.k, n, tuple(self.parts[n][i].tolist()))
        g, children = d
        return compose(self.generators[g], [self.replay(n, c) for c in children])

    def check_derivations(self) -> bool:
        for n, tabs in self.parts.items():
            for i in range(len(tabs)):
                d = self.derivation[n][i]
                if d is None:
                    if not any(tuple(tabs[i].tolist()) == projection(self.k, n, j).table for j in range(n)):
                        return False
                elif self.replay(n, i).table != tuple(tabs[i].tolist()):
                    return False
        return True


def _encode_rows(tabs: np.ndarray, k: int) -> np.ndarray:
    """Injective int64 key per table (``k^(k^n)`` must fit; true for k=3, n <= 3)."""
    w = (k ** np.arange(tabs.shape[1] - 1, -1, -1, dtype=np.int64)).astype(np.int64)
    return tabs.astype(np.int64) @ w


def generate_closure(
    F: Sequence[Operation], cap: int, k: int | None = None, max_size: int = 200_000
) -> Closure:
    """The parts of arity ``<= cap`` of the clone generated by ``F``.

    The ``n``-ary part is computed on its own as the least set containing the
    ``n``-ary projections and closed under applying a generator to members of
    the set, which is all term operations of arity ``n``.  New members are
    combined with old ones semi-naively, so every tuple of children is tried
    once.
    """
    F = tuple(F)
    if k is None:
        k = F[0].k if F else 3
    if any(g.k != k for g in F):
        raise ValueError("universe mismatch")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if k**cap > 27:
        raise CapExceeded(f"closure at arity {cap} is not supported for k={k}")
    out = Closure(k, F, cap)
    for n in range(1, cap + 1):
        tabs, der = _closure_part(F, k, n, max_size)
        out.parts[n] = tabs
        out.derivation[n] = der
    return out


def _closure_part(F: tuple[Operation, ...], k: int, n: int, max_size: int):
    N = k**n
    proj = np.stack([np.asarray(projection(k, n, i).table) for i in range(n)])
    proj = np.unique(proj, axis=0)
    elems = [row for row in proj]
    der: list = [None] * len(elems)
    index = {int(key): i for i, key in enumerate(_encode_rows(proj, k))}
    new_lo = 0
    while new_lo < len(elems):
        arr = np.array(elems, dtype=np.int64).reshape(-1, N)
        new_hi = len(elems)
        for gi, g in enumerate(F):
            r = g.arity
            G = g.array
            # every child tuple with at least one child from the newest layer
            for first_new in range(r):
                ranges = []
                for s in range(r):
                    if s < first_new:
                        ranges.append(np.arange(0, new_lo))
                    elif s == first_new:
                        ranges.append(np.arange(new_lo, new_hi))
                    else:
                        ranges.append(np.arange(0, new_hi))
                if any(len(x) == 0 for x in ranges):
                    continue
                for combo in _chunked_product(ranges):
                    idx = np.zeros((len(combo), N), dtype=np.int64)
                    for s in range(r):
                        idx = idx * k + arr[combo[:, s]]
                    res = G[idx]
                    keys = _encode_rows(res, k)
                    ukeys, first = np.unique(keys, return_index=True)
                    for key, j in zip(ukeys.tolist(), first.tolist()):
                        if key not in index:
                            index[key] = len(elems)
                            elems.append(res[j])
                            der.append((gi, tuple(int(c) for c in combo[j])))
                            if len(elems) > max_size:
                                raise CapExceeded(f"closure part of arity {n} exceeds {max_size} elements")
        new_lo = new_hi
    return np.array(elems, dtype=np.int64).reshape(-1, N), der


def _chunked_product(ranges: list[np.ndarray], chunk: int = 1 << 16):
    """Yield the cartesian product of index ranges as ``(rows, r)`` arrays, in chunks."""
    sizes = [len(x) for x in ranges]
    total = int(np.prod(sizes))
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        cols = []
        for s in range(len(ranges) - 1, -1, -1):
            cols.append(ranges[s][flat % sizes[s]])
            flat //= sizes[s]
        yield np.stack(cols[::-1], axis=1)


@functools.lru_cache(maxsize=64)
def _closure_for(C: Generated) -> Closure:
    return generate_closure(C.generators, C.cap, C.k)


# ---------------------------------------------------------------------------
# comparisons


def contained_up_to(C1: CloneSpec, C2: CloneSpec, n: int) -> Operation | None:
    """None if ``C1^(m) <= C2^(m)`` for all ``m <= n``, else a member of C1 outside C2."""
    if isinstance(C1, Generated):
        # generators are members; testing them first avoids building a closure
        # that is bound to escape C2 anyway
        for g in C1.generators:
            if g.arity <= n and not membership(C2, g):
                return g
    for m in range(1, n + 1):
        for t in enumerate_tables(C1, m).tolist():
            f = Operation(C1.k, m, tuple(t))
            if not membership(C2, f):
                return f
    return None


def separating_op(C1: CloneSpec, C2: CloneSpec, n: int) -> Operation | None:
    """A member of exactly one of the clones with arity ``<= n``, if any."""
    if n > 3:
        raise UnsupportedArity("clone comparison supports arity <= 3")
    for m in range(1, n + 1):
        a = {tuple(t) for t in enumerate_tables(C1, m).tolist()}
        b = {tuple(t) for t in enumerate_tables(C2, m).tolist()}
        diff = sorted(a ^ b)
        if diff:
            return Operation(C1.k, m, diff[0])
    return None


def clones_equal_up_to(C1: CloneSpec, C2: CloneSpec, n: int) -> bool:
    return separating_op(C1, C2, n) is None


# ---------------------------------------------------------------------------
# textual descriptions


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced brackets in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValueError(f"unbalanced brackets in {text!r}")
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def load_relation(token: str) -> Relation:
    """A relation file path or a named reference such as ``eps3[a=0,b=1,c=2]``."""
    if os.path.exists(token):
        with open(token) as fh:
            return read_relation(fh.read())
    return parse_relation_ref(token)


def _parse_monoid(tokens: list[str], k: int) -> tuple[Operation, ...] | None:
    maps: list[Operation] = []
    full = False
    for tok in tokens:
        if not tok:
            continue
        if tok in ("T", "O1"):
            full = True
        elif tok == "T-":
            maps.extend(transformation_monoid_minus(k))
        else:
            u = parse_table(tok, k)
            if u.arity != 1:
                raise ValueError(f"monoid element {tok!r} is not unary")
            maps.append(u)
    if full or not tokens:
        return None
    return tuple(maps)


def parse_spec(text: str, k: int = 3) -> CloneSpec:
    """Parse ``pol(r1,...)``, ``meet(s1,s2,...)``, ``gen(op1,...;cap)`` or ``burle(i;M)``.

    Relations are named references such as ``leq3[a=0,b=1,c=2]`` or paths to
    relation files; operations are value tables such as ``0121``.  In
    ``burle`` the monoid is a comma list of unary tables and the shorthands
    ``T`` (all unary maps, the default) and ``T-`` (identity plus all
    non-permutations).
    """
    text = text.strip()
    head, paren, rest = text.partition("(")
    if not paren or not rest.endswith(")"):
        raise ValueError(f"malformed clone description {text!r}")
    head = head.strip().lower()
    body = rest[:-1]
    if head == "pol":
        rels = [load_relation(t) for t in _split_top(body, ",") if t]
        return PolOf(tuple(rels), k)
    if head == "meet":
        return Intersection(tuple(parse_spec(t, k) for t in _split_top(body, ",")), k)
    if head == "gen":
        ops_part, _, cap = body.rpartition(";")
        if not _:
            raise ValueError("gen(...) needs ';cap'")
        gens = [parse_table(t, k) for t in _split_top(ops_part, ",") if t]
        return Generated(tuple(gens), int(cap), k)
    if head == "burle":
        level, _, mon = body.partition(";")
        return BurleChain(int(level), _parse_monoid(_split_top(mon, ",") if mon else [], k), k)
    raise ValueError(f"unknown clone constructor {head!r}")
