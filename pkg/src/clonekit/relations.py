"""Named relations on small universes, Rosenberg-type recognisers and the literal
relations of the submaximal-clone table.

Symbolic parameters ``a, b, c`` (and ``alpha, beta, gamma``) are bound to
concrete universe elements through a ``params`` mapping, e.g.
``build_named("eps3", {"a": 0, "b": 1, "c": 2})``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .core import Relation, pullback_relation

__all__ = [
    "RelationClass",
    "NotCentralError",
    "build_named",
    "parse_relation_ref",
    "NAMED",
    "LITERALS",
    "literal_columns",
    "LITERAL_COLUMNS",
    "literal_relation",
    "subset",
    "perm_graph",
    "cycle3",
    "transposition3",
    "transposition2",
    "eps3",
    "order3",
    "order2",
    "gamma3",
    "lambda3",
    "lambda2",
    "iota3",
    "phi3",
    "central_relation",
    "central_elements",
    "is_central",
    "is_totally_reflexive",
    "is_totally_symmetric",
    "equivalence_blocks",
    "is_equivalence",
    "h_regular_from_family",
    "rosenberg_classify",
    "is_chain",
]


class NotCentralError(ValueError):
    pass


# ---------------------------------------------------------------------------
# constructors


def subset(k: int, elems: Sequence[int]) -> Relation:
    return Relation.from_tuples(k, [(x,) for x in elems], 1)


def perm_graph(perm: Sequence[int]) -> Relation:
    return Relation.from_tuples(len(perm), [(x, perm[x]) for x in range(len(perm))], 2)


def cycle3(a: int, b: int, c: int) -> Relation:
    """Graph of the 3-cycle ``a -> b -> c -> a``."""
    perm = [0] * 3
    perm[a], perm[b], perm[c] = b, c, a
    return perm_graph(perm)


def transposition3(a: int, b: int) -> Relation:
    """Graph of the transposition ``(a b)`` on the whole 3-element set."""
    perm = list(range(3))
    perm[a], perm[b] = b, a
    return perm_graph(perm)


def transposition2(a: int, b: int, k: int = 3) -> Relation:
    """The transposition of the 2-element set ``{a, b}``, as a relation on ``k`` elements."""
    return Relation.from_tuples(k, [(a, b), (b, a)], 2)


def eps3(a: int, b: int, c: int) -> Relation:
    """Equivalence with blocks ``{a, b}`` and ``{c}``."""
    return Relation.from_tuples(3, [(x, y) for x in (a, b) for y in (a, b)] + [(c, c)], 2)


def order3(a: int, b: int, c: int) -> Relation:
    rank = {a: 0, b: 1, c: 2}
    return Relation.from_tuples(3, [(x, y) for x in range(3) for y in range(3) if rank[x] <= rank[y]], 2)


def order2(a: int, b: int, k: int = 3) -> Relation:
    return Relation.from_tuples(k, [(a, a), (a, b), (b, b)], 2)


def gamma3(a: int) -> Relation:
    """The binary central relation on 3 elements with center ``a``."""
    return central_relation(3, 2, a)


def lambda3() -> Relation:
    """``{(x, y, z, w) : w = x - y + z mod 3}``."""
    return Relation.from_tuples(
        3, [(x, y, z, (x - y + z) % 3) for x, y, z in itertools.product(range(3), repeat=3)], 4
    )


def lambda2(a: int, b: int, k: int = 3) -> Relation:
    """Affine relation ``x + y + z = w`` of the 2-element group on ``{a, b}`` (``a`` as zero)."""
    val = (a, b)
    return Relation.from_tuples(
        k,
        [(val[x], val[y], val[z], val[x ^ y ^ z]) for x, y, z in itertools.product((0, 1), repeat=3)],
        4,
    )


def iota3() -> Relation:
    """Triples over 3 elements with a repeated entry."""
    return Relation.from_tuples(
        3, [t for t in itertools.product(range(3), repeat=3) if len(set(t)) < 3], 3
    )


def phi3(a: int, b: int, c: int) -> tuple[int, ...]:
    """The map ``a, b -> 0``, ``c -> 1`` as a value list."""
    phi = [0, 0, 0]
    phi[c] = 1
    return tuple(phi)


# Matrices as printed: each string is a row, each column is one tuple.
LITERALS: dict[int, tuple[str, ...]] = {
    19: ("a a b a c", "a b a c a"),
    20: ("a a b a c b c", "a b a c a c b"),
    24: ("a a b b a", "a b a b c"),
    25: ("a a b b a c b c", "a b a b c a c b"),
    26: ("a b a b a b a b", "a b a b b a a b", "a b b a c c c c"),
    27: (
        "a b b a a b b a a b",
        "a b a b a b a b a b",
        "a b a a b a b b c c",
    ),
    31: ("0 1 2 a", "0 1 2 b"),
    33: ("0 1 2 a b a b", "0 1 2 b a c c"),
    34: (
        "0 1 2 a a b b c c a b",
        "0 1 2 a a b b c c b a",
        "0 1 2 b c a c a b c c",
    ),
    35: (
        "a a a a b b b b a b c c c",
        "a a b b a a b b a b c c c",
        "a b a b a b a b c c a b c",
    ),
    38: ("0 1 2 a a", "0 1 2 b c"),
    39: ("0 1 2 a b a c b", "0 1 2 b a c a c"),
    40: (
        "a b a c a b a a b b a b c a a c c a c",
        "b a c a a a b a b a b b a c a c a c c",
        "c c b b a a a b a b b b a a c a c c c",
    ),
}

LITERAL_COLUMNS = {line: len(rows[0].split()) for line, rows in LITERALS.items()}


def literal_columns(line: int, params: Mapping[str, int]) -> list[tuple[int, ...]]:
    """Columns of the printed matrix with symbols bound, i.e. the tuples of the relation."""
    rows = [r.split() for r in LITERALS[line]]
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"ragged literal for line {line}")

    def value(sym: str) -> int:
        return int(sym) if sym.isdigit() else params[sym]

    return [tuple(value(row[j]) for row in rows) for j in range(len(rows[0]))]


def literal_relation(line: int, params: Mapping[str, int]) -> Relation:
    cols = literal_columns(line, params)
    return Relation.from_tuples(3, cols, len(cols[0]))


# ---------------------------------------------------------------------------
# registry


def _abc(p: Mapping[str, int]) -> tuple[int, int, int]:
    return p["a"], p["b"], p["c"]


NAMED: dict[str, tuple[str, Callable[[Mapping[str, int]], Relation]]] = {
    "singleton": ("{a}", lambda p: subset(3, [p["a"]])),
    "pair": ("{a, b}", lambda p: subset(3, sorted({p["a"], p["b"]}))),
    "cycle3": ("3-cycle (a b c)", lambda p: cycle3(*_abc(p))),
    "transp3": ("transposition (a b) on 3 elements", lambda p: transposition3(p["a"], p["b"])),
    "transp2": ("transposition of the 2-element set {a, b}", lambda p: transposition2(p["a"], p["b"])),
    "eps3": ("equivalence with blocks {a, b} and {c}", lambda p: eps3(*_abc(p))),
    "leq3": ("total order a <= b <= c", lambda p: order3(*_abc(p))),
    "leq2": ("order a <= b on {a, b}", lambda p: order2(p["a"], p["b"])),
    "gamma3": ("central relation with center a", lambda p: gamma3(p["a"])),
    "lambda3": ("graph of x - y + z mod 3", lambda p: lambda3()),
    "lambda2": ("affine relation on {a, b}", lambda p: lambda2(p["a"], p["b"])),
    "iota3": ("3-regular relation (non-injective triples)", lambda p: iota3()),
    "eq": ("equality", lambda p: Relation.equality(3)),
    "full2": ("full binary relation", lambda p: Relation.full(3, 2)),
    "phi_transp2": (
        "pullback of the 2-element transposition along phi_{ab|c}",
        lambda p: pullback_relation(transposition2(0, 1, 2), phi3(*_abc(p))),
    ),
    "phi_lambda2": (
        "pullback of the 2-element affine relation along phi_{ab|c}",
        lambda p: pullback_relation(lambda2(0, 1, 2), phi3(*_abc(p))),
    ),
    "lambda2_c4": (
        "affine relation on {a, b} plus (c, c, c, c)",
        lambda p: Relation(3, 4, lambda2(p["a"], p["b"]).bits | 1 << (40 * p["c"])),
    ),
}
for _line in LITERALS:
    NAMED[f"line{_line}"] = (f"matrix literal of submaximal line {_line}", (lambda ln: lambda p: literal_relation(ln, p))(_line))

_DEFAULT = {"a": 0, "b": 1, "c": 2}
_GREEK = {"alpha": "a", "beta": "b", "gamma": "c"}


def build_named(name: str, params: Mapping[str, int] | None = None) -> Relation:
    if name not in NAMED:
        raise KeyError(f"unknown relation name {name!r}")
    p = dict(_DEFAULT)
    for key, val in (params or {}).items():
        key = _GREEK.get(key, key)
        if key not in _DEFAULT:
            raise ValueError(f"unknown parameter {key!r}")
        p[key] = int(val)
    if sorted(p.values()) != [0, 1, 2]:
        raise ValueError(f"parameters must be a permutation of 0, 1, 2: {p}")
    return NAMED[name][1](p)


_REF = re.compile(r"^\s*([A-Za-z_][\w]*)\s*(?:\[([^\]]*)\])?\s*$")


def parse_relation_ref(text: str) -> Relation:
    """Parse ``name[a=0,b=1,c=2]`` (brackets optional)."""
    m = _REF.match(text)
    if not m:
        raise ValueError(f"malformed relation reference {text!r}")
    params = {}
    if m.group(2):
        for item in m.group(2).split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"malformed parameter {item!r}")
            params[key.strip()] = int(val)
    return build_named(m.group(1), params)


# ---------------------------------------------------------------------------
# structural recognisers


def is_totally_reflexive(rho: Relation) -> bool:
    return all(
        t in rho for t in itertools.product(range(rho.k), repeat=rho.arity) if len(set(t)) < rho.arity
    )


def is_totally_symmetric(rho: Relation) -> bool:
    return all(rho.permute_coordinates(p) == rho for p in itertools.permutations(range(rho.arity)))


def _has_center(rho: Relation, c: int) -> bool:
    return all(
        (c,) + rest in rho for rest in itertools.product(range(rho.k), repeat=rho.arity - 1)
    )


def is_central(rho: Relation) -> bool:
    if len(rho) == 0 or rho == Relation.full(rho.k, rho.arity):
        return False
    if not (is_totally_reflexive(rho) and is_totally_symmetric(rho)):
        return False
    return any(_has_center(rho, c) for c in range(rho.k))


def central_elements(rho: Relation) -> frozenset[int]:
    if not is_central(rho):
        raise NotCentralError("relation is not central")
    return frozenset(c for c in range(rho.k) if _has_center(rho, c))


def central_relation(k: int, r: int, center: int) -> Relation:
    """The least central relation of arity ``r`` with the given center.

    It consists of all tuples with a repeated entry together with all tuples
    containing ``center``; for ``k = 3, r = 2`` it is the unique such relation.
    """
    if not 1 <= r <= k - 1:
        raise ValueError(f"central relations on {k} elements have arity 1..{k - 1}")
    if not 0 <= center < k:
        raise ValueError("center outside the universe")
    return Relation.from_tuples(
        k,
        [t for t in itertools.product(range(k), repeat=r) if len(set(t)) < r or center in t],
        r,
    )


def is_equivalence(rho: Relation) -> bool:
    if rho.arity != 2:
        return False
    k = rho.k
    if any((x, x) not in rho for x in range(k)):
        return False
    if any((y, x) not in rho for x, y in rho):
        return False
    return all((x, z) in rho for x, y in rho for y2, z in rho if y == y2)


def equivalence_blocks(rho: Relation) -> tuple[frozenset[int], ...]:
    if not is_equivalence(rho):
        raise ValueError("not an equivalence relation")
    blocks = []
    for x in range(rho.k):
        b = frozenset(y for y in range(rho.k) if (x, y) in rho)
        if b not in blocks:
            blocks.append(b)
    return tuple(blocks)


def h_regular_from_family(family: Sequence[Relation], h: int) -> Relation:
    """The relation ``lambda_T`` of all ``h``-tuples that are a transversal of no member of T."""
    if h < 3:
        raise ValueError("h-regular families need h >= 3")
    if not family:
        raise ValueError("family must be nonempty")
    k = family[0].k
    block_lists = []
    for i, theta in enumerate(family):
        if theta.k != k:
            raise ValueError("family members must share the universe")
        if not is_equivalence(theta):
            raise ValueError(f"member {i} is not an equivalence relation")
        blocks = equivalence_blocks(theta)
        if len(blocks) != h:
            raise ValueError(f"member {i} has {len(blocks)} blocks, expected {h}")
        block_lists.append(blocks)
    for combo in itertools.product(*block_lists):
        if not frozenset.intersection(*combo):
            raise ValueError(f"empty intersection of blocks {[sorted(b) for b in combo]}")

    def transversal(t: tuple[int, ...], blocks: Sequence[frozenset[int]]) -> bool:
        return all(any(x in b for x in t) for b in blocks)

    return Relation.from_tuples(
        k,
        [
            t
            for t in itertools.product(range(k), repeat=h)
            if not any(transversal(t, blocks) for blocks in block_lists)
        ],
        h,
    )


def is_chain(family: Sequence[Relation]) -> bool:
    for i, e in enumerate(family):
        if not is_equivalence(e):
            raise ValueError(f"member {i} is not an equivalence relation")
    return all(e.issubset(f) or f.issubset(e) for e, f in itertools.combinations(family, 2))


@dataclass(frozen=True)
class RelationClass:
    tag: str
    payload: Any = field(default=None, compare=True)

    TAGS = (
        "bounded-order",
        "prime-permutation",
        "nontrivial-equivalence",
        "prime-affine",
        "central",
        "h-regular",
        "other",
    )

    def __post_init__(self) -> None:
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if self.tag == "central" and not self.payload:
            raise ValueError("central class needs a nonempty center set")


def _bounded_order(rho: Relation) -> tuple[int, int] | None:
    if rho.arity != 2:
        return None
    k = rho.k
    if any((x, x) not in rho for x in range(k)):
        return None
    if any(x != y and (y, x) in rho for x, y in rho):
        return None
    if not all((x, z) in rho for x, y in rho for y2, z in rho if y == y2):
        return None
    least = [x for x in range(k) if all((x, y) in rho for y in range(k))]
    greatest = [y for y in range(k) if all((x, y) in rho for x in range(k))]
    if least and greatest:
        return least[0], greatest[0]
    return None


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def _prime_permutation(rho: Relation) -> tuple[tuple[int, ...], int] | None:
    if rho.arity != 2 or len(rho) != rho.k:
        return None
    perm = [-1] * rho.k
    for x, y in rho:
        if perm[x] != -1:
            return None
        perm[x] = y
    if sorted(perm) != list(range(rho.k)):
        return None
    lengths = set()
    seen: set[int] = set()
    for x in range(rho.k):
        if x in seen:
            continue
        n, y = 0, x
        while True:
            seen.add(y)
            y = perm[y]
            n += 1
            if y == x:
                break
        lengths.add(n)
    if len(lengths) == 1 and _is_prime(lengths.pop()):
        return tuple(perm), n
    return None


def _prime_affine(rho: Relation) -> int | None:
    """Match against ``x - y + z`` for every relabelling of ``Z_p`` (k = p prime)."""
    k = rho.k
    if rho.arity != 4 or not _is_prime(k) or len(rho) != k**3:
        return None
    for lab in itertools.permutations(range(k)):
        inv = {v: i for i, v in enumerate(lab)}
        if all(
            inv[w] == (inv[x] - inv[y] + inv[z]) % k for x, y, z, w in rho
        ):
            return k
    return None


def _h_regular(rho: Relation) -> int | None:
    h, k = rho.arity, rho.k
    if h < 3 or h > k:
        return None
    partitions = [blocks for blocks in _set_partitions(list(range(k))) if len(blocks) == h]
    thetas = [
        Relation.from_tuples(k, [(x, y) for b in blocks for x in b for y in b], 2)
        for blocks in partitions
    ]
    for size in range(1, len(thetas) + 1):
        for fam in itertools.combinations(thetas, size):
            try:
                if h_regular_from_family(fam, h) == rho:
                    return h
            except ValueError:
                continue
    return None


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def rosenberg_classify(rho: Relation) -> RelationClass:
    """Which of the six Rosenberg relation types rho belongs to (``other`` if none)."""
    bo = _bounded_order(rho)
    if bo is not None:
        return RelationClass("bounded-order", bo)
    pp = _prime_permutation(rho)
    if pp is not None:
        return RelationClass("prime-permutation", pp)
    if is_equivalence(rho) and rho != Relation.equality(rho.k) and rho != Relation.full(rho.k, 2):
        return RelationClass("nontrivial-equivalence", equivalence_blocks(rho))
    pa = _prime_affine(rho)
    if pa is not None:
        return RelationClass("prime-affine", pa)
    if is_central(rho):
        return RelationClass("central", central_elements(rho))
    h = _h_regular(rho)
    if h is not None:
        return RelationClass("h-regular", h)
    return RelationClass("other")
