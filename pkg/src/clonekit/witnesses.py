"""Witness families for the infinitely-many-classes arguments, the combinatorial
facts those arguments rest on, and the class signatures of the finiteness
arguments.

Family positions are 1-based to line up with the case analyses; conversion to
0-based tuple indices happens only where a tuple is materialised.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import Operation, Relation, encode_tuple, points
from .relations import literal_relation

__all__ = [
    "WitnessFamily",
    "LEMMAS",
    "build_family",
    "e_tuple",
    "d_tuple",
    "d_pair_tuple",
    "a_tuple",
    "cyclic",
    "family_relation",
    "related",
    "check_fact_26",
    "check_fact_35",
    "check_fact_40",
    "lemma34_case_matches",
    "Signature24",
    "Signature27",
    "signature",
    "signature24",
    "signature27",
    "signature32",
]

LEMMAS = ("24P", "26", "27Q", "32", "34", "35", "40")
_FAMILY_LINES = {"26": 26, "34": 34, "35": 35, "40": 40}

DEFAULT_PARAMS = {"a": 0, "b": 1, "c": 2}


def _abc(params: Mapping[str, int] | None) -> tuple[int, int, int]:
    p = dict(DEFAULT_PARAMS, **(params or {}))
    a, b, c = p["a"], p["b"], p["c"]
    if sorted((a, b, c)) != [0, 1, 2]:
        raise ValueError("a, b, c must be a permutation of 0, 1, 2")
    return a, b, c


@dataclass(frozen=True)
class WitnessFamily:
    lemma: str
    n: int
    params: tuple[int, int, int] = (0, 1, 2)

    def __post_init__(self) -> None:
        if self.lemma not in _FAMILY_LINES:
            raise ValueError(f"no witness family for lemma {self.lemma!r}")
        if self.n < 3:
            raise ValueError("family index must be >= 3")
        if self.lemma == "40" and self.n % 2 == 0:
            raise ValueError("lemma 40 family index must be odd")
        _abc(dict(zip("abc", self.params)))

    @property
    def arity(self) -> int:
        return self.n + 1 if self.lemma in ("34", "35") else self.n


def cyclic(i: int, n: int) -> int:
    """Reduce a 1-based index modulo n, so that n + 1 -> 1 and 0 -> n."""
    return (i - 1) % n + 1


def e_tuple(i: int, n: int, a: int, b: int) -> tuple[int, ...]:
    """``a`` at position i, ``b`` elsewhere."""
    return tuple(a if s == i else b for s in range(1, n + 1))


def d_tuple(i: int, n: int, b: int, c: int) -> tuple[int, ...]:
    """``c`` at positions i, i+1 (wrapping to 1 and n for i = n), ``b`` elsewhere."""
    hot = {i, i + 1} if i < n else {1, n}
    return tuple(c if s in hot else b for s in range(1, n + 1))


def d_pair_tuple(i: int, n: int, alpha: int, beta: int, c: int) -> tuple[int, ...]:
    """The (n+1)-tuple with ``alpha`` at i, ``beta`` at i+1 and ``c`` elsewhere."""
    out = [c] * (n + 1)
    out[i - 1], out[i] = alpha, beta
    return tuple(out)


def a_tuple(i: int, n: int, a: int, b: int, c: int) -> tuple[int, ...]:
    """``b`` at i, ``a`` at the cyclic neighbours of i, ``c`` elsewhere."""
    out = [c] * n
    out[cyclic(i - 1, n) - 1] = a
    out[cyclic(i + 1, n) - 1] = a
    out[i - 1] = b
    return tuple(out)


def _table_from_cases(k: int, n: int, cases: dict[tuple[int, ...], int]) -> tuple[int, ...]:
    table = [0] * k**n
    for t, v in cases.items():
        table[encode_tuple(k, t)] = v
    return tuple(table)


def lemma34_case_matches(t: Sequence[int], n: int, a: int, b: int, c: int) -> list[int]:
    """Indices of the printed non-default cases of the line-34 family that ``t`` matches."""
    ab = (a, b)
    hits = []

    def block(lo: int, hi: int) -> bool:
        return all(x in ab for x in t[lo:hi])

    # case 1, 2: first two coordinates (a|b, c), the rest in {a, b}
    if t[1] == c and block(2, n + 1):
        if t[0] == a:
            hits.append(1)
        if t[0] == b:
            hits.append(2)
    # cases 3, 4: {a,b}^i x {a|b} x {c} x {a,b}^{n-i-1}, 1 <= i <= n-2
    for i in range(1, n - 1):
        if block(0, i) and t[i + 1] == c and block(i + 2, n + 1):
            if t[i] == a:
                hits.append(3)
            if t[i] == b:
                hits.append(4)
    # cases 5, 6: {a,b}^{n-1} x {a|b} x {c}
    if block(0, n - 1) and t[n] == c:
        if t[n - 1] == a:
            hits.append(5)
        if t[n - 1] == b:
            hits.append(6)
    return hits


_CASE34_VALUE = {1: 0, 2: 1, 3: 1, 4: 2, 5: 2, 6: 0}


def build_family(w: WitnessFamily) -> Operation:
    a, b, c = w.params
    n = w.n
    if w.lemma == "26":
        cases = {e_tuple(1, n, a, b): 2, d_tuple(n, n, b, c): 2}
        for i in range(2, n + 1):
            cases[e_tuple(i, n, a, b)] = 1
        for i in range(1, n):
            cases[d_tuple(i, n, b, c)] = 1
        return Operation(3, n, _table_from_cases(3, n, cases))
    if w.lemma == "34":
        table = []
        for t in itertools.product(range(3), repeat=n + 1):
            hits = lemma34_case_matches(t, n, a, b, c)
            if len(hits) > 1:
                raise AssertionError(f"tuple {t} matches cases {hits}")
            table.append(_CASE34_VALUE[hits[0]] if hits else 0)
        return Operation(3, n + 1, tuple(table))
    if w.lemma == "35":
        cases = {}
        for beta in (a, b):
            cases[d_pair_tuple(1, n, a, beta, c)] = 0
            cases[d_pair_tuple(1, n, b, beta, c)] = 1
            for i in range(2, n):
                cases[d_pair_tuple(i, n, a, beta, c)] = 1
                cases[d_pair_tuple(i, n, b, beta, c)] = 2
            cases[d_pair_tuple(n, n, a, beta, c)] = 2
            cases[d_pair_tuple(n, n, b, beta, c)] = 0
        return Operation(3, n + 1, _table_from_cases(3, n + 1, cases))
    if w.lemma == "40":
        cases = {a_tuple(i, n, a, b, c): 1 for i in range(1, n + 1)}
        cases[(c,) * n] = 2
        return Operation(3, n, _table_from_cases(3, n, cases))
    raise ValueError(w.lemma)


def family_relation(lemma: str, params: Mapping[str, int] | None = None) -> Relation:
    a, b, c = _abc(params)
    line = {"24P": 24, "27Q": 27, **_FAMILY_LINES}.get(lemma)
    if line is None:
        raise ValueError(f"lemma {lemma!r} has no literal relation")
    return literal_relation(line, {"a": a, "b": b, "c": c})


def related(rho: Relation, *tuples: Sequence[int]) -> bool:
    """Are the given equal-length tuples coordinatewise rho-related?"""
    if len(tuples) != rho.arity:
        raise ValueError("need one tuple per coordinate of rho")
    return all(col in rho for col in zip(*tuples))


def check_fact_26(p: int, params: Mapping[str, int] | None = None, include_diagonal: bool = False) -> bool:
    """Compare relatedness of (e_i, e_j, d_l) with the adjacency criterion.

    With ``include_diagonal`` the criterion also accepts i = j: the relation
    contains every column (x, x, y), so such triples are always related.
    """
    a, b, c = _abc(params)
    rho = family_relation("26", params)
    for i, j, l in itertools.product(range(1, p + 1), repeat=3):
        actual = related(rho, e_tuple(i, p, a, b), e_tuple(j, p, a, b), d_tuple(l, p, b, c))
        claimed = ({i, j} <= {l, l + 1} and l < p) or ({i, j} <= {1, p} and l == p)
        if include_diagonal:
            claimed = claimed or i == j
        if actual != claimed:
            return False
    return True


def check_fact_35(p: int, params: Mapping[str, int] | None = None) -> bool:
    a, b, c = _abc(params)
    rho = family_relation("35", params)
    for i, j in itertools.product(range(1, p + 1), repeat=2):
        actual = related(
            rho, d_pair_tuple(i, p, a, a, c), d_pair_tuple(i, p, b, a, c), d_pair_tuple(j, p, a, a, c)
        )
        if actual != (i == j or i == j + 1):
            return False
    return True


def check_fact_40(p: int, params: Mapping[str, int] | None = None) -> bool:
    a, b, c = _abc(params)
    rho = family_relation("40", params)
    cbar = (c,) * p
    for i, j in itertools.product(range(1, p + 1), repeat=2):
        actual = related(rho, a_tuple(i, p, a, b, c), a_tuple(j, p, a, b, c), cbar)
        if actual != (i == cyclic(j + 1, p) or i == cyclic(j - 1, p)):
            return False
    return True


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Signature24:
    range: frozenset[int]
    cube_range: frozenset[int]
    value_at_a: int
    P: bool | None


@dataclass(frozen=True)
class Signature27:
    range: frozenset[int]
    cube_range: frozenset[int]
    Q: bool | None


def _cube(f: Operation, a: int, b: int) -> list[int]:
    return [encode_tuple(f.k, t) for t in itertools.product((a, b), repeat=f.arity)]


def signature24(f: Operation, params: Mapping[str, int] | None = None) -> Signature24:
    a, b, c = _abc(params)
    rho = family_relation("24P", params)
    cube = _cube(f, a, b)
    rng = frozenset(f.table)
    cube_rng = frozenset(f.table[q] for q in cube)
    alpha = f.table[encode_tuple(f.k, (a,) * f.arity)]
    P = None
    if len(rng) == 3 and len(cube_rng) == 2:
        (beta,) = cube_rng - {alpha}
        (gamma,) = rng - cube_rng
        pts = points(f.k, f.arity)
        P = any(
            f.table[qb] == beta
            and f.table[qc] == gamma
            and related(rho, pts[qb].tolist(), pts[qc].tolist())
            for qb in cube
            for qc in range(len(f.table))
        )
    return Signature24(rng, cube_rng, alpha, P)


def signature27(f: Operation, params: Mapping[str, int] | None = None) -> Signature27:
    a, b, c = _abc(params)
    rho = family_relation("27Q", params)
    cube = _cube(f, a, b)
    rng = frozenset(f.table)
    cube_rng = frozenset(f.table[q] for q in cube)
    Q = None
    if len(rng) == 3 and len(cube_rng) == 2:
        (gamma,) = rng - cube_rng
        alpha, beta = sorted(cube_rng)
        pts = points(f.k, f.arity).tolist()
        Q = any(
            f.table[qa] == alpha
            and f.table[qb] == beta
            and f.table[qc] == gamma
            and related(rho, pts[qa], pts[qb], pts[qc])
            for qa in cube
            for qb in cube
            for qc in range(len(f.table))
        )
    return Signature27(rng, cube_rng, Q)


def signature32(f: Operation, params: Mapping[str, int] | None = None) -> frozenset:
    """``{(range f|B, range f|B') : B a block of eps_{ab|c}^n}``, B' the mirrored block."""
    a, b, c = _abc(params)
    n = f.arity
    out = set()
    for pattern in itertools.product((0, 1), repeat=n):
        sides = []
        for pat in (pattern, tuple(1 - x for x in pattern)):
            factors = [(a, b) if x == 0 else (c,) for x in pat]
            sides.append(frozenset(f(*t) for t in itertools.product(*factors)))
        out.add((sides[0], sides[1]))
    return frozenset(out)


def signature(f: Operation, kind: str, params: Mapping[str, int] | None = None):
    if kind == "24P":
        return signature24(f, params)
    if kind == "27Q":
        return signature27(f, params)
    if kind == "32":
        return signature32(f, params)
    raise ValueError(f"unknown signature kind {kind!r}")
