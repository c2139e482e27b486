"""Finite operations and relations stored as value tables and tuple bitsets.

Tuples over ``{0, ..., k-1}`` are encoded big-endian in base ``k`` (the leftmost
component is the most significant digit).  An ``n``-ary operation is the tuple
of its values at the points of ``A^n`` listed in encoded order; a relation is
the set of encoded indices of its tuples, kept as an ``int`` bitmask.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "encode_tuple",
    "decode_tuple",
    "Operation",
    "Relation",
    "OperationVector",
    "compose",
    "preserves",
    "preserves_naive",
    "related_points",
    "range_of",
    "kernel",
    "essential_arity",
    "essential_positions",
    "unary_collapse",
    "restrict_operation",
    "restrict_relation",
    "pullback_relation",
    "discriminator",
    "projection",
    "constant",
    "points",
    "NotClosedError",
    "read_relation",
    "write_relation",
    "parse_table",
    "preserves_tables",
    "arity_of",
    "format_table",
]


class NotClosedError(ValueError):
    """Raised when an operation does not map ``B^n`` into ``B``."""


def encode_tuple(k: int, t: Sequence[int]) -> int:
    if len(t) == 0:
        raise ValueError("cannot encode an empty tuple")
    idx = 0
    for x in t:
        if not 0 <= x < k:
            raise ValueError(f"component {x} out of range for k={k}")
        idx = idx * k + x
    return idx


def decode_tuple(k: int, n: int, idx: int) -> tuple[int, ...]:
    if not 0 <= idx < k**n:
        raise ValueError(f"index {idx} out of range for k={k}, n={n}")
    out = [0] * n
    for i in range(n - 1, -1, -1):
        idx, out[i] = divmod(idx, k)
    return tuple(out)


@functools.lru_cache(maxsize=None)
def points(k: int, n: int) -> np.ndarray:
    """All points of ``A^n`` as a ``(k**n, n)`` array, in encoded order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((k,) * n).reshape(n, -1).T
    grid.setflags(write=False)
    return grid


@functools.lru_cache(maxsize=None)
def _powers(k: int, n: int) -> np.ndarray:
    p = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    p.setflags(write=False)
    return p


@dataclass(frozen=True)
class Operation:
    """An ``arity``-ary operation on ``{0, ..., k-1}`` given by its value table."""

    k: int
    arity: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("universe size must be positive")
        if self.arity < 1:
            raise ValueError("operations must have arity >= 1")
        table = tuple(int(v) for v in self.table)
        if len(table) != self.k**self.arity:
            raise ValueError(
                f"table length {len(table)} != {self.k}^{self.arity}"
            )
        if any(not 0 <= v < self.k for v in table):
            raise ValueError("table value out of range")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, k: int, arity: int, fn: Callable[..., int]) -> "Operation":
        return cls(k, arity, tuple(fn(*p) for p in itertools.product(range(k), repeat=arity)))

    @functools.cached_property
    def array(self) -> np.ndarray:
        a = np.asarray(self.table, dtype=np.int64)
        a.setflags(write=False)
        return a

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"expected {self.arity} arguments, got {len(args)}")
        return self.table[encode_tuple(self.k, args)]

    def __repr__(self) -> str:
        return f"Operation(k={self.k}, arity={self.arity}, table={format_table(self)!r})"


@dataclass(frozen=True)
class Relation:
    """An ``arity``-ary relation on ``{0, ..., k-1}`` stored as a bitset of tuple indices."""

    k: int
    arity: int
    bits: int

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("relations must have arity >= 1")
        if self.bits < 0 or self.bits >> (self.k**self.arity):
            raise ValueError("bitset refers to tuples outside A^r")

    @classmethod
    def from_tuples(cls, k: int, tuples: Iterable[Sequence[int]], arity: int | None = None) -> "Relation":
        bits = 0
        for t in tuples:
            if arity is None:
                arity = len(t)
            elif len(t) != arity:
                raise ValueError("tuples of mixed length")
            bits |= 1 << encode_tuple(k, t)
        if arity is None:
            raise ValueError("arity required for an empty relation")
        return cls(k, arity, bits)

    @classmethod
    def full(cls, k: int, arity: int) -> "Relation":
        return cls(k, arity, (1 << k**arity) - 1)

    @classmethod
    def equality(cls, k: int, arity: int = 2) -> "Relation":
        return cls.from_tuples(k, [(x,) * arity for x in range(k)])

    @functools.cached_property
    def indices(self) -> tuple[int, ...]:
        bits, out, i = self.bits, [], 0
        while bits:
            if bits & 1:
                out.append(i)
            bits >>= 1
            i += 1
        return tuple(out)

    @functools.cached_property
    def tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(decode_tuple(self.k, self.arity, i) for i in self.indices)

    @functools.cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.k**self.arity, dtype=bool)
        m[list(self.indices)] = True
        m.setflags(write=False)
        return m

    def __contains__(self, t: Sequence[int]) -> bool:
        return bool(self.bits >> encode_tuple(self.k, t) & 1)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.tuples)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __repr__(self) -> str:
        return f"Relation(k={self.k}, arity={self.arity}, tuples={list(self.tuples)})"

    def permute_coordinates(self, perm: Sequence[int]) -> "Relation":
        return Relation.from_tuples(self.k, (tuple(t[i] for i in perm) for t in self.tuples), self.arity)

    def issubset(self, other: "Relation") -> bool:
        return self.bits & ~other.bits == 0


class OperationVector(tuple):
    """A nonempty tuple of operations sharing universe and arity: a map ``A^n -> A^m``."""

    def __new__(cls, components: Iterable[Operation]) -> "OperationVector":
        comps = tuple(components)
        if not comps:
            raise ValueError("operation vector must be nonempty")
        k, n = comps[0].k, comps[0].arity
        if any(c.k != k or c.arity != n for c in comps):
            raise ValueError("components must share universe and arity")
        return super().__new__(cls, comps)

    @property
    def k(self) -> int:
        return self[0].k

    @property
    def arity(self) -> int:
        return self[0].arity

    def image(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(h(*point) for h in self)


def projection(k: int, n: int, i: int) -> Operation:
    """The ``i``-th ``n``-ary projection, with ``i`` counted from 0."""
    if not 0 <= i < n:
        raise ValueError("projection index out of range")
    return Operation(k, n, tuple(points(k, n)[:, i].tolist()))


def constant(k: int, n: int, value: int) -> Operation:
    return Operation(k, n, (value,) * k**n)


def discriminator(k: int) -> Operation:
    """``t(x, y, z) = z`` if ``x == y`` else ``x``."""
    if k < 2:
        raise ValueError("discriminator needs k >= 2")
    return Operation.from_function(k, 3, lambda x, y, z: z if x == y else x)


def compose(f: Operation, gs: Sequence[Operation]) -> Operation:
    """The operation ``f(g_1, ..., g_n)``."""
    gs = OperationVector(gs)
    if len(gs) != f.arity:
        raise ValueError(f"f is {f.arity}-ary but {len(gs)} inner operations given")
    if gs.k != f.k:
        raise ValueError("universe mismatch")
    idx = np.zeros(f.k**gs.arity, dtype=np.int64)
    for g in gs:
        idx = idx * f.k + g.array
    return Operation(f.k, gs.arity, tuple(f.array[idx].tolist()))


@functools.lru_cache(maxsize=4096)
def related_points(rho: Relation, n: int) -> np.ndarray:
    """Rows ``(p_1, ..., p_r)`` of point indices in ``A^n`` that are coordinatewise rho-related.

    One row per selection of ``n`` tuples from rho, so ``|rho|^n`` rows.
    """
    k, r = rho.k, rho.arity
    if len(rho) == 0:
        return np.zeros((0, r), dtype=np.int64)
    tup = np.asarray(rho.tuples, dtype=np.int64)  # (t, r)
    t = len(tup)
    sel = points(t, n)  # (t^n, n): which tuple goes to each coordinate
    out = np.zeros((len(sel), r), dtype=np.int64)
    for i in range(n):
        out = out * k + tup[sel[:, i]]
    out.setflags(write=False)
    return out


def preserves(f: Operation, rho: Relation) -> bool:
    if f.k != rho.k:
        raise ValueError("universe mismatch")
    return bool(preserves_tables(f.array[None, :], rho)[0])


def preserves_tables(tables: np.ndarray, rho: Relation, chunk: int = 1 << 22) -> np.ndarray:
    """Vectorised preservation test for a batch of same-arity value tables."""
    tables = np.asarray(tables)
    k, r = rho.k, rho.arity
    n = arity_of(tables.shape[1], k)
    rel = related_points(rho, n)
    pw = _powers(k, r)
    mask = rho.mask
    out = np.ones(len(tables), dtype=bool)
    if len(rel) == 0:
        return out
    step = max(1, chunk // (len(rel) * r))
    for s in range(0, len(tables), step):
        vals = tables[s : s + step][:, rel]  # (b, S, r)
        out[s : s + step] = mask[vals @ pw].all(axis=1)
    return out


def preserves_naive(f: Operation, rho: Relation) -> bool:
    """Reference check straight from the definition: apply f to every selection of n tuples."""
    for cols in itertools.product(rho.tuples, repeat=f.arity):
        image = tuple(f(*(col[s] for col in cols)) for s in range(rho.arity))
        if image not in rho:
            return False
    return True


def range_of(f: Operation) -> frozenset[int]:
    return frozenset(f.table)


def kernel(f: Operation) -> tuple[tuple[int, ...], ...]:
    """Blocks of points with equal value, ordered by their least point."""
    blocks: dict[int, list[int]] = {}
    for p, v in enumerate(f.table):
        blocks.setdefault(v, []).append(p)
    return tuple(sorted((tuple(b) for b in blocks.values()), key=lambda b: b[0]))


def essential_positions(f: Operation) -> tuple[int, ...]:
    arr = f.array.reshape((f.k,) * f.arity)
    out = []
    for i in range(f.arity):
        first = np.take(arr, [0], axis=i)
        if np.any(arr != first):
            out.append(i)
    return tuple(out)


def essential_arity(f: Operation) -> int:
    return len(essential_positions(f))


def unary_collapse(f: Operation) -> Operation | None:
    """The unary map ``x -> f(x, ..., x)`` if f depends on at most one variable, else None."""
    if essential_arity(f) > 1:
        return None
    diag = [encode_tuple(f.k, (x,) * f.arity) for x in range(f.k)]
    return Operation(f.k, 1, tuple(f.table[d] for d in diag))


def _check_subset(k: int, B: Sequence[int]) -> list[int]:
    B = list(B)
    if not B or B != sorted(set(B)) or B[0] < 0 or B[-1] >= k:
        raise ValueError("B must be a nonempty ascending subset of the universe")
    return B


def restrict_operation(f: Operation, B: Sequence[int]) -> Operation:
    B = _check_subset(f.k, B)
    pos = {b: i for i, b in enumerate(B)}
    table = []
    for p in itertools.product(B, repeat=f.arity):
        v = f(*p)
        if v not in pos:
            raise NotClosedError(f"f{p} = {v} leaves {B}")
        table.append(pos[v])
    return Operation(len(B), f.arity, tuple(table))


def restrict_relation(rho: Relation, B: Sequence[int]) -> Relation:
    B = _check_subset(rho.k, B)
    pos = {b: i for i, b in enumerate(B)}
    kept = (tuple(pos[x] for x in t) for t in rho.tuples if all(x in pos for x in t))
    return Relation.from_tuples(len(B), kept, rho.arity)


def pullback_relation(rho: Relation, phi: Sequence[int]) -> Relation:
    """``{x in A^r : (phi(x_1), ..., phi(x_r)) in rho}`` for a map ``phi: A -> {0..k'-1}``."""
    phi = list(phi)
    if any(not 0 <= v < rho.k for v in phi):
        raise ValueError("phi takes values outside the target universe")
    k = len(phi)
    kept = (t for t in itertools.product(range(k), repeat=rho.arity) if tuple(phi[x] for x in t) in rho)
    return Relation.from_tuples(k, kept, rho.arity)


def read_relation(text: str) -> Relation:
    """Parse the ``k r t`` header followed by ``t`` rows of ``r`` integers."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 3:
        raise ValueError("expected header line 'k r t'")
    k, r, t = (int(x) for x in lines[0])
    rows = [tuple(int(x) for x in ln) for ln in lines[1:]]
    if len(rows) != t:
        raise ValueError(f"header announces {t} tuples, found {len(rows)}")
    if any(len(row) != r for row in rows):
        raise ValueError(f"every tuple must have {r} components")
    rel = Relation.from_tuples(k, rows, r)
    if len(rel) != t:
        raise ValueError("duplicate tuples")
    return rel


def write_relation(rho: Relation) -> str:
    lines = [f"{rho.k} {rho.arity} {len(rho)}"]
    lines += [" ".join(map(str, t)) for t in rho.tuples]
    return "\n".join(lines) + "\n"


def arity_of(size: int, k: int) -> int:
    n, s = 0, 1
    while s < size:
        s *= k
        n += 1
    if s != size or n == 0:
        raise ValueError(f"table length {size} is not a positive power of {k}")
    return n


def parse_table(text: str, k: int = 3) -> Operation:
    """Parse an operation table such as ``"012120201"``, ``"0,1,2"`` or ``"k=2:0110"``."""
    text = text.strip()
    if text.startswith("k=") and ":" in text:
        head, text = text.split(":", 1)
        k = int(head[2:])
    if "," in text or " " in text:
        vals = [int(v) for v in text.replace(",", " ").split()]
    else:
        vals = [int(c) for c in text]
    return Operation(k, arity_of(len(vals), k), tuple(vals))


def format_table(f: Operation) -> str:
    if f.k <= 10:
        return "".join(map(str, f.table))
    return ",".join(map(str, f.table))
