"""Deciding ``f = g o h`` with ``h`` drawn from ``Pol R``, by finite constraint search.

One CSP variable per point ``p`` of ``A^n``; its domain is the ``g``-fibre over
``f(p)``, a set of points of ``A^m`` kept as a boolean row.  Every tuple
of points that is coordinatewise rho-related in ``A^n`` is a constraint: the
assigned images must be coordinatewise rho-related in ``A^m``.

Propagation works one coordinate of ``A^m`` at a time: for each constraint and
each coordinate ``j`` the sets of ``j``-th components still available at the
constrained points are intersected with the projections of rho.  This is a
sound relaxation that becomes exact once all points of a constraint are
fixed, so the search stays complete and a ``no`` is a refutation.
"""

from __future__ import annotations

import enum
import functools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Hashable, Iterator, Sequence

import numpy as np

from .core import Operation, OperationVector, Relation, compose, points, preserves, range_of, related_points

__all__ = [
    "Verdict",
    "Budget",
    "MinorResult",
    "MinorInstance",
    "is_minor",
    "are_equivalent",
    "enumerate_classes",
    "ClassPartition",
    "PartialResultError",
    "solve_all",
    "BudgetExceeded",
]


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 10**7
    max_seconds: float = 600.0


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class MinorInstance:
    f: Operation
    g: Operation
    relations: tuple[Relation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", tuple(self.relations))
        ks = {self.f.k, self.g.k} | {r.k for r in self.relations}
        if len(ks) != 1:
            raise ValueError("universe mismatch")


@dataclass
class MinorResult:
    verdict: Verdict
    witness: OperationVector | None = None
    nodes: int = 0
    seconds: float = 0.0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.verdict is Verdict.YES


# failed-literal probing pays off only on large instances
PROBE_MIN_SIZE = 4096
PROBE_LIMIT = 96


class _Structure:
    """Everything about an instance that depends only on (relations, n, m).

    Domains are boolean matrices ``D[p, q]`` (point ``p`` of ``A^n`` may map to
    point ``q`` of ``A^m``).  Constraints only ever look at the per-coordinate
    value sets ``VS[p, j]`` (a ``k``-bit mask), so propagation is driven by
    changes of ``VS`` rather than of ``D``.
    """

    def __init__(self, k: int, n: int, m: int, relations: tuple[Relation, ...]) -> None:
        self.k, self.n, self.m = k, n, m
        self.N, self.M = k**n, k**m
        self.K = K = 1 << k
        dig = points(k, m)
        self.digits = dig
        # memb[j, S]: points of A^m whose j-th coordinate lies in the value set S
        self.memb = np.zeros((m, K, self.M), dtype=bool)
        for j in range(m):
            for S in range(K):
                self.memb[j, S] = (S >> dig[:, j]) & 1
        onehot = np.zeros((self.M, m, k), dtype=np.int32)
        for j in range(m):
            onehot[np.arange(self.M), j, dig[:, j]] = 1
        self.onehot = onehot.reshape(self.M, m * k)
        self.weights = (1 << np.arange(k)).astype(np.int64)

        # constraint groups: one per (relation, equality pattern of the point tuple);
        # repeated points are collapsed so each group has distinct columns
        self.groups: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        for rho in dict.fromkeys(relations):
            rel = np.unique(related_points(rho, n), axis=0)
            by_pattern: dict[tuple[int, ...], list[list[int]]] = {}
            for row in rel.tolist():
                by_pattern.setdefault(_pattern(row), []).append(row)
            for pat in sorted(by_pattern):
                keep = [pat.index(x) for x in range(max(pat) + 1)]
                C = np.array(by_pattern[pat], dtype=np.intp)[:, keep]
                table = _support_table(rho, pat, k)
                inc = np.zeros((self.N, len(C)), dtype=bool)
                for s in range(C.shape[1]):
                    inc[C[:, s], np.arange(len(C))] = True
                self.groups.append((C, table, inc))

    def value_sets(self, D: np.ndarray) -> np.ndarray:
        cnt = (D.astype(np.int32) @ self.onehot).reshape(len(D), self.m, self.k)
        return (cnt > 0).astype(np.int64) @ self.weights

    def restrict(self, D: np.ndarray, rows: np.ndarray, allowed: np.ndarray) -> None:
        """``D[rows] &= product over j of memb[j, allowed[:, j]]``."""
        for j in range(self.m):
            D[rows] &= self.memb[j][allowed[:, j]]

    def propagate(self, D: np.ndarray, VS: np.ndarray, changed: np.ndarray) -> bool:
        k, m = self.k, self.m
        while len(changed):
            red = np.full((self.N, m), self.K - 1, dtype=np.int64)
            for C, table, inc in self.groups:
                cons = np.flatnonzero(inc[changed].any(axis=0))
                if not len(cons):
                    continue
                Cc = C[cons]
                key = np.zeros((len(cons), m), dtype=np.int64)
                for s in range(Cc.shape[1]):
                    key |= VS[Cc[:, s]] << (k * s)
                allowed = table[key]
                if not allowed[..., 0].all():
                    return False
                for s in range(Cc.shape[1]):
                    np.bitwise_and.at(red, Cc[:, s], allowed[:, :, s])
            new = VS & red
            rows = np.flatnonzero((new != VS).any(axis=1))
            if not len(rows):
                return True
            self.restrict(D, rows, new[rows])
            if not D[rows].any(axis=1).all():
                return False
            vs_rows = self.value_sets(D[rows])
            VS[rows] = vs_rows
            changed = rows
        return True


def _pattern(row: Sequence[int]) -> tuple[int, ...]:
    first: dict[int, int] = {}
    return tuple(first.setdefault(p, len(first)) for p in row)


def _support_table(rho: Relation, pattern: tuple[int, ...], k: int) -> np.ndarray:
    """``table[key, s]``: values at distinct position ``s`` supported by some tuple of rho
    with the given equality pattern, when position ``s`` may take the values in the
    ``k``-bit mask ``(key >> k*s) & (2^k - 1)``.  All-zero rows mean no support."""
    keep = [pattern.index(x) for x in range(max(pattern) + 1)]
    tuples = sorted(
        {tuple(t[s] for s in keep) for t in rho.tuples if all(t[s] == t[pattern.index(pattern[s])] for s in range(len(t)))}
    )
    r, K = len(keep), 1 << k
    table = np.zeros((K**r, r), dtype=np.int64)
    for key in range(K**r):
        sets = [(key >> (k * s)) & (K - 1) for s in range(r)]
        acc = [0] * r
        for t in tuples:
            if all(sets[s] >> t[s] & 1 for s in range(r)):
                for s in range(r):
                    acc[s] |= 1 << t[s]
        if all(acc):
            table[key] = acc
    return table


@functools.lru_cache(maxsize=64)
def _structure(k: int, n: int, m: int, relations: tuple[Relation, ...]) -> _Structure:
    return _Structure(k, n, m, relations)


class _Search:
    def __init__(self, st: _Structure, domains: np.ndarray, budget: Budget, probe_limit: int = 0) -> None:
        self.st = st
        self.budget = budget
        self.nodes = 0
        self.deadline = time.monotonic() + budget.max_seconds
        self.root = domains
        self.probe_limit = probe_limit

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise BudgetExceeded("node budget exhausted")
        if time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget exhausted")

    def _assign(self, D: np.ndarray, VS: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray] | None:
        D2, VS2 = D.copy(), VS.copy()
        D2[p] = False
        D2[p, q] = True
        VS2[p] = 1 << self.st.digits[q]
        if self.st.propagate(D2, VS2, np.array([p])):
            return D2, VS2
        return None

    def _probe(self, D: np.ndarray, VS: np.ndarray) -> bool:
        """Failed-literal probing: drop every value whose assignment propagates to a wipeout."""
        st = self.st
        changed = True
        while changed:
            changed = False
            sizes = D.sum(axis=1)
            for p in np.argsort(sizes, kind="stable").tolist():
                if not 1 < sizes[p] <= self.probe_limit:
                    continue
                dead = []
                for q in np.flatnonzero(D[p]).tolist():
                    self._tick()
                    if self._assign(D, VS, p, q) is None:
                        dead.append(q)
                if dead:
                    D[p, dead] = False
                    if not D[p].any():
                        return False
                    VS[p] = st.value_sets(D[p : p + 1])[0]
                    if not st.propagate(D, VS, np.array([p])):
                        return False
                    sizes = D.sum(axis=1)
                    changed = True
        return True

    def solutions(self) -> Iterator[np.ndarray]:
        st = self.st
        D = self.root.copy()
        if not D.any(axis=1).all():
            return
        VS = st.value_sets(D)
        if not st.propagate(D, VS, np.arange(st.N)):
            return
        if self.probe_limit and not self._probe(D, VS):
            return
        yield from self._dfs(D, VS)

    def _dfs(self, D: np.ndarray, VS: np.ndarray) -> Iterator[np.ndarray]:
        self._tick()
        sizes = D.sum(axis=1)
        open_ = np.where(sizes > 1, sizes, np.iinfo(sizes.dtype).max)
        p = int(open_.argmin())
        if sizes[p] <= 1:
            yield D
            return
        for q in np.flatnonzero(D[p]).tolist():
            nxt = self._assign(D, VS, p, q)
            if nxt is not None:
                yield from self._dfs(*nxt)


def _fibers(g: Operation) -> np.ndarray:
    """``fib[v]``: boolean row over ``A^m`` marking the ``g``-fibre over ``v``."""
    return np.arange(g.k)[:, None] == g.array[None, :]


def _assemble(st: _Structure, D: np.ndarray) -> OperationVector:
    imgs = D.argmax(axis=1)
    cols = st.digits[imgs]
    return OperationVector(Operation(st.k, st.n, tuple(cols[:, j].tolist())) for j in range(st.m))


def _check_sizes(n: int, m: int) -> None:
    if not 1 <= n <= 5:
        raise ValueError(f"inner arity {n} unsupported (1..5)")
    if not 1 <= m <= 6:
        raise ValueError(f"outer arity {m} unsupported (1..6)")


def is_minor(
    f: Operation,
    g: Operation,
    relations: Sequence[Relation] = (),
    budget: Budget | None = None,
) -> MinorResult:
    """Is ``f = g o h`` for some ``h`` whose components all preserve ``relations``?"""
    inst = MinorInstance(f, g, tuple(relations))
    budget = budget or Budget()
    k, n, m = f.k, f.arity, g.arity
    _check_sizes(n, m)
    t0 = time.monotonic()
    domains = _fibers(g)[f.array]
    if not domains.any(axis=1).all():
        return MinorResult(Verdict.NO, None, 0, time.monotonic() - t0, "empty fibre")
    st = _structure(k, n, m, inst.relations)
    search = _Search(st, domains, budget, probe_limit=PROBE_LIMIT if st.N * st.M > PROBE_MIN_SIZE else 0)
    try:
        sol = next(search.solutions(), None)
    except BudgetExceeded as exc:
        return MinorResult(Verdict.UNKNOWN, None, search.nodes, time.monotonic() - t0, str(exc))
    elapsed = time.monotonic() - t0
    if sol is None:
        return MinorResult(Verdict.NO, None, search.nodes, elapsed, "search exhausted")
    h = _assemble(st, sol)
    if compose(g, h) != f or not all(preserves(hj, rho) for hj in h for rho in inst.relations):
        raise RuntimeError("solver produced an invalid witness")
    return MinorResult(Verdict.YES, h, search.nodes, elapsed)


def are_equivalent(
    f: Operation,
    g: Operation,
    relations: Sequence[Relation] = (),
    budget: Budget | None = None,
) -> Verdict:
    fwd = is_minor(f, g, relations, budget)
    if fwd.verdict is Verdict.NO:
        return Verdict.NO
    bwd = is_minor(g, f, relations, budget)
    if bwd.verdict is Verdict.NO:
        return Verdict.NO
    if fwd.verdict is Verdict.YES and bwd.verdict is Verdict.YES:
        return Verdict.YES
    return Verdict.UNKNOWN


def solve_all(
    k: int,
    n: int,
    relations: Sequence[Relation],
    budget: Budget | None = None,
    limit: int | None = None,
) -> list[tuple[int, ...]]:
    """Value tables of all ``n``-ary operations preserving ``relations``, in ascending order."""
    st = _structure(k, n, 1, tuple(relations))
    search = _Search(st, np.ones((st.N, st.M), dtype=bool), budget or Budget())
    out = []
    for sol in search.solutions():
        out.append(tuple(sol.argmax(axis=1).tolist()))
        if limit is not None and len(out) > limit:
            raise BudgetExceeded(f"more than {limit} solutions")
    out.sort()
    return out


# ---------------------------------------------------------------------------
# class enumeration


class PartialResultError(RuntimeError):
    def __init__(self, message: str, classes: list[list[Operation]]) -> None:
        super().__init__(message)
        self.classes = classes


@dataclass
class ClassPartition:
    classes: list[list[Operation]]
    solver_calls: int = 0

    @property
    def representatives(self) -> list[Operation]:
        return [c[0] for c in self.classes]

    def __len__(self) -> int:
        return len(self.classes)


def _all_ops(k: int, n: int) -> list[Operation]:
    return [Operation(k, n, tuple(t)) for t in points(k, k**n).tolist()]


def _sort_key(f: Operation) -> tuple:
    return (f.arity, f.table)


def _classify_bucket(args) -> tuple[list[list[Operation]], int, str | None]:
    ops, relations, budget, hint = args
    reps: list[tuple[Hashable, Operation]] = []
    members: list[list[Operation]] = []
    calls = 0
    for f in ops:
        h = hint(f) if hint else None
        order = sorted(range(len(reps)), key=lambda i: reps[i][0] != h)
        placed = False
        for i in order:
            g = reps[i][1]
            calls += 1
            v = are_equivalent(f, g, relations, budget)
            if v is Verdict.UNKNOWN:
                return members, calls, f"unknown verdict for {f!r} vs {g!r}"
            if v is Verdict.YES:
                members[i].append(f)
                placed = True
                break
        if not placed:
            reps.append((h, f))
            members.append([f])
    return members, calls, None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CLONEKIT_THREADS", "1")))
    except ValueError:
        return 1


def enumerate_classes(
    relations: Sequence[Relation],
    max_arity: int,
    budget: Budget | None = None,
    k: int = 3,
    workers: int | None = None,
    hint: Callable[[Operation], Hashable] | None = None,
    ops: Sequence[Operation] | None = None,
) -> ClassPartition:
    """Partition all operations of arity ``<= max_arity`` into C-equivalence classes.

    Operations are first bucketed by range; that is a genuine invariant since
    ``f = g o h`` forces ``range f <= range g``.  Inside a bucket every member
    is compared by solver calls against the class representatives found so
    far, trying representatives with the same ``hint`` value first.
    """
    if ops is None:
        if max_arity > 2:
            raise ValueError("exhaustive class enumeration supports max_arity <= 2")
        ops = [f for n in range(1, max_arity + 1) for f in _all_ops(k, n)]
    relations = tuple(relations)
    budget = budget or Budget()
    buckets: dict[frozenset[int], list[Operation]] = {}
    for f in sorted(ops, key=_sort_key):
        buckets.setdefault(range_of(f), []).append(f)
    jobs = [(buckets[key], relations, budget, hint) for key in sorted(buckets, key=lambda s: (len(s), sorted(s)))]
    workers = workers or _threads()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_classify_bucket, jobs))
    else:
        results = [_classify_bucket(j) for j in jobs]
    classes: list[list[Operation]] = []
    calls = 0
    errors = []
    for members, c, err in results:
        classes.extend(members)
        calls += c
        if err:
            errors.append(err)
    classes = [sorted(c, key=_sort_key) for c in classes]
    classes.sort(key=lambda c: _sort_key(c[0]))
    if errors:
        raise PartialResultError("; ".join(errors), classes)
    return ClassPartition(classes, calls)
