import itertools

import numpy as np
import pytest

import oracles as O
from clonekit.core import Operation, compose, preserves, projection, range_of
from clonekit.minor import (
    Budget,
    PartialResultError,
    Verdict,
    are_equivalent,
    enumerate_classes,
    is_minor,
    solve_all,
)
from clonekit.relations import eps3, gamma3, literal_relation, order3, subset

ABC = {"a": 0, "b": 1, "c": 2}

RELATION_SETS = {
    "none": [],
    "leq": [order3(0, 1, 2)],
    "eps": [eps3(0, 1, 2)],
    "gamma": [gamma3(0)],
    "pair+leq": [subset(3, [0, 1]), order3(0, 1, 2)],
    "line24": [literal_relation(24, ABC)],
}


def _random_op(rng, n, values=3):
    return Operation(3, n, tuple(rng.integers(0, values, 3**n).tolist()))


@pytest.mark.parametrize("name", sorted(RELATION_SETS))
def test_binary_outer_unary_inner_matches_oracle(name):
    rels = RELATION_SETS[name]
    members = O.pol_part([r.tuples for r in rels], 3, 1)
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = _random_op(rng, 2)
        f = _random_op(rng, 1)
        want = O.is_minor(f.table, g.table, 3, 1, 2, members)
        res = is_minor(f, g, rels)
        assert (res.verdict is Verdict.YES) == want
        if want:
            assert compose(g, res.witness) == f


@pytest.mark.parametrize("name", ["leq", "gamma", "line24"])
def test_unary_outer_binary_inner_matches_oracle(name):
    rels = RELATION_SETS[name]
    members = O.pol_part([r.tuples for r in rels], 3, 2)
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = _random_op(rng, 1)
        # bias f towards the image of g so that some answers are yes
        f = Operation(3, 2, tuple(g.table[x] for x in rng.integers(0, 3, 9).tolist()))
        want = O.is_minor(f.table, g.table, 3, 2, 1, members)
        assert (is_minor(f, g, rels).verdict is Verdict.YES) == want


def test_witness_components_preserve_relations():
    rho = order3(0, 1, 2)
    g = Operation.from_function(3, 2, max)
    f = Operation.from_function(3, 2, lambda x, y: max(x, min(y, 1)))
    res = is_minor(f, g, [rho])
    assert res.verdict is Verdict.YES
    assert all(preserves(h, rho) for h in res.witness)
    assert compose(g, res.witness) == f


def test_projection_is_minor_of_everything_nonconstant():
    g = Operation.from_function(3, 3, lambda x, y, z: (x + y * z) % 3)
    assert is_minor(projection(3, 1, 0), g).verdict is Verdict.YES


def test_range_is_necessary():
    f = Operation(3, 1, (0, 1, 2))
    g = Operation.from_function(3, 2, lambda x, y: min(x, 1))
    res = is_minor(f, g)
    assert res.verdict is Verdict.NO


def test_full_clone_minor_is_range_containment():
    rng = np.random.default_rng(3)
    for _ in range(60):
        f = _random_op(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)))
        g = _random_op(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)))
        want = range_of(f) <= range_of(g)
        assert (is_minor(f, g).verdict is Verdict.YES) == want


def test_budget_exhaustion_is_unknown():
    from clonekit import witnesses as W

    rho = W.family_relation("34")
    f3 = W.build_family(W.WitnessFamily("34", 3))
    f4 = W.build_family(W.WitnessFamily("34", 4))
    res = is_minor(f3, f4, [rho], Budget(max_nodes=1))
    assert res.verdict is Verdict.UNKNOWN
    assert "budget" in res.reason


def test_size_limits():
    big = Operation(3, 6, tuple([0] * 3**6))
    with pytest.raises(ValueError):
        is_minor(big, Operation(3, 1, (0, 1, 2)))
    with pytest.raises(ValueError):
        is_minor(Operation(3, 1, (0, 1, 2)), Operation(3, 7, tuple([0] * 3**7)))


def test_universe_mismatch():
    with pytest.raises(ValueError):
        is_minor(Operation(2, 1, (0, 1)), Operation(3, 1, (0, 1, 2)))


def test_are_equivalent():
    f = Operation.from_function(3, 2, max)
    g = Operation.from_function(3, 2, lambda x, y: max(y, x))
    assert are_equivalent(f, g, [order3(0, 1, 2)]) is Verdict.YES
    # min(max, max) = max with max monotone, so max and min are equivalent here
    h = Operation.from_function(3, 2, min)
    assert are_equivalent(f, h, [order3(0, 1, 2)]) is Verdict.YES
    low = Operation.from_function(3, 2, lambda x, y: min(x, 1))
    assert are_equivalent(f, low, [order3(0, 1, 2)]) is Verdict.NO


@pytest.mark.parametrize("name", ["leq", "eps", "gamma", "line24"])
def test_solve_all_matches_pol_part(name):
    rels = RELATION_SETS[name]
    want = O.pol_part([r.tuples for r in rels], 3, 2)
    assert solve_all(3, 2, rels) == sorted(want)


def test_full_clone_unary_classes():
    part = enumerate_classes([], 1)
    assert sorted(tuple(sorted(range_of(c[0]))) for c in part.classes) == [
        (0,), (0, 1), (0, 1, 2), (0, 2), (1,), (1, 2), (2,)
    ]


def test_classes_partition_all_ops():
    rels = [order3(0, 1, 2)]
    part = enumerate_classes(rels, 1)
    ops = [op for cls in part.classes for op in cls]
    assert len(ops) == 27 == len(set(ops))
    for cls in part.classes:
        for f, g in itertools.combinations(cls[:3], 2):
            assert are_equivalent(f, g, rels) is Verdict.YES
    reps = part.representatives
    for f, g in itertools.combinations(reps, 2):
        assert are_equivalent(f, g, rels) is Verdict.NO


def test_partial_result_on_tiny_budget():
    with pytest.raises(PartialResultError) as exc:
        enumerate_classes([literal_relation(24, ABC)], 2, Budget(max_nodes=0), ops=None)
    assert isinstance(exc.value.classes, list)


def test_enumerate_classes_arity_limit():
    with pytest.raises(ValueError):
        enumerate_classes([], 3)
