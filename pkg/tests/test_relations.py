import itertools

import pytest

from clonekit.core import Relation, preserves, projection
from clonekit.relations import (
    LITERALS,
    NAMED,
    NotCentralError,
    build_named,
    central_elements,
    central_relation,
    cycle3,
    eps3,
    equivalence_blocks,
    gamma3,
    h_regular_from_family,
    iota3,
    is_central,
    is_chain,
    is_equivalence,
    is_totally_reflexive,
    is_totally_symmetric,
    lambda2,
    lambda3,
    literal_columns,
    literal_relation,
    order2,
    order3,
    parse_relation_ref,
    phi3,
    rosenberg_classify,
    subset,
    transposition2,
    transposition3,
)

ABC = {"a": 0, "b": 1, "c": 2}


def test_small_constructors():
    assert subset(3, [1]).tuples == ((1,),)
    assert cycle3(0, 1, 2).tuples == ((0, 1), (1, 2), (2, 0))
    assert transposition3(0, 2).tuples == ((0, 2), (1, 1), (2, 0))
    assert transposition2(1, 2).tuples == ((1, 2), (2, 1))
    assert order2(2, 0).tuples == ((0, 0), (2, 0), (2, 2))
    assert order3(2, 0, 1).issubset(Relation.full(3, 2))
    assert len(order3(0, 1, 2)) == 6
    assert phi3(0, 2, 1) == (0, 1, 0)


def test_eps_blocks():
    assert set(equivalence_blocks(eps3(0, 2, 1))) == {frozenset({0, 2}), frozenset({1})}


def test_lambda3_is_the_graph_of_x_minus_y_plus_z():
    rho = lambda3()
    assert len(rho) == 27
    assert (1, 2, 0, 2) in rho and (1, 2, 0, 1) not in rho


def test_lambda2_uses_a_as_zero():
    rho = lambda2(2, 0)
    # image of the 2-element affine relation under 0 -> 2, 1 -> 0
    assert (0, 0, 0, 0) in rho and (2, 2, 2, 2) in rho and (0, 2, 2, 0) in rho
    assert len(rho) == 8


def test_iota3_counts_non_injective_triples():
    assert len(iota3()) == 27 - 6


def test_gamma3_is_least_central_relation():
    g = gamma3(1)
    assert is_central(g)
    assert central_elements(g) == frozenset({1})
    assert len(g) == 7
    assert g == central_relation(3, 2, 1)
    assert is_totally_reflexive(g) and is_totally_symmetric(g)


def test_unary_subsets_are_central():
    assert is_central(subset(3, [0]))
    assert central_elements(subset(3, [0, 2])) == frozenset({0, 2})
    with pytest.raises(NotCentralError):
        central_elements(order3(0, 1, 2))


def test_central_relation_bounds():
    with pytest.raises(ValueError):
        central_relation(3, 3, 0)


def test_iota3_is_h_regular_for_the_equality():
    assert h_regular_from_family([Relation.equality(3)], 3) == iota3()
    with pytest.raises(ValueError):
        h_regular_from_family([eps3(0, 1, 2)], 3)


def test_equivalence_and_chain():
    assert is_equivalence(eps3(0, 1, 2))
    assert not is_equivalence(order3(0, 1, 2))
    assert is_chain([eps3(0, 1, 2), Relation.equality(3)])
    assert not is_chain([eps3(0, 1, 2), eps3(0, 2, 1)])


# Columns read off the printed matrices with a, b, c = 0, 1, 2
PRINTED = {
    24: [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)],
    27: [(0, 0, 0), (1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2), (1, 1, 2)],
    38: [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2)],
}


@pytest.mark.parametrize("line", sorted(PRINTED))
def test_literal_columns_as_printed(line):
    assert literal_columns(line, ABC) == PRINTED[line]


def test_literals_are_rectangular():
    for line in LITERALS:
        cols = literal_columns(line, ABC)
        assert len({len(c) for c in cols}) == 1


def test_literal_relation_relabels():
    r = literal_relation(24, {"a": 2, "b": 0, "c": 1})
    assert set(r.tuples) == {(2, 2), (2, 0), (0, 2), (0, 0), (2, 1)}


def test_registry_and_references():
    assert parse_relation_ref("eps3[a=0,b=1,c=2]") == eps3(0, 1, 2)
    assert parse_relation_ref("gamma3[alpha=2, beta=0, gamma=1]") == gamma3(2)
    assert parse_relation_ref("lambda3") == lambda3()
    assert parse_relation_ref("line26[a=1,b=0,c=2]") == literal_relation(26, {"a": 1, "b": 0, "c": 2})
    for name in NAMED:
        assert build_named(name).k == 3
    with pytest.raises(KeyError):
        build_named("nope")
    with pytest.raises(ValueError):
        build_named("eps3", {"a": 0, "b": 0, "c": 2})
    with pytest.raises(ValueError):
        parse_relation_ref("eps3[a]")


@pytest.mark.parametrize(
    "rho, tag",
    [
        (order3(1, 0, 2), "bounded-order"),
        (cycle3(0, 1, 2), "prime-permutation"),
        (transposition3(0, 1), "other"),  # cycle type (2, 1): not prime
        (eps3(0, 1, 2), "nontrivial-equivalence"),
        (lambda3(), "prime-affine"),
        (gamma3(0), "central"),
        (subset(3, [1, 2]), "central"),
        (iota3(), "h-regular"),
        (Relation.equality(3), "other"),
        (order2(0, 1), "other"),
    ],
    ids=lambda x: x if isinstance(x, str) else None,
)
def test_rosenberg_types(rho, tag):
    assert rosenberg_classify(rho).tag == tag


def test_rosenberg_payloads():
    assert rosenberg_classify(order3(1, 0, 2)).payload == (1, 2)
    assert rosenberg_classify(iota3()).payload == 3
    assert rosenberg_classify(lambda3()).payload == 3


def test_projections_preserve_every_named_relation():
    for name in NAMED:
        rho = build_named(name)
        for n, i in itertools.product((1, 2), range(2)):
            if i < n:
                assert preserves(projection(3, n, i), rho)
