import itertools

import numpy as np
import pytest

import oracles as O
from clonekit.core import (
    NotClosedError,
    Operation,
    OperationVector,
    Relation,
    compose,
    constant,
    decode_tuple,
    discriminator,
    encode_tuple,
    essential_arity,
    essential_positions,
    format_table,
    kernel,
    parse_table,
    points,
    preserves,
    preserves_naive,
    preserves_tables,
    projection,
    pullback_relation,
    range_of,
    read_relation,
    related_points,
    restrict_operation,
    restrict_relation,
    unary_collapse,
    write_relation,
)
from clonekit.relations import eps3, iota3, lambda3, order3


def test_encoding_is_big_endian():
    assert encode_tuple(3, (1, 2)) == 5
    assert decode_tuple(3, 2, 5) == (1, 2)
    assert points(3, 2).tolist()[5] == [1, 2]
    assert points(2, 3).tolist() == [list(t) for t in itertools.product(range(2), repeat=3)]


def test_operation_validation():
    with pytest.raises(ValueError):
        Operation(3, 1, (0, 1))
    with pytest.raises(ValueError):
        Operation(3, 1, (0, 1, 3))


def test_operation_call_and_from_function():
    f = Operation.from_function(3, 2, lambda x, y: (x + 2 * y) % 3)
    assert f(1, 2) == 2
    assert f.table == tuple((x + 2 * y) % 3 for x in range(3) for y in range(3))


def test_projections_and_constants():
    p = projection(3, 3, 1)
    assert all(p(*t) == t[1] for t in itertools.product(range(3), repeat=3))
    assert set(constant(3, 2, 2).table) == {2}
    with pytest.raises(ValueError):
        projection(3, 2, 2)


def test_discriminator_table():
    t = discriminator(3)
    assert t.table == O.discriminator_table(3)
    assert t(1, 1, 2) == 2 and t(1, 0, 2) == 1


def test_compose_matches_oracle():
    g = Operation.from_function(3, 2, lambda x, y: max(x, y))
    h1 = Operation.from_function(3, 3, lambda x, y, z: (x + z) % 3)
    h2 = projection(3, 3, 1)
    assert compose(g, [h1, h2]).table == O.compose(g.table, 3, [h1.table, h2.table], 3)


def test_compose_rejects_mismatch():
    g = Operation.from_function(3, 2, max)
    with pytest.raises(ValueError):
        compose(g, [projection(3, 2, 0)])
    with pytest.raises(ValueError):
        compose(g, [projection(3, 2, 0), projection(3, 3, 0)])


def test_operation_vector_image():
    v = OperationVector([projection(3, 2, 1), projection(3, 2, 0)])
    assert v.arity == 2 and v.k == 3
    assert v.image((0, 2)) == (2, 0)


def test_relation_roundtrip_and_membership():
    rho = Relation.from_tuples(3, [(0, 1), (2, 2)])
    assert (0, 1) in rho and (1, 0) not in rho
    assert len(rho) == 2
    assert read_relation(write_relation(rho)) == rho
    assert rho.permute_coordinates((1, 0)).tuples == ((1, 0), (2, 2))


def test_read_relation_errors():
    with pytest.raises(ValueError):
        read_relation("3 2 2\n0 1\n")
    with pytest.raises(ValueError):
        read_relation("3 2 1\n0 1 2\n")


def test_related_points_count():
    rho = order3(0, 1, 2)
    assert related_points(rho, 2).shape == (len(rho) ** 2, 2)


@pytest.mark.parametrize("rho", [order3(0, 1, 2), eps3(0, 1, 2), lambda3(), iota3()], ids=str)
def test_preserves_routes_agree(rho):
    rng = np.random.default_rng(7)
    for _ in range(40):
        f = Operation(3, 2, tuple(rng.integers(0, 3, 9).tolist()))
        want = O.preserves(f.table, 3, 2, rho.tuples)
        assert preserves(f, rho) == want
        assert preserves_naive(f, rho) == want


def test_preserves_tables_vectorised():
    rho = order3(0, 1, 2)
    tabs = points(3, 9)
    mask = preserves_tables(tabs, rho)
    assert int(mask.sum()) == 175  # [DERIVED] oracle pol_part count


def test_structure_queries():
    f = Operation.from_function(3, 3, lambda x, y, z: (x + z) % 3)
    assert range_of(f) == frozenset({0, 1, 2})
    assert essential_positions(f) == (0, 2)
    assert essential_arity(f) == 2
    assert unary_collapse(f) is None
    g = Operation.from_function(3, 2, lambda x, y: (2 * y) % 3)
    assert unary_collapse(g).table == (0, 2, 1)
    assert len(kernel(g)) == 3


def test_restriction_and_pullback():
    f = Operation.from_function(3, 2, max)
    fb = restrict_operation(f, [0, 2])
    assert fb.k == 2 and fb.table == (0, 1, 1, 1)
    g = Operation.from_function(3, 1, lambda x: (x + 1) % 3)
    with pytest.raises(NotClosedError):
        restrict_operation(g, [0, 1])
    rb = restrict_relation(order3(0, 1, 2), [1, 2])
    assert rb.tuples == ((0, 0), (0, 1), (1, 1))
    pb = pullback_relation(Relation.equality(2), (0, 0, 1))
    assert pb == eps3(0, 1, 2)


def test_table_text_formats():
    f = parse_table("012")
    assert f.k == 3 and f.arity == 1
    g = parse_table("k=2:0110")
    assert g.k == 2 and g.arity == 2
    assert format_table(parse_table("012120201")) == "012120201"
    assert parse_table("0, 1, 2").table == (0, 1, 2)
    with pytest.raises(ValueError):
        parse_table("0120")
