import itertools

import numpy as np
import pytest

import oracles as O
from clonekit.clones import (
    BurleChain,
    CapExceeded,
    Generated,
    Intersection,
    PolOf,
    UnsupportedArity,
    all_unary,
    clones_equal_up_to,
    contained_up_to,
    enumerate_ops,
    enumerate_tables,
    generate_closure,
    is_quasilinear,
    is_quasilinear_exhaustive,
    load_relation,
    membership,
    monoid_closure,
    parse_spec,
    separating_op,
    transformation_monoid_minus,
)
from clonekit.core import Operation, essential_arity, write_relation
from clonekit.relations import cycle3, eps3, iota3, lambda3, order3, subset


def test_transformation_monoid_minus_is_closed():
    tm = transformation_monoid_minus()
    assert len(tm) == 22  # identity plus the 21 non-permutations
    assert len(monoid_closure(tm)) == 22


def test_monoid_closure_with_a_cycle():
    cyc = Operation(3, 1, (1, 2, 0))
    assert len(monoid_closure([cyc])) == 3
    # [DERIVED] non-permutations, identity and both 3-cycles
    assert len(monoid_closure([*transformation_monoid_minus(), cyc])) == 24


def test_monoid_closure_of_nothing_is_the_identity():
    assert [u.table for u in monoid_closure([])] == [(0, 1, 2)]


def test_polof_parts_match_oracle():
    rels = [order3(0, 1, 2), subset(3, [0, 1])]
    C = PolOf(tuple(rels))
    for n in (1, 2):
        want = O.pol_part([r.tuples for r in rels], 3, n)
        assert [tuple(t) for t in enumerate_tables(C, n).tolist()] == sorted(want)


def test_ternary_part_of_pol_lambda3_is_affine():
    # operations preserving x - y + z are exactly the affine maps over Z_3 (3^4 of them)
    affine = sorted(
        {
            tuple((a * x + b * y + c * z + d) % 3 for x, y, z in itertools.product(range(3), repeat=3))
            for a, b, c, d in itertools.product(range(3), repeat=4)
        }
    )
    got = [tuple(t) for t in enumerate_tables(PolOf((lambda3(),)), 3).tolist()]
    assert got == affine


def test_enumerate_limit_and_ops():
    C = PolOf((order3(0, 1, 2),))
    assert len(enumerate_tables(C, 2, limit=175)) == 175
    with pytest.raises(CapExceeded):
        enumerate_tables(C, 2, limit=174)
    with pytest.raises(CapExceeded):
        enumerate_tables(PolOf((lambda3(),)), 3, limit=80)
    ops = enumerate_ops(C, 1)
    assert len(ops) == 10 and all(isinstance(f, Operation) for f in ops)


def test_enumerated_arrays_are_read_only():
    arr = enumerate_tables(PolOf((order3(0, 1, 2),)), 1)
    with pytest.raises(ValueError):
        arr[0, 0] = 2


def test_intersection_membership():
    C = Intersection((PolOf((order3(0, 1, 2),)), PolOf((eps3(0, 1, 2),))))
    want = set(O.pol_part([order3(0, 1, 2).tuples, eps3(0, 1, 2).tuples], 3, 2))
    got = {tuple(t) for t in enumerate_tables(C, 2).tolist()}
    assert got == want
    f = Operation.from_function(3, 2, max)
    assert membership(C, f)


def test_closure_matches_oracle():
    mx = Operation.from_function(3, 2, max)
    neg = Operation(3, 1, (2, 1, 0))
    cl = generate_closure([mx, neg], 2)
    want = O.closure_part([(mx.table, 2), (neg.table, 1)], 3, 2)
    assert cl.tables(2) == frozenset(want)
    assert cl.check_derivations()


def test_lattice_closure_with_monotone_unaries():
    mx = Operation.from_function(3, 2, max)
    mono = [u for u in all_unary() if membership(PolOf((order3(0, 1, 2),)), u)]
    C = Generated((mx, *mono), cap=2)
    assert len(enumerate_tables(C, 2)) == 46  # [DERIVED] oracle closure_part
    assert contained_up_to(C, PolOf((order3(0, 1, 2),)), 2) is None


def test_closure_replay():
    cl = generate_closure([Operation(3, 1, (1, 2, 0))], 1)
    assert len(cl.tables(1)) == 3
    for i in range(3):
        assert cl.replay(1, i).table in cl.tables(1)


def test_closure_cap():
    with pytest.raises(CapExceeded):
        generate_closure([Operation(3, 1, (0, 0, 0))], 4)
    C = Generated((Operation(3, 1, (0, 0, 0)),), cap=1)
    with pytest.raises(CapExceeded):
        membership(C, Operation.from_function(3, 2, max))


def test_empty_generator_set_gives_projections():
    cl = generate_closure([], 2)
    assert len(cl.tables(2)) == 2


def test_quasilinear_against_oracle():
    rng = np.random.default_rng(2)
    for _ in range(60):
        vals = rng.choice(3, size=2, replace=False)
        # xor-separable two-valued functions plus random noise
        if rng.random() < 0.5:
            h = rng.integers(0, 2, (2, 3))
            table = tuple(int(vals[h[0, x] ^ h[1, y]]) for x in range(3) for y in range(3))
        else:
            table = tuple(int(vals[v]) for v in rng.integers(0, 2, 9))
        f = Operation(3, 2, table)
        want = O.quasilinear(table, 3, 2)
        assert is_quasilinear(f) == want
        assert is_quasilinear_exhaustive(f) == want


def test_quasilinear_rejects_three_values():
    assert not is_quasilinear(Operation(3, 1, (0, 1, 2)))


def test_burle_membership_rule():
    B1, B2 = BurleChain(1), BurleChain(2)
    B0 = BurleChain(0)
    perm = Operation(3, 1, (1, 2, 0))
    assert membership(B0, perm) and membership(B1, perm) and membership(B2, perm)
    two_valued = Operation.from_function(3, 2, lambda x, y: int(x == y))
    assert not membership(B0, two_valued)
    assert membership(B2, two_valued)
    assert membership(B1, two_valued) == is_quasilinear(two_valued)
    full = Operation.from_function(3, 2, lambda x, y: (x + y) % 3)
    assert not membership(B2, full)
    assert membership(BurleChain(3), full)


def test_burle_with_restricted_monoid():
    B = BurleChain(2, tuple(transformation_monoid_minus()))
    assert not membership(B, Operation(3, 1, (1, 2, 0)))
    assert membership(B, Operation(3, 1, (0, 0, 1)))
    assert len(B.unary_tables) == 22


def test_slupecki_clone_is_pol_iota():
    B2 = BurleChain(2)
    assert clones_equal_up_to(B2, PolOf((iota3(),)), 2)


def test_burle_chain_is_increasing():
    for i in range(3):
        assert contained_up_to(BurleChain(i), BurleChain(i + 1), 2) is None
        assert separating_op(BurleChain(i), BurleChain(i + 1), 2) is not None


def test_burle_arity_limit():
    with pytest.raises(UnsupportedArity):
        enumerate_tables(BurleChain(1), 3)


def test_separating_op():
    C1 = PolOf((order3(0, 1, 2),))
    C2 = PolOf((order3(2, 1, 0),))
    assert separating_op(C1, C2, 2) is None  # reversed order, same clone
    C3 = PolOf((cycle3(0, 1, 2),))
    sep = separating_op(C1, C3, 1)
    assert sep is not None and membership(C1, sep) != membership(C3, sep)
    with pytest.raises(UnsupportedArity):
        separating_op(C1, C3, 4)


def test_contained_up_to_uses_generators():
    C = Generated((Operation.from_function(3, 2, max), *all_unary()), cap=2)
    sep = contained_up_to(C, PolOf((order3(0, 1, 2),)), 2)
    assert sep is not None and sep.arity == 1


def test_parse_spec(tmp_path):
    path = tmp_path / "leq.rel"
    path.write_text(write_relation(order3(0, 1, 2)))
    assert load_relation(str(path)) == order3(0, 1, 2)
    C = parse_spec(f"pol({path}, eps3[a=0,b=1,c=2])")
    assert isinstance(C, PolOf) and len(C.relations) == 2
    M = parse_spec("meet(pol(leq3[a=0,b=1,c=2]), pol(singleton[a=0,b=1,c=2]))")
    assert isinstance(M, Intersection)
    G = parse_spec("gen(012112222, 210; 2)")
    assert isinstance(G, Generated) and G.cap == 2
    B = parse_spec("burle(2; T-, 102)")
    assert isinstance(B, BurleChain) and len(B.unary_tables) > 22
    assert parse_spec("burle(1)").monoid is None
    for bad in ("pol(leq3", "foo(x)", "gen(012)"):
        with pytest.raises(ValueError):
            parse_spec(bad)


def test_pol_iota_slupecki_identity_at_arity_two():
    C = PolOf((iota3(),))
    got = {tuple(t) for t in enumerate_tables(C, 2).tolist()}
    want = {
        t for t in itertools.product(range(3), repeat=9)
        if len(set(t)) <= 2 or O.essential_arity(t, 3, 2) <= 1
    }
    assert got == want
    assert essential_arity(Operation(3, 2, next(iter(got)))) <= 2
