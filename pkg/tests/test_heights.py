from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liplat.heights import (
    BoundaryCondition,
    Model,
    abs_order_leq,
    const_bc,
    extremal_extensions,
    height_from_lipschitz,
    interval_bc,
    interval_order_leq,
    is_admissible,
    lipschitz_bijection,
    lipschitz_from_height,
    log_weight,
    maximal_selection,
    minimal_selection,
    odd_range,
    parse_bc,
    parse_height,
    pm1_bc,
    dump_height,
    satisfies_bc,
    validate_height,
    weight_exact,
)
from liplat.lattice import FiniteGraph, Lozenge, build_patch


def path(n):
    return FiniteGraph(n, [(i, i + 1) for i in range(n - 1)])


def test_validate_height_basics():
    g = path(2)
    assert validate_height(g, [1, 1])
    assert not validate_height(g, [1, 5])
    assert not validate_height(g, [1, 2])
    assert validate_height(g, [-3, -1])
    assert not validate_height(g, [1])  # wrong length


def test_weight_values():
    g = path(3)
    m2 = Model(g, 2)
    assert log_weight(m2, [1, 1, 3]) == pytest.approx(np.log(2))
    assert log_weight(Model(g, 1), [1, 1, 1]) == 0.0
    mc = Model(g, 3)
    assert log_weight(mc, [1, 1, 1]) == pytest.approx(2 * np.log(3))
    assert weight_exact(m2, [1, 1, 1]) == Fraction(4)
    assert weight_exact(m2, [1, 3, 5]) == Fraction(1)


def test_weight_rejects_invalid():
    with pytest.raises(ValueError):
        log_weight(Model(path(2), 2), [1, 5])
    with pytest.raises(ValueError):
        Model(path(2), 0.5)


def test_weight_additive_over_components():
    g1 = path(3)
    m1 = Model(g1, 2)
    both = FiniteGraph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    mb = Model(both, 2)
    h1, h2 = [1, 1, 3], [5, 5, 5]
    assert log_weight(mb, h1 + h2) == pytest.approx(
        log_weight(m1, h1) + log_weight(m1, h2)
    )


def test_admissibility_distance_criterion():
    g = path(4)
    assert not is_admissible(g, BoundaryCondition({0: (1,), 1: (5,)}))
    assert is_admissible(g, BoundaryCondition({0: (1,), 1: (3,)}))
    assert is_admissible(g, BoundaryCondition({0: (1,), 3: (7,)}))  # 6 <= 6
    assert not is_admissible(g, BoundaryCondition({0: (1,), 3: (9,)}))


def test_admissibility_set_valued():
    g = path(2)
    # gapped set: only the value 1 at vertex 1 is compatible
    bc = BoundaryCondition({0: (1,), 1: (-5, 1, 5)})
    assert is_admissible(g, bc)
    assert maximal_selection(g, bc) == {0: 1, 1: 1}
    assert minimal_selection(g, bc) == {0: 1, 1: 1}
    assert not is_admissible(g, BoundaryCondition({0: (1,), 1: (-5, 5)}))


def test_extremal_extensions_frozen():
    g = path(3)
    h_min, h_max = extremal_extensions(g, BoundaryCondition({0: (1,)}))
    assert h_min.tolist() == [1, -1, -3]
    assert h_max.tolist() == [1, 3, 5]
    h_min, h_max = extremal_extensions(g, BoundaryCondition({0: (1,), 2: (5,)}))
    assert h_min.tolist() == h_max.tolist() == [1, 3, 5]
    h_min, h_max = extremal_extensions(g, BoundaryCondition({0: (1,), 1: (1,), 2: (1,)}))
    assert h_min.tolist() == h_max.tolist() == [1, 1, 1]


def test_extremal_extensions_bound_oracle_support():
    from liplat.oracle import enumerate_heights

    p = build_patch("honeycomb", Lozenge(1))
    bc = pm1_bc(p)
    h_min, h_max = extremal_extensions(p, bc)
    dist = enumerate_heights(Model(p, 2), bc)
    support = np.asarray([h for h, _ in dist.items])
    assert np.all(support >= h_min) and np.all(support <= h_max)
    # the envelope is attained
    assert np.array_equal(support.min(axis=0), h_min)
    assert np.array_equal(support.max(axis=0), h_max)


def test_bc_kinds():
    assert BoundaryCondition({0: (1,)}).kind == "single"
    assert BoundaryCondition({0: (-1, 1)}).kind == "interval"
    assert BoundaryCondition({0: (-3, -1, 1, 3)}).kind == "interval"
    assert BoundaryCondition({0: (-5, -3, 3, 5)}).kind == "absolute"
    assert BoundaryCondition({0: (1, 5)}).kind == "general"
    with pytest.raises(ValueError):
        BoundaryCondition({0: (2,)})
    with pytest.raises(ValueError):
        BoundaryCondition({})


def test_abs_params():
    S, par = BoundaryCondition({0: (-1, 1), 1: (1, 3), 2: (-5, -3, 3, 5)}).abs_params()
    assert S == {1}
    assert par == {0: (1, 1), 1: (1, 3), 2: (3, 5)}
    # symmetric interval around 0 is the pm form, never the plus form
    assert BoundaryCondition({0: (-3, -1, 1, 3)}).abs_params()[0] == frozenset()
    assert BoundaryCondition({0: (-3, -1, 1)}).abs_params() is None


def test_abs_order_follows_case_split():
    pm1 = BoundaryCondition({0: (-1, 1)})
    i13 = BoundaryCondition({0: (1, 3)})
    pm35 = BoundaryCondition({0: (-5, -3, 3, 5)})
    s35 = BoundaryCondition({0: (3, 5)})
    s57 = BoundaryCondition({0: (5, 7)})
    assert abs_order_leq(pm1, pm1)
    assert abs_order_leq(pm1, i13)
    assert not abs_order_leq(i13, pm1)     # S not contained in S'
    assert not abs_order_leq(pm35, s35)    # b=5 > |a'|=3
    assert abs_order_leq(pm35, s57)        # b=5 <= |a'|=5
    assert not abs_order_leq(s35, pm35)
    with pytest.raises(ValueError):
        abs_order_leq(pm1, BoundaryCondition({0: (1, 5)}))


def test_interval_order():
    a = BoundaryCondition({0: (-1, 1), 1: (1,)})
    b = BoundaryCondition({0: (1, 3), 1: (1, 3)})
    assert interval_order_leq(a, b)
    assert not interval_order_leq(b, a)


@st.composite
def abs_bcs(draw):
    vals = {}
    for v in range(draw(st.integers(1, 3))):
        if draw(st.booleans()):
            a = draw(st.sampled_from([-1, 1, 3]))
            b = draw(st.sampled_from([a, a + 2, a + 4]))
            if a + b < 2:
                b = 2 - a if (2 - a) % 2 == 1 else 3
            vals[v] = odd_range(a, max(a, b))
        else:
            a = draw(st.sampled_from([1, 3, 5]))
            b = draw(st.sampled_from([a, a + 2]))
            vals[v] = tuple(sorted(set(range(a, b + 1, 2)) | {-x for x in range(a, b + 1, 2)}))
    return BoundaryCondition(vals)


@settings(max_examples=120, deadline=None)
@given(abs_bcs(), abs_bcs(), abs_bcs())
def test_abs_order_partial_order(x, y, z):
    if x.support != y.support or y.support != z.support:
        return
    assert abs_order_leq(x, x)
    if abs_order_leq(x, y) and abs_order_leq(y, x):
        assert x.values == y.values
    if abs_order_leq(x, y) and abs_order_leq(y, z):
        assert abs_order_leq(x, z)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([-5, -3, -1, 1, 3, 5]), min_size=1, max_size=3),
       st.lists(st.sampled_from([-5, -3, -1, 1, 3, 5]), min_size=1, max_size=3),
       st.integers(2, 5))
def test_admissible_iff_enumerable(vals0, vals1, n):
    from liplat.oracle import enumerate_heights

    g = path(n)
    bc = BoundaryCondition({0: tuple(vals0), n - 1: tuple(vals1)})
    adm = is_admissible(g, bc)
    if adm:
        dist = enumerate_heights(Model(g, 1), bc)
        assert len(dist) > 0
        assert all(satisfies_bc(h, bc) for h, _ in dist.items)
    else:
        with pytest.raises(ValueError):
            enumerate_heights(Model(g, 1), bc)


def test_bijection():
    assert height_from_lipschitz([0]).tolist() == [1]
    assert lipschitz_from_height([-1]).tolist() == [-1]
    assert height_from_lipschitz([0, 1]).tolist() == [1, 3]
    f = np.array([0, 1, 1, 0])
    assert np.array_equal(lipschitz_from_height(height_from_lipschitz(f)), f)
    assert lipschitz_bijection([0], "to_height").tolist() == [1]
    with pytest.raises(ValueError):
        lipschitz_from_height([2])


def test_constructors_and_serialization():
    p = build_patch("honeycomb", Lozenge(1))
    c1 = const_bc(p, 1)
    assert c1.kind == "single" and set(c1.support) == set(p.boundary)
    pm = pm1_bc(p)
    assert pm[p.boundary[0]] == (-1, 1)
    iv = interval_bc(p, -1, 3)
    assert iv.kind == "interval"
    assert parse_bc(pm.dump()) == pm
    h = extremal_extensions(p, c1)[1]
    assert np.array_equal(parse_height(dump_height(h)), h)


def test_restricted_and_negated():
    bc = BoundaryCondition({0: (1,), 1: (1, 3), 5: (-1, 1)})
    sub = bc.restricted([0, 5])
    assert sub.support == (0, 5)
    neg = bc.negated()
    assert neg[1] == (-3, -1)
