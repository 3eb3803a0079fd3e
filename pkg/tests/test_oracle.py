from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from liplat.heights import BoundaryCondition, Model, const_bc, pm1_bc
from liplat.lattice import FiniteGraph, Lozenge, Rectangle, build_patch
from liplat.oracle import (
    CapacityError,
    check_dominance,
    enumerate_fk,
    enumerate_heights,
    enumerate_homomorphisms,
    enumerate_joint,
    marginal_pmf,
    marginal_stats,
    threshold_event_family,
)


def path(n):
    return FiniteGraph(n, [(i, i + 1) for i in range(n - 1)])


PATH_BC = BoundaryCondition({0: (1,), 2: (1,)})


def test_path_uniform_weights():
    dist = enumerate_heights(Model(path(3), 1), PATH_BC)
    assert dist.items == [
        ((1, -1, 1), Fraction(1, 3)),
        ((1, 1, 1), Fraction(1, 3)),
        ((1, 3, 1), Fraction(1, 3)),
    ]
    pmf, mean, var = marginal_stats(dist, 1)
    assert mean == 1 and var == Fraction(8, 3)


def test_path_weight_two():
    dist = enumerate_heights(Model(path(3), 2), PATH_BC)
    pmf, mean, var = marginal_stats(dist, 1)
    assert pmf == {-1: Fraction(1, 6), 1: Fraction(4, 6), 3: Fraction(1, 6)}
    assert mean == 1 and var == Fraction(4, 3)
    assert dist.probability(lambda h: h[1] >= 1) == Fraction(5, 6)


def test_fully_pinned_single_config():
    g = path(3)
    bc = BoundaryCondition({0: (1,), 1: (3,), 2: (5,)})
    dist = enumerate_heights(Model(g, 2), bc)
    assert dist.items == [((1, 3, 5), Fraction(1))]
    assert marginal_stats(dist, 1)[2] == 0


def test_value_window_restricts():
    dist = enumerate_heights(Model(path(3), 1), PATH_BC, value_window=(-1, 1))
    assert [h for h, _ in dist.items] == [(1, -1, 1), (1, 1, 1)]


def test_capacity_error():
    with pytest.raises(CapacityError):
        enumerate_heights(Model(path(14), 1), BoundaryCondition({0: (1,)}), cap=100)


def test_joint_single_edge_cases():
    k2 = FiniteGraph(2, [(0, 1)])
    m = Model(k2, 2)
    flat = enumerate_joint(m, BoundaryCondition({0: (1,), 1: (1,)}))
    assert flat.probability(lambda c: c[2][0] == 1) == Fraction(1, 2)
    # the derived edge equals the coin on a flat level-1 edge
    assert all(c[1] == c[2] for c, _ in flat.items)
    step = enumerate_joint(m, BoundaryCondition({0: (1,), 1: (3,)}))
    assert step.probability(lambda c: c[2][0] == 1) == 1
    cross = enumerate_joint(m, BoundaryCondition({0: (1,), 1: (-1,)}))
    assert cross.probability(lambda c: c[2][0] == 1) == 0


def test_joint_weight_one_has_no_coins():
    dist = enumerate_joint(Model(path(3), 1), PATH_BC)
    assert all(c[1] == (0, 0) for c, _ in dist.items)


def test_fk_frozen_values():
    k2 = FiniteGraph(2, [(0, 1)])
    dist = enumerate_fk(k2, Fraction(1, 2))
    assert dist.probability(lambda b: b[0] == 1) == Fraction(1, 3)
    wired = enumerate_fk(k2, Fraction(1, 2), wired=[0, 1])
    assert wired.probability(lambda b: b[0] == 1) == Fraction(1, 2)
    forced = enumerate_fk(k2, Fraction(1, 2), forced_open=[0])
    assert forced.items == [((1,), Fraction(1))]


def test_fk_two_weighting_on_triangle():
    tri = FiniteGraph(3, [(0, 1), (1, 2), (0, 2)])
    p = Fraction(1, 2)
    dist = enumerate_fk(tri, p)
    # hand-computed: weight 2^{clusters} (1/2)^3 -> counts by open edges
    by_open = {}
    for bits, pr in dist.items:
        by_open[sum(bits)] = by_open.get(sum(bits), Fraction(0)) + pr
    # 0 open: 2^3, three 1-open: 2^2 each, three 2-open: 2 each, full: 2
    Z = 8 + 3 * 4 + 3 * 2 + 2
    assert by_open == {0: Fraction(8, Z), 1: Fraction(12, Z),
                       2: Fraction(6, Z), 3: Fraction(2, Z)}


def test_symmetry_pm1_and_const1():
    p = build_patch("honeycomb", Rectangle(0, 0))
    m = Model(p.graph, 2)
    pm = enumerate_heights(m, pm1_bc(p))
    for v in range(p.n):
        pmf = marginal_pmf(pm, v)
        assert all(pmf[k] == pmf[-k] for k in pmf)
    one = enumerate_heights(m, const_bc(p, 1))
    for v in range(p.n):
        pmf = marginal_pmf(one, v)
        assert all(pmf[k] == pmf.get(2 - k) for k in pmf)


def test_log_concavity_of_marginals():
    # pmf of h(x) under the symmetric condition is log-concave
    for kind, reg, c in [("honeycomb", Lozenge(1), 2), ("square", Lozenge(1), 3)]:
        p = build_patch(kind, reg)
        dist = enumerate_heights(Model(p.graph, c), pm1_bc(p))
        for v in range(p.n):
            pmf = marginal_pmf(dist, v)
            ks = sorted(pmf)
            for a, b, cc in zip(ks, ks[1:], ks[2:]):
                if b - a == 2 and cc - b == 2:
                    assert pmf[b] ** 2 >= pmf[a] * pmf[cc]


def test_smp_conditional_matches_fresh_enumeration():
    g = path(5)
    m = Model(g, 2)
    bc = BoundaryCondition({0: (1,), 4: (1,)})
    dist = enumerate_heights(m, bc)
    for a in (-1, 1, 3):
        for b in (-1, 1, 3):
            try:
                cond = dist.condition(lambda h: h[1] == a and h[3] == b)
            except ValueError:
                continue
            mid = cond.map(lambda h: (h[2],))
            sub = Model(path(3), 2)
            fresh = enumerate_heights(sub, BoundaryCondition({0: (a,), 2: (b,)}))
            assert mid.tv_distance(fresh.map(lambda h: (h[1],))) == 0


def test_dominance_identity_is_tight():
    dist = enumerate_heights(Model(path(3), 2), PATH_BC)
    rep = check_dominance(dist, dist, threshold_event_family([0, 1, 2], [-1, 1, 3]))
    assert rep.ok
    assert all(pl == ph for _, pl, ph, _ in rep.rows)


def test_cbc_on_heights_abs_marginal():
    g = path(3)
    m = Model(g, 1)
    low = enumerate_heights(m, BoundaryCondition({0: (1,), 2: (-1, 1)}))
    high = enumerate_heights(m, PATH_BC)
    rep = check_dominance(low, high, transform=lambda h: tuple(abs(x) for x in h))
    assert rep.ok


def test_one_lipschitz_counterexample():
    # the two-to-one correspondence f = (h-1)/2 turns integer 1-Lipschitz
    # boundary data 0 / {±1} into heights 1 / {-1, 3}; conditional pushing
    # of |f(middle)| is NOT monotone, unlike for the odd height model
    g = path(3)
    m = Model(g, 1)
    low = enumerate_heights(m, BoundaryCondition({0: (1,), 2: (1,)}))
    high = enumerate_heights(m, BoundaryCondition({0: (1,), 2: (-1, 3)}))
    ev = lambda h: abs((h[1] - 1) // 2) >= 1
    p_low = low.probability(ev)
    p_high = high.probability(ev)
    assert p_low == Fraction(2, 3)
    assert p_high == Fraction(1, 2)
    assert p_low > p_high  # dominance fails in the 1-Lipschitz picture


def test_dump_and_map():
    dist = enumerate_heights(Model(path(3), 1), PATH_BC)
    text = dist.dump()
    assert text.splitlines()[0] == "1 -1 1 : 1/3"
    folded = dist.map(lambda h: tuple(abs(x) for x in h))
    assert folded.probability(lambda h: h == (1, 1, 1)) == Fraction(2, 3)
    absmid = dist.map(lambda h: (abs(h[1]),))
    assert dict(absmid.items) == {(1,): Fraction(2, 3), (3,): Fraction(1, 3)}


def test_homomorphisms_single_edge_and_star():
    dist = enumerate_homomorphisms(path(2), {0: (0,)})
    assert dict(dist.items) == {(0, -1): Fraction(1, 2), (0, 1): Fraction(1, 2)}
    star = FiniteGraph(4, [(0, 1), (0, 2), (0, 3)])
    dist = enumerate_homomorphisms(star, {0: (0,)})
    assert len(dist) == 8
    assert all(set(f[1:]) <= {-1, 1} for f, _ in dist.items)


def test_homomorphisms_four_cycle_count():
    c4 = FiniteGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    dist = enumerate_homomorphisms(c4, {0: (0,)})
    assert dist.Z == 6
    assert dist.probability(lambda f: f[2] == 0) == Fraction(4, 6)


def test_homomorphisms_errors():
    with pytest.raises(ValueError):
        enumerate_homomorphisms(FiniteGraph(3, [(0, 1), (1, 2), (2, 0)]), {0: (0,)})
    with pytest.raises(ValueError):
        enumerate_homomorphisms(FiniteGraph(3, [(0, 1)]), {0: (0,)})
    with pytest.raises(CapacityError):
        enumerate_homomorphisms(path(12), {0: (0,)}, cap=16)
