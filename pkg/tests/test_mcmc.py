"""Sampler correctness: exact conditionals, stationarity, agreement with
enumeration, and reproducibility."""

from fractions import Fraction

import numpy as np
import pytest

from liplat.heights import (
    BoundaryCondition,
    Model,
    const_bc,
    extremal_extensions,
    pm1_bc,
    satisfies_bc,
    validate_height,
)
from liplat.lattice import FiniteGraph, Lozenge, build_patch
from liplat.mcmc import (
    ChainState,
    Sampler,
    SamplerConfig,
    batch_se,
    heat_bath_site,
    rng_stream,
    run,
    site_conditional,
    torus_run,
)
from liplat.oracle import enumerate_heights, marginal_stats


def path(k: int) -> FiniteGraph:
    return FiniteGraph(k, [(i, i + 1) for i in range(k - 1)])


# ---------------------------------------------------------------------------
# the single-site conditional


def test_site_conditional_flat_neighbours():
    g = path(3)
    model = Model(g, Fraction(2))
    bc = BoundaryCondition({0: (1,), 2: (1,)})
    dist = site_conditional(model, bc, [1, 1, 1], 1)
    assert dist == [(-1, Fraction(1, 6)), (1, Fraction(4, 6)), (3, Fraction(1, 6))]


def test_site_conditional_forced_value():
    g = path(3)
    model = Model(g, Fraction(2))
    bc = BoundaryCondition({0: (1,), 2: (5,)})
    assert site_conditional(model, bc, [1, 3, 5], 1) == [(3, Fraction(1))]


def test_site_conditional_two_values():
    g = path(3)
    for c in (Fraction(1), Fraction(2), Fraction(7)):
        model = Model(g, c)
        bc = BoundaryCondition({0: (1,), 2: (3,)})
        dist = site_conditional(model, bc, [1, 1, 3], 1)
        assert [k for k, _ in dist] == [1, 3]
        assert dist[0][1] == dist[1][1] == Fraction(1, 2)


def test_site_conditional_respects_value_set():
    g = path(3)
    model = Model(g, Fraction(1))
    bc = BoundaryCondition({0: (1,), 1: (-1, 3), 2: (1,)})
    dist = site_conditional(model, bc, [1, 1, 1], 1)
    assert [k for k, _ in dist] == [-1, 3]


# ---------------------------------------------------------------------------
# exact stationarity of the site-pass kernel


def apply_site_kernel(model, bc, pmf: dict, x: int) -> dict:
    out: dict = {}
    for cfg, p in pmf.items():
        for k, q in site_conditional(model, bc, cfg, x):
            nxt = cfg[:x] + (int(k),) + cfg[x + 1:]
            out[nxt] = out.get(nxt, Fraction(0)) + p * q
    return out


def exact_pmf(model, bc) -> dict:
    dist = enumerate_heights(model, bc)
    return {tuple(int(v) for v in c): p for c, p in dist.items}


STATIONARY_CASES = [
    ("path3-c1", path(3), Fraction(1), {0: (1,), 2: (1,)}),
    ("path3-c2", path(3), Fraction(2), {0: (1,), 2: (1,)}),
    ("path4-c3/2", path(4), Fraction(3, 2), {0: (1,), 3: (-1, 1)}),
    ("star-c2", FiniteGraph(4, [(0, 1), (0, 2), (0, 3)]), Fraction(2),
     {1: (1,), 2: (1,), 3: (1, 3)}),
]


@pytest.mark.parametrize("name,g,c,bcv", STATIONARY_CASES, ids=[c[0] for c in STATIONARY_CASES])
def test_site_pass_fixes_exact_distribution(name, g, c, bcv):
    model = Model(g, c)
    bc = BoundaryCondition(bcv)
    pmf = exact_pmf(model, bc)
    for x in range(g.n):
        pmf = apply_site_kernel(model, bc, pmf, x)
    ref = exact_pmf(model, bc)
    assert set(pmf) == set(ref)
    assert all(pmf[k] == ref[k] for k in ref)


def test_hexagon_boundary_site_pass_stationary():
    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, Fraction(2))
    bc = const_bc(patch, 1)
    pmf = exact_pmf(model, bc)
    for x in range(patch.graph.n):
        pmf = apply_site_kernel(model, bc, pmf, x)
    assert pmf == exact_pmf(model, bc)


# ---------------------------------------------------------------------------
# vectorized class pass against the scalar conditional


class _ConstUniform:
    """Stand-in generator returning a fixed uniform value."""

    def __init__(self, value: float):
        self.value = value

    def random(self, size=None):
        return np.full(size, self.value)


@pytest.mark.parametrize("kind,c", [("honeycomb", 2.0), ("square", 3.0)])
def test_class_pass_candidate_range_matches_conditional(kind, c):
    patch = build_patch(kind, Lozenge(2))
    model = Model(patch, c)
    bc = const_bc(patch, 1)
    cfg = SamplerConfig(sweeps=1, seed=42, cluster_period=0)
    sampler = Sampler(model, bc, cfg)
    assert sampler.mode == "checkerboard"
    state = sampler.init_state()
    for _ in range(25):
        sampler.sweep(state)
    for extreme, pickfn in ((0.0, min), (1.0 - 1e-12, max)):
        for block in sampler._blocks:
            before = state.h.copy()
            saved = state.rng
            state.rng = _ConstUniform(extreme)
            sampler._class_pass(state, block)
            state.rng = saved
            idx = block[0]
            for v in idx:
                support = [k for k, _ in site_conditional(model, bc, before, int(v))]
                assert state.h[v] == pickfn(support)
            state.h = before


# ---------------------------------------------------------------------------
# chain mechanics


def test_sweep_keeps_state_valid():
    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, 2.0)
    bc = pm1_bc(patch)
    cfg = SamplerConfig(sweeps=1, seed=0, debug_validate=True)
    sampler = Sampler(model, bc, cfg)
    state = sampler.init_state()
    for _ in range(300):
        sampler.sweep(state)
    assert state.t == 300


def test_scalar_orders_keep_state_valid():
    # per-edge weights force the scalar path
    patch = build_patch("square", Lozenge(2))
    weights = 1.0 + np.arange(patch.graph.m) % 3
    for order in ("fixed", "shuffled"):
        model = Model(patch, weights)
        cfg = SamplerConfig(sweeps=1, seed=3, site_order=order, debug_validate=True)
        sampler = Sampler(model, const_bc(patch, 1), cfg)
        assert sampler.mode == order
        state = sampler.init_state()
        for _ in range(40):
            sampler.sweep(state)


def test_checkerboard_refused_off_support():
    patch = build_patch("square", Lozenge(2))
    weights = 1.0 + np.arange(patch.graph.m) % 3
    cfg = SamplerConfig(sweeps=1, site_order="checkerboard")
    with pytest.raises(ValueError):
        Sampler(Model(patch, weights), const_bc(patch, 1), cfg)


def test_heat_bath_site_updates_incident_edges():
    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, 2.0)
    bc = const_bc(patch, 1)
    sampler = Sampler(model, bc, SamplerConfig(sweeps=1, seed=9))
    state = sampler.init_state()
    from liplat.coupling import omega_from

    for x in range(patch.graph.n):
        heat_bath_site(sampler, state, x)
        assert np.array_equal(state.omega,
                              omega_from(state.h, state.B, sampler.edges))


def test_min_to_max_by_single_site_raises():
    # every intermediate field is one +2 move away, staying valid throughout
    patch = build_patch("honeycomb", Lozenge(2))
    bc = const_bc(patch, 1)
    h_min, h_max = extremal_extensions(patch.graph, bc)
    h = h_min.copy()
    steps = 0
    budget = int((h_max - h_min).sum()) // 2
    while not np.array_equal(h, h_max):
        raisable = np.flatnonzero(h < h_max)
        x = raisable[np.argmin(h[raisable])]
        h[x] += 2
        steps += 1
        assert validate_height(patch.graph, h)
        assert satisfies_bc(h, bc)
        assert steps <= budget
    assert steps == budget


# ---------------------------------------------------------------------------
# runs against enumeration


def center_free_vertex(patch):
    boundary = set(patch.boundary)
    free = [v for v in range(patch.graph.n) if v not in boundary]
    assert free
    return free[0]


RUN_CASES = [
    ("honeycomb-c1-flat", "honeycomb", 1.0, "const"),
    ("honeycomb-c2-pm", "honeycomb", 2.0, "pm"),
    ("honeycomb-c4-flat", "honeycomb", 4.0, "const"),
]


@pytest.mark.parametrize("name,kind,c,bckind", RUN_CASES, ids=[r[0] for r in RUN_CASES])
def test_run_agrees_with_oracle(name, kind, c, bckind):
    patch = build_patch(kind, Lozenge(1))
    model = Model(patch, c)
    bc = const_bc(patch, 1) if bckind == "const" else pm1_bc(patch)
    x = center_free_vertex(patch)
    cfg = SamplerConfig(sweeps=30000, burnin=300, seed=2024)
    res = run(model, bc, cfg, {"hsq": lambda h, B, om: float(h[x] ** 2)})
    stat = res.stats["hsq"]
    pmf, _, _ = marginal_stats(enumerate_heights(model, bc), x)
    exact = float(sum(v * v * p for v, p in pmf.items()))
    assert stat.se > 0
    assert abs(stat.mean - exact) <= 4 * stat.se


def test_run_edge_observable_agrees_with_oracle():
    # open fraction of the derived edge set, checked jointly
    from liplat.oracle import enumerate_joint

    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, Fraction(2))
    bc = const_bc(patch, 1)
    cfg = SamplerConfig(sweeps=30000, burnin=300, seed=77)
    res = run(model, bc, cfg, {"open": lambda h, B, om: float(om.mean())})
    joint = enumerate_joint(model, bc)
    exact = float(joint.expectation(lambda cfg_: Fraction(sum(cfg_[2]), len(cfg_[2]))))
    stat = res.stats["open"]
    assert abs(stat.mean - exact) <= 4 * stat.se


def test_torus_root_values_and_identity():
    # only the root is pinned; h(root) stays in {-1, 1} and visits both
    cfg = SamplerConfig(sweeps=20000, burnin=500, seed=5, keep_series=True)
    obs = {
        "root": lambda h, B, om: float(h[0]),
        "gap": lambda h, B, om: float(h[7] ** 2 - (h[7] - h[0]) ** 2 - 1.0),
    }
    res = torus_run("square", 2, 1.0, cfg, obs)
    roots = set(res.series["root"].tolist())
    assert roots <= {-1.0, 1.0} and len(roots) == 2
    stat = res.stats["gap"]
    assert abs(stat.mean) <= 4 * max(stat.se, 1e-12)


# ---------------------------------------------------------------------------
# reproducibility and plumbing


def test_same_seed_same_bytes():
    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, 2.0)
    bc = const_bc(patch, 1)
    obs = {"h2": lambda h, B, om: float(h[2])}
    a = run(model, bc, SamplerConfig(sweeps=400, burnin=20, seed=123), obs)
    b = run(model, bc, SamplerConfig(sweeps=400, burnin=20, seed=123), obs)
    c = run(model, bc, SamplerConfig(sweeps=400, burnin=20, seed=124), obs)
    assert a.dump() == b.dump()
    assert a.dump() != c.dump()


def test_rng_streams_are_distinct():
    a = rng_stream(5, 0).random(8)
    b = rng_stream(5, 1).random(8)
    c = rng_stream(5, 0).random(8)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)


def test_zero_sweeps_rejected():
    patch = build_patch("honeycomb", Lozenge(1))
    with pytest.raises(ValueError):
        run(Model(patch, 1.0), const_bc(patch, 1),
            SamplerConfig(sweeps=0), {})
    with pytest.raises(ValueError):
        SamplerConfig(sweeps=10, thin=0)


def test_cluster_moves_flip_free_component():
    patch = build_patch("honeycomb", Lozenge(1))
    model = Model(patch, 4.0)
    bc = pm1_bc(patch)
    x = center_free_vertex(patch)
    cfg = SamplerConfig(sweeps=4000, burnin=100, seed=8, keep_series=True)
    assert Sampler(model, bc, cfg).cluster_period == 1
    res = run(model, bc, cfg, {"sign": lambda h, B, om: float(np.sign(h[x]))})
    signs = set(res.series["sign"].tolist())
    assert {-1.0, 1.0} <= signs


def test_batch_se_iid_scale():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=4096)
    se = batch_se(xs)
    assert 0.5 / np.sqrt(4096) < se < 2.0 / np.sqrt(4096)
    assert batch_se([1.0]) == np.inf
