"""Exact verification suite and desk-scale sampling studies.

Two layers. verify_suite() replays every enumeration-backed identity and
inequality on a corpus of small instances and reports named checks with
their exact discrepancy norms; it is deterministic and needs no seed. The
scan functions (variance_scan, loop_scan, tail_scan) estimate observables
with the chain sampler across a ladder of sizes, fit the simple laws those
observables should follow, and attach pass/fail verdicts using the
thresholds in verdicts.py. Scans are reproducible byte for byte from the
master seed, independently of the worker-pool size.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import verdicts
from .coupling import clusters, fixed_sign_edges, quotient_graph, resample_signs_exact
from .heights import (
    BoundaryCondition,
    Model,
    abs_order_leq,
    const_bc,
    interval_order_leq,
    odd_range,
    pm1_bc,
)
from .lattice import (
    Annulus,
    FiniteGraph,
    Lozenge,
    Rectangle,
    build_patch,
    graph_distance,
    is_symmetric_quad,
    make_quad,
    reflect,
)
from .mcmc import SamplerConfig, batch_se, run, site_conditional
from .oracle import (
    ExactDistribution,
    bernoulli_weights,
    check_dominance,
    enumerate_fk,
    enumerate_heights,
    enumerate_homomorphisms,
    enumerate_joint,
    marginal_pmf,
    threshold_event_family,
)
from .percolation import (
    EventEvaluator,
    EventSpec,
    corner_quad,
    edge_set,
    parse_edge_set,
    quad_crossing,
)

# lattice kinds whose planar duals have the degree bound that makes the
# primal-implies-dual crossing inclusion (and hence the loop sandwich) exact
_DEGREE3_KINDS = ("honeycomb", "square-octagon")

_PATCH_VERTEX_BUDGET = 4_000_000


# ---------------------------------------------------------------------------
# corpus


@dataclass(frozen=True)
class CorpusInstance:
    """One small model every exact check can enumerate in full."""

    name: str
    model: Model
    bc: BoundaryCondition

    @property
    def graph(self) -> FiniteGraph:
        return self.model.graph


def _path_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, [(i, i + 1) for i in range(n - 1)])


def _triangle_graph() -> FiniteGraph:
    return FiniteGraph(3, [(0, 1), (1, 2), (0, 2)])


def _two_hex_graph() -> FiniteGraph:
    # two hexagons glued along the edge (2, 3); vertices 2 and 3 interior
    return FiniteGraph(10, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0),
                            (2, 6), (6, 7), (7, 8), (8, 9), (9, 3)])


def corpus() -> list:
    hexpatch = build_patch("honeycomb", Rectangle(0, 0))
    boxpatch = build_patch("square", Lozenge(1))
    # one honeycomb unit cell with periodic wrap: two sites, three edges
    torus_cell = FiniteGraph(2, [(0, 1), (0, 1), (0, 1)])
    twohex = _two_hex_graph()
    star = FiniteGraph(4, [(0, 1), (0, 2), (0, 3)])
    return [
        CorpusInstance("path3-flat", Model(_path_graph(3), Fraction(1)),
                       BoundaryCondition({0: (1,), 2: (1,)})),
        CorpusInstance("path4-stiff", Model(_path_graph(4), Fraction(2)),
                       BoundaryCondition({0: (1,), 3: (-1, 1)})),
        CorpusInstance("path5-window", Model(_path_graph(5), Fraction(3, 2)),
                       BoundaryCondition({0: (1,), 4: (1, 3)})),
        CorpusInstance("triangle-mid", Model(_triangle_graph(), Fraction(3, 2)),
                       BoundaryCondition({0: (1,)})),
        CorpusInstance("star-heavy", Model(star, Fraction(4)),
                       BoundaryCondition({1: (1,), 2: (1,), 3: (1, 3)})),
        CorpusInstance("hexagon-balanced", Model(hexpatch, Fraction(2)),
                       pm1_bc(hexpatch)),
        CorpusInstance("square-box-pinned", Model(boxpatch, Fraction(3)),
                       const_bc(boxpatch, 1)),
        CorpusInstance("two-hex-plateau", Model(twohex, Fraction(5, 2)),
                       BoundaryCondition({v: (1,) for v in (0, 1, 4, 5, 6, 7, 8, 9)})),
        CorpusInstance("hex-torus-cell", Model(torus_cell, Fraction(2)),
                       BoundaryCondition({0: (-1, 1)})),
    ]


# ---------------------------------------------------------------------------
# verify suite plumbing


@dataclass
class CheckResult:
    name: str
    group: str
    ok: bool
    discrepancy: object = 0
    detail: str = ""

    def line(self) -> str:
        s = "PASS" if self.ok else "FAIL"
        out = f"{s} [{self.group}] {self.name} discrepancy={self.discrepancy}"
        if self.detail:
            out += f"  ({self.detail})"
        return out


@dataclass
class VerifyReport:
    checks: list
    elapsed: dict

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def dump(self) -> str:
        lines = [c.line() for c in self.checks]
        for g, dt in self.elapsed.items():
            lines.append(f"# group {g}: {dt:.2f}s")
        lines.append(f"# {len(self.checks) - len(self.failures())}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _check(group: str, name: str, fn) -> CheckResult:
    try:
        ok, disc, detail = fn()
    except Exception as exc:
        return CheckResult(name, group, False, detail=f"raised {exc!r}")
    return CheckResult(name, group, bool(ok), disc, detail)


# -- identity checks --------------------------------------------------------


def _dotted(g: FiniteGraph) -> FiniteGraph:
    """Subdivide every edge with a midpoint vertex (ids appended after g's)."""
    edges = []
    for k, (u, v) in enumerate(g.edges):
        edges += [(u, g.n + k), (g.n + k, v)]
    return FiniteGraph(g.n + g.m, edges)


def _dotting_tv(g: FiniteGraph):
    homs = enumerate_homomorphisms(_dotted(g), {0: (0,)})
    push = homs.map(lambda f: tuple(x + 1 for x in f[: g.n]), space="height")
    target = enumerate_heights(Model(g, Fraction(2)), BoundaryCondition({0: (1,)}))
    tv = push.tv_distance(target)
    return tv == 0, tv, f"{len(target)} fields"


def _star_of(tris, n_corners: int) -> FiniteGraph:
    edges = []
    for t, tri in enumerate(tris):
        edges += [(v, n_corners + t) for v in tri]
    return FiniteGraph(n_corners + len(tris), edges)


def _star_triangle_tv(tris, base_edges, n_corners: int):
    homs = enumerate_homomorphisms(_star_of(tris, n_corners), {0: (0,)})
    push = homs.map(lambda f: tuple(x + 1 for x in f[:n_corners]), space="height")
    base = Model(FiniteGraph(n_corners, base_edges), math.sqrt(2.0))
    target = enumerate_heights(base, BoundaryCondition({0: (1,)}))
    tv = float(push.tv_distance(target))
    return tv <= 1e-10, tv, f"{len(target)} fields"


_BOWTIE_TRIS = ((0, 1, 2), (2, 3, 4))
_BOWTIE_EDGES = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]


def _star_triangle_weights():
    # per corner field: the center-extension count must be 2^{#flat triangles}
    # and the flat-edge count m + 2 * #flat triangles (triangles edge-disjoint)
    homs = enumerate_homomorphisms(_star_of(_BOWTIE_TRIS, 5), {0: (0,)})
    counts: dict = {}
    for f, p in homs.items:
        counts[f[:5]] = counts.get(f[:5], 0) + p * homs.Z
    bad = 0
    for y, cnt in counts.items():
        flat_tris = sum(1 for a, b, c in _BOWTIE_TRIS if y[a] == y[b] == y[c])
        flat_edges = sum(1 for u, v in _BOWTIE_EDGES if y[u] == y[v])
        if cnt != 2 ** flat_tris or flat_edges != len(_BOWTIE_TRIS) + 2 * flat_tris:
            bad += 1
    return bad == 0, bad, f"{len(counts)} corner fields"


def _parallel_edge_merge():
    doubled = FiniteGraph(3, [(0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)])
    a = enumerate_heights(Model(doubled, math.sqrt(2.0)), BoundaryCondition({0: (1,)}))
    b = enumerate_heights(Model(_triangle_graph(), Fraction(2)), BoundaryCondition({0: (1,)}))
    tv = float(a.tv_distance(b))
    return tv <= 1e-10, tv, ""


def _ising_cluster_tv(g: FiniteGraph, c, H, plus_vertex=None):
    """TV between the sign law given |h| = H and the quotient-graph Ising law."""
    H = np.asarray(H)
    part = clusters(g, fixed_sign_edges(H, g.edge_array()))
    reps: dict = {}
    order: list = []
    for v in range(g.n):
        lab = int(part.labels[v])
        if lab not in reps:
            reps[lab] = len(order)
            order.append(v)
    cl = [reps[int(part.labels[v])] for v in range(g.n)]
    model = Model(g, c)
    hi = int(H.max())
    dist = enumerate_heights(model, BoundaryCondition({0: odd_range(-hi, hi)}),
                             value_window=(-hi, hi))

    def matches(h):
        if any(abs(x) != int(t) for x, t in zip(h, H)):
            return False
        return plus_vertex is None or h[plus_vertex] > 0

    push = dist.condition(matches).map(
        lambda h: tuple(1 if h[v] > 0 else -1 for v in order), space="height")
    weights: dict = {}
    for sigma in itertools.product((-1, 1), repeat=len(order)):
        if plus_vertex is not None and sigma[cl[plus_vertex]] != 1:
            continue
        w = Fraction(1)
        for eid, (u, v) in enumerate(g.edges):
            if sigma[cl[u]] == sigma[cl[v]]:
                w *= model.c_exact[eid]
        weights[sigma] = w
    Z = sum(weights.values())
    ising = ExactDistribution("height", sorted((s, w / Z) for s, w in weights.items()),
                              Z, True)
    return push.tv_distance(ising)


def _signs_are_ising():
    path4 = _path_graph(4)
    cases = [
        (path4, Fraction(3, 2), (1, 1, 1, 1), None),
        (path4, Fraction(3, 2), (3, 1, 1, 3), None),
        (path4, Fraction(2), (1, 1, 3, 3), 3),
        (_triangle_graph(), Fraction(2), (1, 1, 1), None),
    ]
    worst = Fraction(0)
    for g, c, H, pin in cases:
        worst = max(worst, _ising_cluster_tv(g, c, H, pin))
    return worst == 0, worst, f"{len(cases)} cases"


def _cluster_law_given_levels():
    path4 = _path_graph(4)
    cases = [
        (path4, Fraction(2), (1, 1, 3, 1), ()),
        (path4, Fraction(2), (1, 1, 1, 1), (0,)),
        (path4, Fraction(2), (1, 3, 5, 3), (0, 3)),
        (_triangle_graph(), Fraction(3, 2), (1, 1, 1), (1,)),
    ]
    worst = Fraction(0)
    for g, c, H, S in cases:
        vals = {v: ((H[v],) if v in S else (-H[v], H[v])) for v in range(g.n)}
        dj = enumerate_joint(Model(g, c), BoundaryCondition(vals))
        got = dj.map(lambda cfg: cfg[2], space="edges")
        efix = np.flatnonzero(fixed_sign_edges(np.asarray(H), g.edge_array()))
        pvals = [pw[0] for pw in bernoulli_weights(Model(g, c))]
        want = enumerate_fk(g, pvals, forced_open=efix.tolist(), wired=list(S))
        worst = max(worst, got.tv_distance(want))
    return worst == 0, worst, f"{len(cases)} cases"


def _sign_redraw_per_cluster():
    g = _path_graph(4)
    bc = BoundaryCondition({0: (-1, 1)})
    dj = enumerate_joint(Model(g, Fraction(2)), bc)
    by_class: dict = {}
    for (h, B, om), p in dj.items:
        by_class.setdefault((tuple(abs(x) for x in h), om), []).append((h, p))
    worst = Fraction(0)
    for (H, om), members in sorted(by_class.items()):
        tot = sum(p for _, p in members)
        acc: dict = {}
        for h, p in members:
            acc[h] = acc.get(h, Fraction(0)) + p / tot
        got = ExactDistribution("height", sorted(acc.items()), tot, True)
        redraw = resample_signs_exact(g, np.asarray(members[0][0]), np.asarray(om), bc)
        want = ExactDistribution(
            "height", sorted((tuple(int(x) for x in hh), q) for hh, q in redraw), 1, True)
        worst = max(worst, got.tv_distance(want))
    return worst == 0, worst, f"{len(by_class)} classes"


def _open_edge_contraction():
    g = _path_graph(4)
    worst = Fraction(0)
    for forced in ([1], [0, 2]):
        full = enumerate_fk(g, Fraction(1, 2), forced_open=forced)
        keep = [e for e in range(g.m) if e not in set(forced)]
        restr = full.map(lambda bits: tuple(bits[e] for e in keep), space="edges")
        q, _ = quotient_graph(g, forced)
        worst = max(worst, restr.tv_distance(enumerate_fk(q, Fraction(1, 2))))
    return worst == 0, worst, ""


def _interior_law_given_shell():
    full = enumerate_heights(Model(_path_graph(5), Fraction(2)),
                             BoundaryCondition({0: (1,), 4: (1,)}))
    worst, count = Fraction(0), 0
    for alpha in sorted({h[2:] for h, _ in full.items}):
        cond = full.condition(lambda h, a=alpha: h[2:] == a).map(
            lambda h: h[:3], space="height")
        sub = enumerate_heights(Model(_path_graph(3), Fraction(2)),
                                BoundaryCondition({0: (1,), 2: (alpha[0],)}))
        worst = max(worst, cond.tv_distance(sub))
        count += 1
    return worst == 0, worst, f"{count} shell values"


def _interior_law_at_closed_cut():
    # conditioning on the far side of a closed cut edge leaves a fresh
    # measure inside, with the free sign pair appended at the cut endpoint
    dist = enumerate_joint(Model(_path_graph(5), Fraction(2)),
                           BoundaryCondition({0: (1,), 4: (1,)}))
    fresh = enumerate_joint(Model(_path_graph(3), Fraction(2)),
                            BoundaryCondition({0: (1,), 2: (-1, 1)}))
    worst, count = Fraction(0), 0
    for h3 in (-1, 1, 3):
        for b34 in (0, 1):
            def ev(cfg, h3=h3, b34=b34):
                return cfg[0][3] == h3 and cfg[1][3] == b34 and cfg[2][2] == 0
            try:
                cond = dist.condition(ev)
            except ValueError:
                continue
            inner = cond.map(lambda cfg: (cfg[0][:3], cfg[1][:2], cfg[2][:2]),
                             space="joint")
            worst = max(worst, inner.tv_distance(fresh))
            count += 1
    return worst == 0 and count > 0, worst, f"{count} cut states"


def _root_gap_identity():
    # pinning only a fair-sign root makes the cross moment with the root
    # exactly one, on any connected graph
    patch = build_patch("honeycomb", Rectangle(0, 0))
    root = 0
    dist = enumerate_heights(Model(patch, Fraction(2)),
                             BoundaryCondition({root: (-1, 1)}))
    x = int(np.argmax(graph_distance(patch.graph, [root])))
    cross = dist.expectation(lambda h: h[x] * h[root])
    second = dist.expectation(lambda h: h[x] ** 2)
    gap = dist.expectation(lambda h: (h[x] - h[root]) ** 2)
    disc = abs(cross - 1) + abs(second - gap - 1)
    return disc == 0, disc, f"E[h(x)h(root)]={cross}"


def _identity_checks() -> list:
    out = [
        _check("identity", "dotting(triangle)", lambda: _dotting_tv(_triangle_graph())),
        _check("identity", "dotting(path)", lambda: _dotting_tv(_path_graph(4))),
        _check("identity", "star-triangle(single)",
               lambda: _star_triangle_tv(((0, 1, 2),), [(0, 1), (1, 2), (0, 2)], 3)),
        _check("identity", "star-triangle(bowtie)",
               lambda: _star_triangle_tv(_BOWTIE_TRIS, _BOWTIE_EDGES, 5)),
        _check("identity", "star-triangle-weights", _star_triangle_weights),
        _check("identity", "parallel-edge-merge", _parallel_edge_merge),
        _check("identity", "signs-are-ising", _signs_are_ising),
        _check("identity", "cluster-law-given-levels", _cluster_law_given_levels),
        _check("identity", "sign-redraw-per-cluster", _sign_redraw_per_cluster),
        _check("identity", "open-edge-contraction", _open_edge_contraction),
        _check("identity", "interior-law-given-shell", _interior_law_given_shell),
        _check("identity", "interior-law-at-closed-cut", _interior_law_at_closed_cut),
        _check("identity", "root-gap-identity", _root_gap_identity),
    ]
    return out


# -- inequality checks --------------------------------------------------------


def _variable_vertices(dist: ExactDistribution) -> list:
    n = len(dist.items[0][0])
    return [v for v in range(n) if len({h[v] for h, _ in dist.items}) > 1]


def _fkg_violation(dist: ExactDistribution, events):
    """Worst P[A]P[B] - P[A and B] over all event pairs (positive = violation)."""
    configs = [c for c, _ in dist.items]
    probs = [p for _, p in dist.items]
    vecs = [[bool(ev(c)) for c in configs] for _, ev in events]
    singles = [sum(p for p, b in zip(probs, v) if b) for v in vecs]
    zero = Fraction(0) if dist.exact else 0.0
    worst = zero
    for i in range(len(events)):
        for j in range(i, len(events)):
            joint = sum((p for p, a, b in zip(probs, vecs[i], vecs[j]) if a and b), zero)
            worst = max(worst, singles[i] * singles[j] - joint)
    return worst


def _positive_association(inst: CorpusInstance):
    dist = enumerate_heights(inst.model, inst.bc)
    verts = _variable_vertices(dist)
    events = threshold_event_family(verts, (1, 3))
    worst = _fkg_violation(dist, events)
    return worst <= 0, worst, f"{len(events)} events on {len(verts)} vertices"


def _absolute_association(inst: CorpusInstance):
    if inst.bc.abs_params() is None:
        return True, 0, "skipped: condition not absolute-type"
    dist = enumerate_heights(inst.model, inst.bc).map(
        lambda h: tuple(abs(x) for x in h), space="height")
    verts = _variable_vertices(dist)
    events = threshold_event_family(verts, (3, 5))
    worst = _fkg_violation(dist, events)
    return worst <= 0, worst, f"{len(events)} events on {len(verts)} vertices"


def _boundary_monotonicity():
    g = _path_graph(4)
    hexpatch = build_patch("honeycomb", Rectangle(0, 0))
    boxpatch = build_patch("square", Lozenge(1))
    pairs = [
        ("path4", Model(g, Fraction(2)),
         BoundaryCondition({0: (-1,), 3: (-1,)}),
         BoundaryCondition({0: (1,), 3: (3,)})),
        ("hexagon", Model(hexpatch, Fraction(2)),
         const_bc(hexpatch, -1), pm1_bc(hexpatch)),
        ("square-box", Model(boxpatch, Fraction(3)),
         const_bc(boxpatch, -1), const_bc(boxpatch, 1)),
    ]
    bad = 0
    names = []
    for label, model, lo, hi in pairs:
        assert interval_order_leq(lo, hi)
        dl = enumerate_heights(model, lo)
        dh = enumerate_heights(model, hi)
        events = threshold_event_family(range(model.graph.n), (-1, 1, 3))
        rep = check_dominance(dl, dh, events=events)
        if not rep.ok:
            bad += len(rep.violations)
            names.append(label)
    return bad == 0, bad, ",".join(names) if names else f"{len(pairs)} ordered pairs"


def _absolute_monotonicity():
    g = _path_graph(4)
    hexpatch = build_patch("honeycomb", Rectangle(0, 0))
    pm = BoundaryCondition({0: (-1, 1), 3: (-1, 1)})
    pairs = [
        ("plus-pin", Model(g, Fraction(2)), pm,
         BoundaryCondition({0: (1,), 3: (-1, 1)})),
        ("wider-band", Model(g, Fraction(2)), pm,
         BoundaryCondition({0: (-3, -1, 1, 3), 3: (-1, 1)})),
        ("hexagon-pin", Model(hexpatch, Fraction(2)),
         pm1_bc(hexpatch), const_bc(hexpatch, 1)),
    ]
    bad = 0
    names = []
    for label, model, lo, hi in pairs:
        assert abs_order_leq(lo, hi)
        dl = enumerate_heights(model, lo)
        dh = enumerate_heights(model, hi)
        events = threshold_event_family(range(model.graph.n), (3, 5))
        rep = check_dominance(dl, dh, events=events,
                              transform=lambda h: tuple(abs(x) for x in h))
        if not rep.ok:
            bad += len(rep.violations)
            names.append(label)
    return bad == 0, bad, ",".join(names) if names else f"{len(pairs)} ordered pairs"


def _percolated_association():
    g = _path_graph(4)
    dj = enumerate_joint(Model(g, Fraction(2)), BoundaryCondition({0: (-1, 1)}))

    def hB(cfg):
        return cfg[0] + cfg[1]

    def h_negB(cfg):
        return cfg[0] + tuple(1 - b for b in cfg[1])

    def absB(cfg):
        return tuple(abs(x) for x in cfg[0]) + cfg[1]

    def abs_negB(cfg):
        return tuple(abs(x) for x in cfg[0]) + tuple(1 - b for b in cfg[1])

    def abs_omega(cfg):
        return tuple(abs(x) for x in cfg[0]) + cfg[2]

    # thresholds over the concatenated (vertex values, edge bits) vector
    def family(nv, levels):
        evs = threshold_event_family(range(nv), levels)
        evs += threshold_event_family(range(nv, nv + g.m), (1,))
        return evs

    worst = Fraction(0)
    for view in (hB, h_negB):
        d = dj.map(view, space="height")
        worst = max(worst, _fkg_violation(d, family(g.n, (1, 3))))
    for view in (absB, abs_negB, abs_omega):
        d = dj.map(view, space="height")
        worst = max(worst, _fkg_violation(d, family(g.n, (3,))))
    return worst <= 0, worst, "5 coupled views"


def _cluster_coupling_monotone():
    """The conditional cluster law given levels is stochastically increasing
    in the level profile, the wired set, and the ambient graph."""
    g3, g4 = _path_graph(3), _path_graph(4)
    p = Fraction(1, 2)   # open probability at c = 2

    def efix(g, H):
        return np.flatnonzero(
            fixed_sign_edges(np.asarray(H), g.edge_array())).tolist()

    cases = [
        # higher levels: H = (1,1,1,3) vs H' = (1,1,3,3) on the same path
        ("levels", 3,
         enumerate_fk(g4, p, forced_open=efix(g4, (1, 1, 1, 3))),
         enumerate_fk(g4, p, forced_open=efix(g4, (1, 1, 3, 3)))),
        # larger wired set: S = {} vs S' = {0, 3}
        ("wiring", 3,
         enumerate_fk(g4, p, forced_open=efix(g4, (1, 1, 1, 3))),
         enumerate_fk(g4, p, forced_open=efix(g4, (1, 1, 1, 3)), wired=[0, 3])),
        # larger ambient graph, restricted back to the small edge set
        ("domain", 2,
         enumerate_fk(g3, p, forced_open=efix(g3, (1, 1, 3))),
         enumerate_fk(g4, p, forced_open=efix(g4, (1, 1, 3, 3))).map(
             lambda bits: bits[:2], space="edges")),
    ]
    worst = Fraction(0)
    for _, nedges, lo, hi in cases:
        for _, ev in threshold_event_family(range(nedges), (1,)):
            worst = max(worst, lo.probability(ev) - hi.probability(ev))
    return worst <= 0, worst, f"{len(cases)} ordered pairs"


def _shell_raises_levels():
    # growing the graph around a pinned-|.|w shell can only raise levels inside
    big = enumerate_heights(
        Model(_path_graph(5), Fraction(2)),
        BoundaryCondition({0: (-1, 1), 2: (-1, 1), 4: (-3, -1, 1, 3)}))
    small = enumerate_heights(Model(_path_graph(3), Fraction(2)),
                              BoundaryCondition({0: (-1, 1), 2: (-1, 1)}))
    big_inner = big.map(lambda h: tuple(abs(x) for x in h[:3]), space="height")
    small_abs = small.map(lambda h: tuple(abs(x) for x in h), space="height")
    worst = Fraction(0)
    for _, ev in threshold_event_family(range(3), (3, 5)):
        worst = max(worst, small_abs.probability(ev) - big_inner.probability(ev))
    return worst <= 0, worst, ""


def _embedding_raises_levels():
    # any embedding with absolute-type outer condition dominates the
    # standalone sign-free law in (|h|, omega) on the shared middle piece
    big = enumerate_joint(Model(_path_graph(5), Fraction(2)),
                          BoundaryCondition({0: (-1, 1), 4: (-1, 1)}))
    small = enumerate_joint(Model(_path_graph(3), Fraction(2)),
                            BoundaryCondition({0: (-1, 1), 2: (-1, 1)}))
    # (|h|, omega) on vertices {1,2,3} and edges {(1,2),(2,3)} of the big path
    big_view = big.map(lambda cfg: tuple(abs(x) for x in cfg[0][1:4]) + cfg[2][1:3],
                       space="height")
    small_view = small.map(lambda cfg: tuple(abs(x) for x in cfg[0]) + cfg[2],
                           space="height")
    events = threshold_event_family(range(3), (3,))
    events += threshold_event_family(range(3, 5), (1,))
    worst = Fraction(0)
    for _, ev in events:
        worst = max(worst, small_view.probability(ev) - big_view.probability(ev))
    return worst <= 0, worst, f"{len(events)} events"


def _one_lipschitz_contrast():
    # unit-step fields on a three-vertex path: pinning the far end to the
    # symmetric pair must NOT raise the middle absolute value (the
    # absolute-value comparison genuinely fails for this family)
    g = _path_graph(3)
    model = Model(g, Fraction(1))
    free_end = enumerate_heights(model, BoundaryCondition({0: (1,), 2: (1,)}))
    pm_end = enumerate_heights(model, BoundaryCondition({0: (1,), 2: (-1, 3)}))
    mid_up = lambda h: h[1] in (-1, 3)   # |f(mid)| = 1 for f = (h-1)/2
    p_free = free_end.probability(mid_up)
    p_pm = pm_end.probability(mid_up)
    ok = p_free == Fraction(2, 3) and p_pm == Fraction(1, 2) and p_free > p_pm
    return ok, abs(p_free - Fraction(2, 3)) + abs(p_pm - Fraction(1, 2)), \
        f"P={p_free} vs {p_pm}"


_QUAD_MARK_ANGLES = (240.0, 0.0, 120.0, 180.0)   # (bl, br, tr, tl)


def _hexagon_symmetric_quad():
    patch = build_patch("honeycomb", Rectangle(0, 0))
    marks = tuple(
        patch.halo_face_nearest((2.0 * math.cos(math.radians(a)),
                                 2.0 * math.sin(math.radians(a))))
        for a in _QUAD_MARK_ANGLES)
    return patch, make_quad(patch, marks)


def _symmetric_quad_floor(c):
    # fair-sign boundary keeps the mirror hypothesis for any weight: the
    # reflected condition, shifted two levels up, dominates the original
    def fn():
        patch, quad = _hexagon_symmetric_quad()
        if not is_symmetric_quad(quad, reflect(patch, "y")):
            return False, 1, "quad not mirror symmetric"
        model = Model(patch, c)
        dj = enumerate_joint(model, pm1_bc(patch))
        edges = patch.graph.edge_array()

        def crossed(kind, direction, graph):
            k = parse_edge_set(kind)
            return dj.probability(lambda cfg: quad_crossing(
                quad, edge_set(np.asarray(cfg[0]), np.asarray(cfg[1]),
                               np.asarray(cfg[2]), edges, k),
                direction, graph))

        floor = crossed("hwleq0", "horizontal", "dual")
        ceiling = crossed("hwgeq1", "vertical", "primal")
        bad = max(Fraction(0), Fraction(1, 2) - floor) \
            + max(Fraction(0), ceiling - Fraction(1, 2))
        return bad == 0, bad, f"dual low-set P={floor}, primal high-set P={ceiling}"
    return fn


def _inequality_checks() -> list:
    out = []
    for inst in corpus():
        out.append(_check("inequality", f"positive-association({inst.name})",
                          lambda inst=inst: _positive_association(inst)))
    for inst in corpus():
        out.append(_check("inequality", f"absolute-association({inst.name})",
                          lambda inst=inst: _absolute_association(inst)))
    out.append(_check("inequality", "boundary-monotonicity", _boundary_monotonicity))
    out.append(_check("inequality", "absolute-monotonicity", _absolute_monotonicity))
    out.append(_check("inequality", "percolated-association", _percolated_association))
    out.append(_check("inequality", "cluster-coupling-monotone",
                      _cluster_coupling_monotone))
    out.append(_check("inequality", "shell-raises-levels", _shell_raises_levels))
    out.append(_check("inequality", "embedding-raises-levels", _embedding_raises_levels))
    out.append(_check("inequality", "one-lipschitz-contrast", _one_lipschitz_contrast))
    for c in (Fraction(1), Fraction(3, 2), Fraction(2)):
        out.append(_check("inequality", f"symmetric-quad-floor(c={c})",
                          _symmetric_quad_floor(c)))
    return out


# -- stationarity checks ------------------------------------------------------


def _sweep_fixes(inst: CorpusInstance):
    model, bc = inst.model, inst.bc
    target = enumerate_heights(model, bc)
    pmf = dict(target.items)
    for x in range(model.graph.n):
        nxt: dict = {}
        for h, p in pmf.items():
            for k, q in site_conditional(model, bc, h, x):
                h2 = h[:x] + (k,) + h[x + 1:]
                nxt[h2] = nxt.get(h2, Fraction(0)) + p * q
        pmf = nxt
    orig = dict(target.items)
    tv = sum(abs(pmf.get(k, Fraction(0)) - v) for k, v in orig.items())
    tv += sum(v for k, v in pmf.items() if k not in orig)
    tv /= 2
    return tv == 0, tv, f"{len(orig)} states"


def _signflip_fixes(inst: CorpusInstance):
    model, bc = inst.model, inst.bc
    g = model.graph
    target = enumerate_heights(model, bc)
    dj = enumerate_joint(model, bc)
    acc: dict = {}
    for (h, B, om), p in dj.items:
        for h2, q in resample_signs_exact(g, np.asarray(h), np.asarray(om), bc):
            key = tuple(int(x) for x in h2)
            acc[key] = acc.get(key, Fraction(0)) + p * q
    orig = dict(target.items)
    tv = sum(abs(acc.get(k, Fraction(0)) - v) for k, v in orig.items())
    tv += sum(v for k, v in acc.items() if k not in orig)
    tv /= 2
    return tv == 0, tv, f"{len(dj)} joint states"


def _stationarity_checks() -> list:
    out = []
    for inst in corpus():
        out.append(_check("stationarity", f"stationary-sweep({inst.name})",
                          lambda inst=inst: _sweep_fixes(inst)))
    for inst in corpus():
        out.append(_check("stationarity", f"stationary-signflip({inst.name})",
                          lambda inst=inst: _signflip_fixes(inst)))
    return out


# -- duality checks -----------------------------------------------------------


def _all_masks(m: int):
    for bits in itertools.product((False, True), repeat=m):
        yield np.asarray(bits, dtype=bool)


def _random_masks(m: int, count: int, rng):
    for _ in range(count):
        yield rng.random(m) < rng.choice((0.25, 0.5, 0.75))


def _duality_violations(quad, masks) -> tuple:
    bad = total = 0
    for mask in masks:
        total += 1
        for d, dd in (("horizontal", "vertical"), ("vertical", "horizontal")):
            p = quad_crossing(quad, mask, d, "primal")
            q = quad_crossing(quad, ~mask, dd, "dual")
            if p == q:
                bad += 1
    return bad, total


def _inclusion_violations(quad, masks) -> tuple:
    bad = total = hits = 0
    for mask in masks:
        total += 1
        for d in ("horizontal", "vertical"):
            if quad_crossing(quad, mask, d, "primal"):
                hits += 1
                if not quad_crossing(quad, mask, d, "dual"):
                    bad += 1
    return bad, total, hits


def _quad_instances():
    hexpatch = build_patch("honeycomb", Rectangle(0, 0))
    return [
        ("hexagon", corner_quad(hexpatch)),
        ("honeycomb-corners", corner_quad(build_patch("honeycomb", Lozenge(1)))),
        ("square-box", corner_quad(build_patch("square", Lozenge(1)))),
    ]


def _duality_exhaustive(quad):
    def fn():
        bad, total = _duality_violations(quad, _all_masks(quad.patch.graph.m))
        return bad == 0, bad, f"{total} subsets"
    return fn


def _duality_randomized():
    rng = np.random.default_rng(20260815)
    bad = total = 0
    for kind in ("honeycomb", "square"):
        quad = corner_quad(build_patch(kind, Lozenge(2)))
        b, t = _duality_violations(quad, _random_masks(quad.patch.graph.m, 400, rng))
        bad += b
        total += t
    return bad == 0, bad, f"{total} random subsets"


def _inclusion_exhaustive(quad):
    def fn():
        bad, total, hits = _inclusion_violations(quad, _all_masks(quad.patch.graph.m))
        return bad == 0 and hits > 0, bad, f"{total} subsets, {hits} crossings"
    return fn


def _square_counterexample():
    # degree-4 duals break the crossing inclusion; exhibit a witness
    quad = corner_quad(build_patch("square", Lozenge(1)))
    for k, mask in enumerate(_all_masks(quad.patch.graph.m)):
        if quad_crossing(quad, mask, "horizontal", "primal") and \
                not quad_crossing(quad, mask, "horizontal", "dual"):
            return True, 0, f"witness mask #{k}"
    return False, 1, "no witness found"


def _duality_checks() -> list:
    out = []
    for label, quad in _quad_instances():
        out.append(_check("duality", f"crossing-duality({label})",
                          _duality_exhaustive(quad)))
    out.append(_check("duality", "crossing-duality(random-L2)", _duality_randomized))
    hexpatch = build_patch("honeycomb", Rectangle(0, 0))
    out.append(_check("duality", "degree3-inclusion(hexagon)",
                      _inclusion_exhaustive(corner_quad(hexpatch))))
    out.append(_check("duality", "degree3-inclusion(honeycomb-corners)",
                      _inclusion_exhaustive(corner_quad(build_patch("honeycomb", Lozenge(1))))))
    out.append(_check("duality", "square-inclusion-counterexample",
                      _square_counterexample))
    return out


# -- shape checks -------------------------------------------------------------


def _pinned_center_h2(model, bc, x) -> Fraction:
    dist = enumerate_heights(model, bc)
    return dist.expectation(lambda h: h[x] ** 2)


def _variance_monotone_paths():
    bad = 0
    rows = []
    for c in (Fraction(1), Fraction(2), Fraction(4)):
        vals = []
        for n in (3, 5, 7):
            g = _path_graph(n)
            bc = BoundaryCondition({0: (-1, 1), n - 1: (-1, 1)})
            vals.append(_pinned_center_h2(Model(g, c), bc, (n - 1) // 2))
        if not (vals[0] <= vals[1] <= vals[2]):
            bad += 1
        rows.append("<=".join(str(v) for v in vals))
    return bad == 0, bad, "; ".join(rows)


def _interior_near_origin(patch) -> int:
    inter = sorted(set(range(patch.n)) - set(patch.boundary))
    if not inter:
        raise ValueError("patch has no interior vertex")
    return min(inter, key=lambda v: (float(np.hypot(*patch.coords[v])), v))


def _nested_second_moment(kind: str, small_region, big_region):
    """E[h(x)^2] in two nested fair-sign boxes, at a shared interior vertex."""
    small = build_patch(kind, small_region)
    big = build_patch(kind, big_region)
    if not set(small.ikeys) <= set(big.ikeys):
        raise ValueError("domains are not nested")
    x = _interior_near_origin(small)
    xb = big.vertex_at(small.ikeys[x])
    if xb in set(big.boundary):
        raise ValueError("shared vertex is pinned in the larger domain")
    e_small = _pinned_center_h2(Model(small, Fraction(2)), pm1_bc(small), x)
    e_big = _pinned_center_h2(Model(big, Fraction(2)), pm1_bc(big), xb)
    ok = e_small <= e_big
    return ok, max(Fraction(0), e_small - e_big), \
        f"{float(e_small):.5f} <= {float(e_big):.5f}"


def _variance_monotone_square():
    return _nested_second_moment("square", Rectangle(1, 1), Rectangle(2, 1))


def _variance_monotone_hex():
    return _nested_second_moment("honeycomb", Lozenge(1), Rectangle(1, 0))


def _log_concave_pmfs(inst: CorpusInstance):
    dist = enumerate_heights(inst.model, inst.bc)
    bad = 0
    for v in range(inst.graph.n):
        pmf = marginal_pmf(dist, v)
        for k in list(pmf):
            mid = pmf[k] ** 2
            sides = pmf.get(k - 2, Fraction(0)) * pmf.get(k + 2, Fraction(0))
            if mid < sides:
                bad += 1
    return bad == 0, bad, ""


def _shape_checks() -> list:
    out = [
        _check("shape", "variance-monotone(paths)", _variance_monotone_paths),
        _check("shape", "variance-monotone(square)", _variance_monotone_square),
        _check("shape", "variance-monotone(hex)", _variance_monotone_hex),
    ]
    for inst in corpus():
        out.append(_check("shape", f"pmf-log-concave({inst.name})",
                          lambda inst=inst: _log_concave_pmfs(inst)))
    return out


_GROUPS = {
    "identity": _identity_checks,
    "inequality": _inequality_checks,
    "stationarity": _stationarity_checks,
    "duality": _duality_checks,
    "shape": _shape_checks,
}


def verify_suite(groups=None) -> VerifyReport:
    """Run the named exact checks; deterministic, no seed involved."""
    if groups is None:
        groups = list(_GROUPS)
    unknown = [g for g in groups if g not in _GROUPS]
    if unknown:
        raise ValueError(f"unknown check groups {unknown}")
    checks = []
    elapsed = {}
    for g in groups:
        t0 = time.perf_counter()
        checks.extend(_GROUPS[g]())
        elapsed[g] = time.perf_counter() - t0
    return VerifyReport(checks=checks, elapsed=elapsed)


# ---------------------------------------------------------------------------
# studies


def linear_fit(x, y) -> dict:
    """Ordinary least squares with slope standard error and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points to fit")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise ValueError("degenerate abscissa")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = ym - slope * xm
    resid = y - intercept - slope * x
    ss_res = float((resid ** 2).sum())
    s2 = ss_res / max(len(x) - 2, 1)
    sst = float(((y - ym) ** 2).sum())
    return {
        "slope": slope,
        "intercept": float(intercept),
        "slope_se": math.sqrt(s2 / sxx),
        "r2": 1.0 - ss_res / sst if sst > 0 else 1.0,
    }


@dataclass
class SizeEstimate:
    """One estimated number at one size, with its uncertainty."""

    label: str
    n: int
    estimate: float
    se: float
    nsamples: int
    censored: bool = False

    def as_dict(self) -> dict:
        d = {"label": self.label, "n": self.n, "nsamples": self.nsamples,
             "censored": self.censored}
        if self.censored:
            d["upper_bound"] = 3.0 / self.nsamples
        else:
            d["estimate"] = self.estimate
            d["se"] = self.se
        return d


@dataclass
class StudyResult:
    study: str
    params: dict
    estimates: list
    fits: dict
    verdicts: dict
    defaults_version: int = verdicts.VERSION
    wall_clock: float = 0.0       # informational only; never serialized

    def recompute_verdicts(self) -> dict:
        return compute_verdicts(self.study, self.params["kind"],
                                _c_value(self.params["c"]),
                                self.estimates, self.fits)

    def to_json(self) -> str:
        doc = {
            "study": self.study,
            "params": self.params,
            "estimates": [e.as_dict() for e in self.estimates],
            "fits": self.fits,
            "verdicts": self.verdicts,
            "defaults_version": self.defaults_version,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["study,kind,c,n,estimate,se,nsamples,seed"]
        kind = self.params["kind"]
        c = self.params["c"]
        seed = self.params["seed"]
        for e in sorted(self.estimates, key=lambda e: (e.label, e.n)):
            series = f"{self.study}/{e.label}"
            if e.censored:
                est, se = f"<3/{e.nsamples}", ""
            else:
                est, se = repr(e.estimate), repr(e.se)
            lines.append(f"{series},{kind},{c},{e.n},{est},{se},{e.nsamples},{seed}")
        return "\n".join(lines) + "\n"

    def verdict_lines(self) -> str:
        if not self.verdicts:
            return f"{self.study}: no verdicts (exploratory regime)\n"
        out = []
        for name in sorted(self.verdicts):
            s = "pass" if self.verdicts[name] else "FAIL"
            out.append(f"{self.study}/{name}: {s}")
        return "\n".join(out) + "\n"

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


def _c_value(c) -> float:
    return float(Fraction(str(c)))


def compute_verdicts(study: str, kind: str, c: float, estimates, fits) -> dict:
    """Map stored numbers to pass/fail claims; pure function of its inputs."""
    reg = verdicts.regime(kind, c)
    th = verdicts.THRESHOLDS
    out: dict = {}
    if study == "variance-scan":
        t = th["variance"]
        if reg == "deloc" and "slope" in fits:
            out["log_growth"] = bool(
                fits["slope"] > t["slope_z"] * fits["slope_se"]
                and fits["r2"] >= t["r2_min"])
        elif reg == "loc" and "rise" in fits:
            out["bounded"] = bool(fits["rise"] <= t["plateau_max"])
    elif study == "loop-scan":
        t = th["loop"]
        if kind in _DEGREE3_KINDS:
            out["sandwich_exact"] = bool(fits["violations"] <= t["max_violations"])
        if reg == "deloc":
            a_vals = [e.estimate for e in estimates if e.label == "a" and not e.censored]
            out["loops_frequent"] = bool(a_vals) and min(a_vals) >= t["a_min"]
    elif study == "tail-scan":
        t = th["tail"]
        zero = next((e for e in estimates
                     if e.label == "tail" and e.n == 0 and not e.censored), None)
        if zero is not None and zero.se > 0:
            out["half_at_zero"] = bool(
                abs(zero.estimate - 0.5) <= t["sanity_z"] * zero.se)
        if reg == "loc" and "slope" in fits:
            out["tail_decays"] = bool(fits["slope"] < -t["slope_z"] * fits["slope_se"])
    return out


def _base_params(study: str, kind: str, c, config: SamplerConfig, extra: dict) -> dict:
    params = {
        "kind": kind,
        "c": str(Fraction(str(c))),
        "seed": config.seed,
        "sweeps": config.sweeps,
        "burnin": config.burnin,
        "thin": config.thin,
        "cluster_period": config.cluster_period,
    }
    params.update(extra)
    return params


def _fan_out(tasks, threads: int) -> list:
    # each task owns its seed stream, so scheduling cannot change results
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda f: f(), tasks))
    return [f() for f in tasks]


def variance_scan(kind: str, c, sizes, config: SamplerConfig | None = None,
                  threads: int = 1) -> StudyResult:
    """Estimate the pinned-center second moment across a ladder of lozenges."""
    sizes = list(sizes)
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be strictly ascending")
    if _c_value(c) < 1:
        raise ValueError("weights below one are not in the model")
    config = config or SamplerConfig()
    t0 = time.perf_counter()

    def task(i, n):
        def go():
            patch = build_patch(kind, Lozenge(n))
            x0 = _interior_near_origin(patch)
            res = run(Model(patch, c), pm1_bc(patch), config,
                      {"h2": lambda h, B, om: float(h[x0]) ** 2}, stream=i)
            s = res.stats["h2"]
            return SizeEstimate("h2", n, s.mean, s.se, s.n)
        return go

    estimates = _fan_out([task(i, n) for i, n in enumerate(sizes)], threads)
    fits = {}
    if len(sizes) >= 2:
        fits = linear_fit([math.log(n) for n in sizes],
                          [e.estimate for e in estimates])
        lo, hi = estimates[0], estimates[-1]
        fits["rise"] = hi.estimate - lo.estimate
        fits["rise_se"] = math.hypot(lo.se, hi.se)
    params = _base_params("variance-scan", kind, c, config, {"sizes": sizes})
    out = StudyResult("variance-scan", params, estimates, fits,
                      compute_verdicts("variance-scan", kind, _c_value(c),
                                       estimates, fits))
    out.wall_clock = time.perf_counter() - t0
    return out


def loop_scan(kind: str, c, sizes, config: SamplerConfig | None = None,
              threads: int = 1, ratio: int = 3) -> StudyResult:
    """Circuit frequencies around L_n inside L_{ratio*n}, with the per-sample
    containment count (level loop present but cluster loop absent)."""
    sizes = list(sizes)
    config = config or SamplerConfig()
    run_config = dataclasses.replace(config, keep_series=True)
    for n in sizes:
        # coarse bound on vertices of the outer box, any supported kind
        if 6 * (2 * ratio * n + 1) ** 2 > _PATCH_VERTEX_BUDGET:
            raise MemoryError(f"annulus of size {n} exceeds the memory budget")
    t0 = time.perf_counter()

    def task(i, n):
        def go():
            region = Annulus(Lozenge(n), Lozenge(ratio * n))
            patch = build_patch(kind, region)
            ev_a = EventEvaluator(patch, EventSpec(
                "circuit", "primal", parse_edge_set("omega"), region))
            ev_b = EventEvaluator(patch, EventSpec(
                "circuit", "dual", parse_edge_set("E5"), region))
            res = run(Model(patch, c), pm1_bc(patch), run_config,
                      {"a": lambda h, B, om: float(ev_a(h, B, om)),
                       "b": lambda h, B, om: float(ev_b(h, B, om))},
                      stream=i)
            sa = res.series["a"]
            sb = res.series["b"]
            viol = int(np.sum((sb > 0.5) & (sa < 0.5)))
            ea = SizeEstimate("a", n, float(sa.mean()), batch_se(sa), len(sa),
                              censored=not sa.any())
            eb = SizeEstimate("b", n, float(sb.mean()), batch_se(sb), len(sb),
                              censored=not sb.any())
            return ea, eb, viol
        return go

    rows = _fan_out([task(i, n) for i, n in enumerate(sizes)], threads)
    estimates = []
    violations = 0
    for ea, eb, viol in rows:
        estimates += [ea, eb]
        violations += viol
    fits = {"violations": violations}
    params = _base_params("loop-scan", kind, c, config,
                          {"sizes": sizes, "ratio": ratio})
    out = StudyResult("loop-scan", params, estimates, fits,
                      compute_verdicts("loop-scan", kind, _c_value(c),
                                       estimates, fits))
    out.wall_clock = time.perf_counter() - t0
    return out


def tail_scan(kind: str, c, box: int, mmax: int,
              config: SamplerConfig | None = None, threads: int = 1) -> StudyResult:
    """Upper-tail frequencies P[h(center) >= 2m+1] for m = 0..mmax."""
    if mmax < 1:
        raise ValueError("need at least levels m=0 and m=1")
    config = config or SamplerConfig()
    run_config = dataclasses.replace(config, keep_series=True)
    t0 = time.perf_counter()
    patch = build_patch(kind, Lozenge(box))
    x0 = _interior_near_origin(patch)
    res = run(Model(patch, c), pm1_bc(patch), run_config,
              {"h": lambda h, B, om: float(h[x0])})
    hs = res.series["h"]
    estimates = []
    for m in range(mmax + 1):
        ind = (hs >= 2 * m + 1).astype(float)
        hit = ind.sum() > 0
        estimates.append(SizeEstimate(
            "tail", m, float(ind.mean()) if hit else 0.0,
            batch_se(ind) if hit else 0.0, len(ind), censored=not hit))
    fitted = [(e.n, e.estimate) for e in estimates
              if e.n >= 1 and not e.censored and e.estimate > 0]
    fits = {}
    if len(fitted) >= 2:
        fits = linear_fit([m for m, _ in fitted],
                          [math.log(p) for _, p in fitted])
        fits["decay_rate"] = -fits["slope"]
    fits["fitted_levels"] = len(fitted)
    params = _base_params("tail-scan", kind, c, config,
                          {"box": box, "mmax": mmax})
    out = StudyResult("tail-scan", params, estimates, fits,
                      compute_verdicts("tail-scan", kind, _c_value(c),
                                       estimates, fits))
    out.wall_clock = time.perf_counter() - t0
    return out
