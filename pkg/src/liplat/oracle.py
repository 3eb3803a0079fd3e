"""Exact ground truth by exhaustive enumeration.

Every distributional statement in the package can be checked on a small
instance against these enumerators: the height measure itself, the joint
height-and-coin measure with its derived edge configuration, and the
two-weighted cluster model used for conditional edge laws. Rational edge
weights propagate as exact fractions, so distribution identities can be
asserted at total-variation distance exactly zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import coupling
from .heights import BoundaryCondition, Model, extremal_extensions, _as_graph
from .lattice import FiniteGraph, graph_distance

DEFAULT_CAP = 10_000_000
_CELL_BUDGET = 100_000_000   # stored configurations x vertices, ~1 GB


class CapacityError(RuntimeError):
    """State space exceeds the configured enumeration cap."""


@dataclass
class ExactDistribution:
    """Finite support distribution with exact or float probabilities.

    space is 'height' (configs are value tuples), 'joint' (configs are
    (h, B, omega) tuples), or 'edges' (configs are 0/1 tuples).
    """

    space: str
    items: list          # (config, probability), configs distinct
    Z: object            # normalizing constant before division
    exact: bool

    def __post_init__(self):
        tot = sum(p for _, p in self.items)
        if self.exact:
            assert tot == 1
        else:
            assert abs(tot - 1.0) < 1e-12
        assert len({c for c, _ in self.items}) == len(self.items)

    def __len__(self):
        return len(self.items)

    def probability(self, pred) -> float | Fraction:
        zero = Fraction(0) if self.exact else 0.0
        return sum((p for c, p in self.items if pred(c)), zero)

    def expectation(self, fn):
        zero = Fraction(0) if self.exact else 0.0
        return sum((p * fn(c) for c, p in self.items), zero)

    def heights(self, config):
        return config[0] if self.space == "joint" else config

    def map(self, fn, space: str | None = None) -> "ExactDistribution":
        """Pushforward along fn; collapsed configurations add up."""
        acc: dict = {}
        for c, p in self.items:
            k = fn(c)
            acc[k] = acc.get(k, Fraction(0) if self.exact else 0.0) + p
        return ExactDistribution(space or self.space, sorted(acc.items()), self.Z, self.exact)

    def condition(self, pred) -> "ExactDistribution":
        kept = [(c, p) for c, p in self.items if pred(c)]
        tot = sum(p for _, p in kept)
        if tot == 0:
            raise ValueError("conditioning event has probability zero")
        return ExactDistribution(self.space, [(c, p / tot) for c, p in kept], tot, self.exact)

    def tv_distance(self, other: "ExactDistribution"):
        a = dict(self.items)
        b = dict(other.items)
        zero = Fraction(0) if (self.exact and other.exact) else 0.0
        tot = zero
        for k in set(a) | set(b):
            tot += abs(a.get(k, zero) - b.get(k, zero))
        return tot / 2

    def dump(self) -> str:
        lines = []
        for c, p in sorted(self.items):
            if self.space == "joint":
                h, B, w = c
                key = " ".join(map(str, h)) + " | " + "".join(map(str, B)) \
                    + " | " + "".join(map(str, w))
            elif self.space == "edges":
                key = "".join(map(str, c))
            else:
                key = " ".join(map(str, c))
            lines.append(f"{key} : {p}")
        return "\n".join(lines) + "\n"


def _enumeration_order(g: FiniteGraph, support) -> list:
    """Support vertices first, then outward by distance (stable by id)."""
    d = graph_distance(g, list(support))
    if np.any(d < 0):
        raise ValueError("graph is disconnected from the support")
    return sorted(range(g.n), key=lambda v: (int(d[v]), v))


def enumerate_heights(model: Model, bc: BoundaryCondition,
                      value_window=None, cap: int = DEFAULT_CAP) -> ExactDistribution:
    """All height fields satisfying the condition, weighted by flat edges.

    Depth-first over vertices ordered outward from the support, pruning with
    the extremal-extension envelope (every admissible field lies pointwise
    between the two extremal extensions).
    """
    g = model.graph
    h_min, h_max = extremal_extensions(g, bc)
    if value_window is not None:
        lo, hi = value_window
        h_min = np.maximum(h_min, lo)
        h_max = np.minimum(h_max, hi)
    order = _enumeration_order(g, bc.support)
    rank = {v: t for t, v in enumerate(order)}
    back = [
        [(rank[w], model.c_exact[eid] if model.c_exact is not None else model.c[eid])
         for w, eid in g.adj[v] if rank[w] < rank[v]]
        for v in order
    ]
    allowed = []
    for v in order:
        vals = [x for x in range(int(h_min[v]), int(h_max[v]) + 1, 2)]
        if v in bc.values:
            vals = [x for x in vals if x in bc.values[v]]
        if not vals:
            raise ValueError("inadmissible boundary condition")
        allowed.append(vals)

    exact = model.c_exact is not None
    one = Fraction(1) if exact else 1.0
    n = g.n
    assign = [0] * n     # indexed by position in `order`
    weights: dict = {}
    count = 0

    # iterative depth-first walk over positions, carrying partial weights
    pend: list = [one] + [None] * n
    idx = [0] * n
    cand: list = [None] * n
    t = 0
    cand[0] = _feasible(allowed[0], back[0], assign, one, exact)
    while t >= 0:
        if idx[t] >= len(cand[t]):
            idx[t] = 0
            t -= 1
            if t >= 0:
                idx[t] += 1
            continue
        val, w = cand[t][idx[t]]
        assign[t] = val
        wt = pend[t] * w
        if t == n - 1:
            count += 1
            # the second clause bounds memory, not just time: every stored
            # configuration is an n-tuple
            if count > cap or count * n > _CELL_BUDGET:
                raise CapacityError(f"more than {cap} height configurations")
            h = tuple(assign[rank[v]] for v in range(n))
            weights[h] = weights.get(h, one * 0) + wt
            idx[t] += 1
            continue
        pend[t + 1] = wt
        t += 1
        cand[t] = _feasible(allowed[t], back[t], assign, one, exact)
        idx[t] = 0
    if not weights:
        raise ValueError("no admissible configuration")
    Z = sum(weights.values())
    items = sorted((h, w / Z) for h, w in weights.items())
    return ExactDistribution("height", items, Z, exact)


def _feasible(vals, back_edges, assign, one, exact):
    out = []
    for x in vals:
        ok = True
        w = one
        for tr, ce in back_edges:
            d = x - assign[tr]
            if d > 2 or d < -2:
                ok = False
                break
            if d == 0:
                w = w * ce
        if ok:
            out.append((x, w))
    return out


def enumerate_homomorphisms(g, pins: dict, cap: int = DEFAULT_CAP) -> ExactDistribution:
    """Uniform law over integer labelings that change by exactly one per edge.

    pins maps vertices to their allowed values; every vertex must be reachable
    from a pinned one, otherwise the space is infinite.
    """
    g = _as_graph(g)
    order = _enumeration_order(g, list(pins))
    rank = {v: t for t, v in enumerate(order)}
    back = [[rank[w] for w, _ in g.adj[v] if rank[w] < rank[v]] for v in order]
    out: list = []
    assign = [0] * g.n

    def rec(t):
        if t == g.n:
            if len(out) >= cap or (len(out) + 1) * g.n > _CELL_BUDGET:
                raise CapacityError(f"more than {cap} labelings")
            out.append(tuple(assign[rank[v]] for v in range(g.n)))
            return
        cands = None
        for b in back[t]:
            step = {assign[b] - 1, assign[b] + 1}
            cands = step if cands is None else cands & step
        v = order[t]
        if v in pins:
            pv = set(pins[v])
            cands = pv if cands is None else cands & pv
        for x in sorted(cands):
            assign[t] = x
            rec(t + 1)

    rec(0)
    if not out:
        raise ValueError("no admissible labeling")
    p = Fraction(1, len(out))
    return ExactDistribution("height", [(f, p) for f in sorted(out)], len(out), True)


def bernoulli_weights(model: Model):
    """Per-edge (p, 1-p) for the coin layer, exact when the model is."""
    if model.c_exact is not None:
        return [(1 - 1 / ce, 1 / ce) for ce in model.c_exact]
    return [(1.0 - 1.0 / ce, 1.0 / ce) for ce in model.c]


def enumerate_joint(model: Model, bc: BoundaryCondition,
                    cap: int = DEFAULT_CAP) -> ExactDistribution:
    """Joint law of (h, B) with the derived edge configuration attached.

    B is an independent product of per-edge Bernoulli(1 - 1/c_e) coins; the
    third component of each configuration is the derived percolation, a
    deterministic function of (h, B).
    """
    hdist = enumerate_heights(model, bc, cap=cap)
    m = model.graph.m
    if m > 40 or len(hdist) * (2 ** m) > cap:
        raise CapacityError("joint space exceeds the cap")
    pw = bernoulli_weights(model)
    edges = model.graph.edge_array()
    bconfigs = []
    for bits in itertools.product((0, 1), repeat=m):
        w = Fraction(1) if hdist.exact else 1.0
        dead = False
        for e, b in enumerate(bits):
            pe = pw[e][0] if b else pw[e][1]
            if pe == 0:
                dead = True
                break
            w = w * pe
        if not dead:
            bconfigs.append((bits, w))
    items = []
    for h, ph in hdist.items:
        ha = np.asarray(h)
        for bits, pb in bconfigs:
            om = coupling.omega_from(ha, np.asarray(bits), edges)
            items.append(((h, bits, tuple(int(x) for x in om)), ph * pb))
    return ExactDistribution("joint", sorted(items), hdist.Z, hdist.exact)


def enumerate_fk(g: FiniteGraph, p, forced_open=(), wired=(),
                 cap: int = DEFAULT_CAP) -> ExactDistribution:
    """Edge configurations weighted by 2^{#clusters} prod p^open (1-p)^closed.

    forced_open lists edge ids that must be open; wired vertices are
    identified before counting clusters.
    """
    m = g.m
    if 2 ** m > cap:
        raise CapacityError("edge space exceeds the cap")
    exact = isinstance(p, (Fraction, int)) or (
        hasattr(p, "__iter__") and all(isinstance(x, (Fraction, int)) for x in p)
    )
    if not hasattr(p, "__iter__"):
        p = [p] * m
    p = [Fraction(x) if exact else float(x) for x in p]
    forced = set(forced_open)
    wired = list(wired)
    weights = {}
    for bits in itertools.product((0, 1), repeat=m):
        if any(bits[e] == 0 for e in forced):
            continue
        w = Fraction(1) if exact else 1.0
        dead = False
        for e, b in enumerate(bits):
            pe = p[e] if b else 1 - p[e]
            if pe == 0:
                dead = True
                break
            w = w * pe
        if dead:
            continue
        uf = coupling.UnionFind(g.n)
        for root in wired[1:]:
            uf.union(wired[0], root)
        for e, b in enumerate(bits):
            if b:
                uf.union(*g.edges[e])
        w = w * 2 ** uf.count()
        weights[bits] = w
    Z = sum(weights.values())
    if Z == 0:
        raise ValueError("empty cluster-model support")
    items = sorted((bits, w / Z) for bits, w in weights.items())
    return ExactDistribution("edges", items, Z, exact)


# ---------------------------------------------------------------------------
# statistics and comparisons


def marginal_pmf(dist: ExactDistribution, vertex: int) -> dict:
    pmf: dict = {}
    zero = Fraction(0) if dist.exact else 0.0
    for c, p in dist.items:
        h = dist.heights(c)
        pmf[h[vertex]] = pmf.get(h[vertex], zero) + p
    return dict(sorted(pmf.items()))


def marginal_stats(dist: ExactDistribution, vertex: int):
    """(pmf, mean, variance) of the height at one vertex."""
    pmf = marginal_pmf(dist, vertex)
    mean = sum(v * p for v, p in pmf.items())
    var = sum((v - mean) ** 2 * p for v, p in pmf.items())
    return pmf, mean, var


def threshold_event_family(vertices, levels) -> list:
    """Labeled increasing events: single thresholds plus depth-2 meets/joins."""
    singles = []
    for x in vertices:
        for k in levels:
            singles.append((f"h({x})>={k}", _ge_event(x, k)))
    events = list(singles)
    for (la, fa), (lb, fb) in itertools.combinations(singles, 2):
        events.append((f"({la})&({lb})", _and_event(fa, fb)))
        events.append((f"({la})|({lb})", _or_event(fa, fb)))
    return events


def _ge_event(x, k):
    return lambda h: h[x] >= k


def _and_event(fa, fb):
    return lambda h: fa(h) and fb(h)


def _or_event(fa, fb):
    return lambda h: fa(h) or fb(h)


@dataclass
class DominanceReport:
    rows: list          # (label, p_low, p_high, ok)
    cdf_ok: bool
    violations: list

    @property
    def ok(self) -> bool:
        return self.cdf_ok and not self.violations


def check_dominance(dist_low: ExactDistribution, dist_high: ExactDistribution,
                    events=(), transform=None) -> DominanceReport:
    """Verify P_low[E] <= P_high[E] on an increasing-event family.

    transform maps a configuration to the comparable vector (default: the
    heights themselves; pass abs for the |h| orders). Per-vertex upper-CDF
    dominance is always included.
    """
    if transform is None:
        transform = lambda c: c
    low = dist_low.map(lambda c: transform(dist_low.heights(c)), space="height")
    high = dist_high.map(lambda c: transform(dist_high.heights(c)), space="height")
    n = len(low.items[0][0])
    if n != len(high.items[0][0]):
        raise ValueError("distributions live on different vertex sets")
    rows = []
    violations = []
    for label, ev in events:
        pl = low.probability(ev)
        ph = high.probability(ev)
        ok = pl <= ph + (0 if low.exact and high.exact else 1e-12)
        rows.append((label, pl, ph, ok))
        if not ok:
            violations.append((label, pl, ph))
    cdf_ok = True
    values = sorted({v for c, _ in low.items + high.items for v in c})
    for x in range(n):
        for k in values:
            pl = low.probability(lambda h: h[x] >= k)
            ph = high.probability(lambda h: h[x] >= k)
            if pl > ph + (0 if low.exact and high.exact else 1e-12):
                cdf_ok = False
                violations.append((f"cdf h({x})>={k}", pl, ph))
    return DominanceReport(rows=rows, cdf_ok=cdf_ok, violations=violations)
