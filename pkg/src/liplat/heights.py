"""Height fields, edge weights, and boundary conditions.

A height field assigns an odd integer to every vertex with |h(u) - h(v)| <= 2
across each edge. The measure weights a field by prod_e c_e over its flat
edges (c_e >= 1), so larger weights favour locally constant configurations.
Boundary conditions are finite odd-integer sets on a support Delta; a field
satisfies the condition when its value lies in the set at every support
vertex.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .lattice import FiniteGraph, LatticePatch, graph_distance


def _as_graph(domain) -> FiniteGraph:
    if isinstance(domain, LatticePatch):
        return domain.graph
    if isinstance(domain, FiniteGraph):
        return domain
    raise TypeError(f"expected a patch or graph, got {type(domain).__name__}")


# ---------------------------------------------------------------------------
# model


class Model:
    """A graph together with per-edge weights c_e >= 1.

    Weights are held in log-space for numeric work. When every input weight
    is rational (int, Fraction) the exact values are kept as well, which the
    enumeration oracle uses for exact distribution identities. Reflection
    arguments additionally require the weights to share the symmetry of the
    patch; scalar weights always do.
    """

    __slots__ = ("domain", "graph", "c", "log_c", "c_exact")

    def __init__(self, domain, c=1):
        self.domain = domain
        self.graph = _as_graph(domain)
        m = self.graph.m
        if np.isscalar(c) or isinstance(c, (Fraction, int, float)):
            seq = [c] * m
        else:
            seq = list(c)
            if len(seq) != m:
                raise ValueError(f"need {m} edge weights, got {len(seq)}")
        if all(isinstance(x, Rational) for x in seq):
            self.c_exact = [Fraction(x) for x in seq]
            if any(x < 1 for x in self.c_exact):
                raise ValueError("edge weights must satisfy c_e >= 1")
        else:
            self.c_exact = None
            if any(float(x) < 1.0 for x in seq):
                raise ValueError("edge weights must satisfy c_e >= 1")
        self.c = np.asarray([float(x) for x in seq], dtype=float)
        self.log_c = np.log(self.c)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.c == self.c[0])) if len(self.c) else True

    def flat_mask(self, h) -> np.ndarray:
        e = self.graph.edge_array()
        h = np.asarray(h)
        return h[e[:, 0]] == h[e[:, 1]]

    def __repr__(self):
        cs = f"{self.c[0]:g}" if self.is_uniform and len(self.c) else "per-edge"
        return f"Model({self.graph!r}, c={cs})"


def validate_height(domain, h) -> bool:
    """Oddness and the 2-Lipschitz bound on every edge."""
    g = _as_graph(domain.graph if isinstance(domain, Model) else domain)
    h = np.asarray(h)
    if h.shape != (g.n,):
        return False
    if not np.issubdtype(h.dtype, np.integer):
        if not np.all(h == np.floor(h)):
            return False
        h = h.astype(np.int64)
    if np.any(h % 2 == 0):
        return False
    e = g.edge_array()
    return bool(np.all(np.abs(h[e[:, 0]] - h[e[:, 1]]) <= 2))


def log_weight(model: Model, h) -> float:
    if not validate_height(model, h):
        raise ValueError("not a valid height field")
    return float(model.log_c[model.flat_mask(h)].sum())


def weight_exact(model: Model, h) -> Fraction:
    if model.c_exact is None:
        raise ValueError("model has non-rational weights")
    if not validate_height(model, h):
        raise ValueError("not a valid height field")
    w = Fraction(1)
    for eid in np.flatnonzero(model.flat_mask(h)):
        w *= model.c_exact[eid]
    return w


# ---------------------------------------------------------------------------
# boundary conditions


def odd_range(lo: int, hi: int) -> tuple:
    if lo % 2 == 0 or hi % 2 == 0 or lo > hi:
        raise ValueError(f"bad odd range [{lo}, {hi}]")
    return tuple(range(lo, hi + 1, 2))


def _is_contiguous(vals: tuple) -> bool:
    return len(vals) == (vals[-1] - vals[0]) // 2 + 1


def _abs_vertex_form(vals: tuple):
    """Classify one value set for the absolute-value order.

    Returns ('plus', a, b) for an interval [a, b] with -1 <= a <= b and
    a + b >= 2, ('pm', a, b) for a symmetric set +-[a, b] with 1 <= a <= b,
    or None. The two forms never overlap.
    """
    if _is_contiguous(vals) and vals[0] >= -1 and vals[0] + vals[-1] >= 2:
        return ("plus", vals[0], vals[-1])
    if vals[0] == -vals[-1] and vals[0] < 0:
        pos = [v for v in vals if v > 0]
        if pos and set(vals) == {s * v for v in pos for s in (1, -1)}:
            pt = tuple(pos)
            if _is_contiguous(pt) and pt[0] >= 1:
                return ("pm", pt[0], pt[-1])
    return None


@dataclass(frozen=True)
class BoundaryCondition:
    """Vertex -> nonempty sorted tuple of odd integers on a support set."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.values:
            raise ValueError("boundary condition needs a nonempty support")
        norm = {}
        for v, vals in self.values.items():
            t = tuple(sorted(set(int(x) for x in (vals if hasattr(vals, "__iter__") else [vals]))))
            if not t:
                raise ValueError(f"empty value set at vertex {v}")
            if any(x % 2 == 0 for x in t):
                raise ValueError(f"even boundary value at vertex {v}")
            norm[int(v)] = t
        object.__setattr__(self, "values", norm)

    @property
    def support(self) -> tuple:
        return tuple(sorted(self.values))

    def __getitem__(self, v: int) -> tuple:
        return self.values[v]

    def lo(self, v: int) -> int:
        return self.values[v][0]

    def hi(self, v: int) -> int:
        return self.values[v][-1]

    @property
    def is_single(self) -> bool:
        return all(len(t) == 1 for t in self.values.values())

    @property
    def is_interval(self) -> bool:
        return all(_is_contiguous(t) for t in self.values.values())

    def abs_params(self):
        """(plus-set S, vertex -> (a, b)) when every vertex set fits the
        absolute-value classification, else None."""
        S = set()
        params = {}
        for v, vals in self.values.items():
            form = _abs_vertex_form(vals)
            if form is None:
                return None
            tag, a, b = form
            if tag == "plus":
                S.add(v)
            params[v] = (a, b)
        return frozenset(S), params

    @property
    def kind(self) -> str:
        if self.is_single:
            return "single"
        if self.is_interval:
            return "interval"
        if self.abs_params() is not None:
            return "absolute"
        return "general"

    def restricted(self, vertices) -> "BoundaryCondition":
        sub = {v: self.values[v] for v in vertices if v in self.values}
        return BoundaryCondition(sub)

    def negated(self) -> "BoundaryCondition":
        return BoundaryCondition({v: tuple(-x for x in t) for v, t in self.values.items()})

    def dump(self) -> str:
        lines = []
        for v in self.support:
            lines.append(f"BC {v} " + ",".join(str(x) for x in self.values[v]))
        return "\n".join(lines) + "\n"


def parse_bc(text: str) -> BoundaryCondition:
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        tag, v, vals = line.split(" ", 2)
        if tag != "BC":
            raise ValueError(f"bad boundary line {line!r}")
        values[int(v)] = tuple(int(x) for x in vals.split(","))
    return BoundaryCondition(values)


def dump_height(h) -> str:
    return "".join(f"H {v} {int(x)}\n" for v, x in enumerate(np.asarray(h)))


def parse_height(text: str) -> np.ndarray:
    pairs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        tag, v, x = line.split(" ")
        if tag != "H":
            raise ValueError(f"bad height line {line!r}")
        pairs.append((int(v), int(x)))
    pairs.sort()
    if [v for v, _ in pairs] != list(range(len(pairs))):
        raise ValueError("height lines must cover vertices 0..n-1")
    return np.asarray([x for _, x in pairs], dtype=np.int64)


def const_bc(patch, value: int, support=None) -> BoundaryCondition:
    sup = patch.boundary if support is None else support
    return BoundaryCondition({v: (value,) for v in sup})


def pm1_bc(patch, support=None) -> BoundaryCondition:
    sup = patch.boundary if support is None else support
    return BoundaryCondition({v: (-1, 1) for v in sup})


def interval_bc(patch, lo: int, hi: int, support=None) -> BoundaryCondition:
    sup = patch.boundary if support is None else support
    return BoundaryCondition({v: odd_range(lo, hi) for v in sup})


def satisfies_bc(h, bc: BoundaryCondition) -> bool:
    h = np.asarray(h)
    return all(int(h[v]) in bc.values[v] for v in bc.support)


# ---------------------------------------------------------------------------
# admissibility and extremal extensions
#
# A single-valued condition extends to a height field iff
# |xi(v) - xi(w)| <= 2 d(v, w) for all pairs of support vertices. Set-valued
# conditions are admissible iff some selection is; the admissible selections
# are closed under pointwise min and max, so the maximal one is found by
# monotone tightening from the pointwise maxima.


def _support_distances(g: FiniteGraph, support):
    return {v: graph_distance(g, v) for v in support}


def maximal_selection(domain, bc: BoundaryCondition):
    """Pointwise-largest admissible selection, or None when inadmissible."""
    g = _as_graph(domain)
    sup = bc.support
    dist = _support_distances(g, sup)
    if any(dist[sup[0]][v] < 0 for v in sup):
        raise ValueError("support spans disconnected components")
    b = {v: bc.hi(v) for v in sup}
    changed = True
    while changed:
        changed = False
        for v in sup:
            cap = min(b[w] + 2 * int(dist[w][v]) for w in sup)
            if b[v] <= cap:
                continue
            cand = [t for t in bc.values[v] if t <= cap]
            if not cand:
                return None
            b[v] = cand[-1]
            changed = True
    return b


def minimal_selection(domain, bc: BoundaryCondition):
    neg = maximal_selection(domain, bc.negated())
    if neg is None:
        return None
    return {v: -x for v, x in neg.items()}


def is_admissible(domain, bc: BoundaryCondition) -> bool:
    """Whether some height field on the domain satisfies the condition."""
    return maximal_selection(domain, bc) is not None


def _potential_sweep(g: FiniteGraph, pot: dict) -> np.ndarray:
    """min_v (pot[v] + 2 d(v, x)) over all x, by multi-source relaxation."""
    out = np.full(g.n, np.iinfo(np.int64).max, dtype=np.int64)
    heap = []
    for v, p in pot.items():
        if p < out[v]:
            out[v] = p
            heapq.heappush(heap, (p, v))
    while heap:
        d, v = heapq.heappop(heap)
        if d > out[v]:
            continue
        for w, _ in g.adj[v]:
            nd = d + 2
            if nd < out[w]:
                out[w] = nd
                heapq.heappush(heap, (nd, w))
    return out


def extremal_extensions(domain, bc: BoundaryCondition):
    """(minimal, maximal) height fields among all extensions of the condition.

    Set-valued conditions reduce to their minimal and maximal admissible
    selections first.
    """
    g = _as_graph(domain)
    lo_sel = minimal_selection(g, bc)
    hi_sel = maximal_selection(g, bc)
    if lo_sel is None or hi_sel is None:
        raise ValueError("inadmissible boundary condition")
    h_max = _potential_sweep(g, hi_sel)
    h_min = -_potential_sweep(g, {v: -x for v, x in lo_sel.items()})
    if np.any(h_max == np.iinfo(np.int64).max):
        raise ValueError("domain not covered by the support's component")
    return h_min, h_max


# ---------------------------------------------------------------------------
# partial orders


def interval_order_leq(bc: BoundaryCondition, other: BoundaryCondition) -> bool:
    """Pointwise a <= a' and b <= b' for interval-valued conditions."""
    if bc.support != other.support:
        raise ValueError("conditions live on different supports")
    if not (bc.is_interval and other.is_interval):
        raise ValueError("interval order needs interval-valued conditions")
    return all(
        bc.lo(v) <= other.lo(v) and bc.hi(v) <= other.hi(v) for v in bc.support
    )


def abs_order_leq(bc: BoundaryCondition, other: BoundaryCondition) -> bool:
    """Partial order on absolute-value conditions.

    Requires S contained in S'; inside S and outside S' both parameter pairs
    compare coordinatewise, while on S' minus S the positive radius of the
    smaller condition must not exceed |a'|.
    """
    if bc.support != other.support:
        raise ValueError("conditions live on different supports")
    p1, p2 = bc.abs_params(), other.abs_params()
    if p1 is None or p2 is None:
        raise ValueError("abs order needs absolute-value conditions")
    S1, par1 = p1
    S2, par2 = p2
    if not S1 <= S2:
        return False
    for v in bc.support:
        a, b = par1[v]
        a2, b2 = par2[v]
        if v in S1 or v not in S2:
            if not (a <= a2 and b <= b2):
                return False
        else:
            if not (b <= abs(a2)):
                return False
    return True


# ---------------------------------------------------------------------------
# the 2h+1 correspondence with 1-Lipschitz functions


def height_from_lipschitz(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.int64)
    return 2 * f + 1


def lipschitz_from_height(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.int64)
    if np.any(h % 2 == 0):
        raise ValueError("height values must be odd")
    return (h - 1) // 2


def lipschitz_bijection(x, direction: str) -> np.ndarray:
    """direction 'to_height' doubles-and-shifts, 'to_lipschitz' inverts."""
    if direction == "to_height":
        return height_from_lipschitz(x)
    if direction == "to_lipschitz":
        return lipschitz_from_height(x)
    raise ValueError(f"unknown direction {direction!r}")
