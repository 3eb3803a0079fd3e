"""The height / percolation / coin-flip triple and cluster sign moves.

Alongside a height field h we carry an independent Bernoulli(1 - 1/c_e) edge
layer B and the derived percolation: open wherever some endpoint has level
3 or more, equal to the coin on flat level-1 edges, closed across sign
changes. The sign of h is constant on each open cluster, and conditionally
on |h| the free clusters carry independent fair signs; resampling those
signs is the cluster move used by the samplers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import FiniteGraph, LatticePatch


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    __slots__ = ("parent", "rank", "_count")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self._count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self._count -= 1
        return True

    def count(self) -> int:
        return self._count


def _graph_of(domain) -> FiniteGraph:
    if isinstance(domain, LatticePatch):
        return domain.graph
    return domain


def bernoulli_p(model) -> np.ndarray:
    """Per-edge open probability p_e = 1 - 1/c_e."""
    return 1.0 - 1.0 / model.c


def sample_bernoulli(model, rng: np.random.Generator) -> np.ndarray:
    p = bernoulli_p(model)
    return (rng.random(len(p)) < p).astype(np.uint8)


def fixed_sign_edges(h, edges) -> np.ndarray:
    """Mask of edges whose endpoint levels reach 3, forcing an open edge."""
    h = np.asarray(h)
    a = np.abs(h[edges[:, 0]])
    b = np.abs(h[edges[:, 1]])
    return np.maximum(a, b) >= 3


def omega_from(h, B, edges) -> np.ndarray:
    """Derived percolation: 1 on level-3 edges, the coin on flat level-1
    edges, 0 across a sign change."""
    h = np.asarray(h)
    B = np.asarray(B)
    hu = h[edges[:, 0]]
    hv = h[edges[:, 1]]
    out = np.zeros(len(edges), dtype=np.uint8)
    fix = np.maximum(np.abs(hu), np.abs(hv)) >= 3
    out[fix] = 1
    flat1 = (hu == hv) & (np.abs(hu) == 1)
    out[flat1] = B[flat1]
    return out


def nu_from(h, B, edges, level: int = 3) -> np.ndarray:
    """Percolation with false zeroes around the shifted field 2*level - h.

    Closed where the shifted absolute levels are {5, 7}, the coin where they
    are equal in {5, 7}, open otherwise; closed edges therefore carry no
    information about the sign of the shifted field.
    """
    if level % 2 == 0:
        raise ValueError("level must be odd")
    h = np.asarray(h)
    B = np.asarray(B)
    t = np.abs(2 * level - h)
    tu = t[edges[:, 0]]
    tv = t[edges[:, 1]]
    out = np.ones(len(edges), dtype=np.uint8)
    in57_u = (tu == 5) | (tu == 7)
    in57_v = (tv == 5) | (tv == 7)
    both = in57_u & in57_v
    out[both & (tu != tv)] = 0
    eq = both & (tu == tv)
    out[eq] = B[eq]
    return out


@dataclass
class ClusterPartition:
    """Connected components of the open subgraph."""

    labels: np.ndarray          # vertex -> cluster id, 0..k-1
    k: int
    forced_sign: np.ndarray | None = None   # per cluster: -1, 0 (free), +1
    touches_boundary: np.ndarray | None = None

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cid)


def clusters(domain, open_edges) -> ClusterPartition:
    g = _graph_of(domain)
    open_edges = np.asarray(open_edges, dtype=bool)
    e = g.edge_array()[open_edges]
    if len(e) == 0:
        return ClusterPartition(np.arange(g.n, dtype=np.int64), g.n)
    data = np.ones(len(e), dtype=np.int8)
    adj = coo_matrix((data, (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    k, labels = connected_components(adj, directed=False)
    return ClusterPartition(labels.astype(np.int64), int(k))


def quotient_graph(g: FiniteGraph, contracted):
    """Contract an edge set; keeps multi-edges and loops.

    `contracted` is an edge-id iterable or boolean mask. Returns the quotient
    graph and the vertex -> quotient-vertex map.
    """
    contracted = np.asarray(list(contracted) if not isinstance(contracted, np.ndarray) else contracted)
    if contracted.dtype == bool:
        mask = contracted.copy()
    else:
        mask = np.zeros(g.m, dtype=bool)
        if contracted.size:
            mask[contracted] = True
    uf = UnionFind(g.n)
    for eid in np.flatnonzero(mask):
        uf.union(*g.edges[eid])
    remap = {}
    vmap = np.empty(g.n, dtype=np.int64)
    for v in range(g.n):
        r = uf.find(v)
        if r not in remap:
            remap[r] = len(remap)
        vmap[v] = remap[r]
    edges = [(int(vmap[u]), int(vmap[v])) for eid, (u, v) in enumerate(g.edges) if not mask[eid]]
    return FiniteGraph(len(remap), edges), vmap


def check_omega_consistent(h, omega, edges) -> bool:
    """Open on every level-3 edge and closed across every sign change."""
    h = np.asarray(h)
    omega = np.asarray(omega)
    hu, hv = h[edges[:, 0]], h[edges[:, 1]]
    if np.any((np.maximum(np.abs(hu), np.abs(hv)) >= 3) & (omega == 0)):
        return False
    if np.any((hu * hv < 0) & (omega == 1)):
        return False
    return True


def _forced_cluster_signs(part: ClusterPartition, habs, bc) -> np.ndarray:
    """Per-cluster sign forced by the condition, 0 where free.

    A support vertex forces its cluster when every allowed value at its
    current level shares one sign; opposite forcings in one cluster raise.
    """
    forced = np.zeros(part.k, dtype=np.int8)
    if bc is None:
        return forced
    for v in bc.support:
        lvl = int(habs[v])
        vals = [x for x in bc.values[v] if abs(x) == lvl]
        if not vals:
            raise ValueError(f"level {lvl} at vertex {v} is outside the condition")
        signs = {1 if x > 0 else -1 for x in vals}
        if len(signs) != 1:
            continue
        s = signs.pop()
        cid = part.labels[v]
        if forced[cid] == -s:
            raise ValueError(f"conflicting forced signs in cluster {cid}")
        forced[cid] = s
    return forced


def resample_signs(domain, h, omega, bc, rng: np.random.Generator) -> np.ndarray:
    """Redraw the per-cluster signs of h given its open clusters.

    Clusters with a sign forced by the condition keep it; the rest get
    independent fair signs. Requires omega consistent with h.
    """
    g = _graph_of(domain)
    edges = g.edge_array()
    h = np.asarray(h)
    if not check_omega_consistent(h, omega, edges):
        raise ValueError("omega is inconsistent with the height field")
    habs = np.abs(h)
    part = clusters(g, np.asarray(omega, dtype=bool))
    signs = _forced_cluster_signs(part, habs, bc)
    free = signs == 0
    coins = rng.integers(0, 2, size=int(free.sum()), dtype=np.int8) * 2 - 1
    signs = signs.astype(np.int64)
    signs[free] = coins
    return signs[part.labels] * habs


def resample_signs_exact(domain, h, omega, bc):
    """All sign redraws with their probabilities (for exact kernel checks)."""
    g = _graph_of(domain)
    edges = g.edge_array()
    h = np.asarray(h)
    if not check_omega_consistent(h, omega, edges):
        raise ValueError("omega is inconsistent with the height field")
    habs = np.abs(h)
    part = clusters(g, np.asarray(omega, dtype=bool))
    forced = _forced_cluster_signs(part, habs, bc)
    free_ids = np.flatnonzero(forced == 0)
    from fractions import Fraction
    from itertools import product

    out = []
    p = Fraction(1, 2 ** len(free_ids))
    for combo in product((-1, 1), repeat=len(free_ids)):
        signs = forced.astype(np.int64)
        signs[free_ids] = combo
        out.append((tuple((signs[part.labels] * habs).tolist()), p))
    return out


def dump_edge_config(bits) -> str:
    return "".join("1" if int(b) else "0" for b in np.asarray(bits).tolist())


def parse_edge_config(s: str) -> np.ndarray:
    if not set(s) <= {"0", "1"}:
        raise ValueError("edge config must be a bitstring")
    return np.asarray([int(ch) for ch in s], dtype=np.uint8)
