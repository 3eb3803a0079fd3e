"""Finite patches of planar bi-periodic lattices.

Patches are built from per-kind face templates in exact integer coordinates,
so vertex identity, ordering, and reflection maps never touch floats. Every
simply-connected patch carries a one-face-thick halo: the ring of lattice
faces straddling its boundary. The halo provides the boundary vertex set, the
canonical bounding dual loop, and the face data needed to mark quads.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SQRT3 = math.sqrt(3.0)

KINDS = (
    "square",
    "triangular",
    "honeycomb",
    "kagome",
    "rhombille",
    "square-octagon",
)

_FACE_KINDS = {"honeycomb", "kagome", "rhombille", "square-octagon"}


class FiniteGraph:
    """Undirected multigraph on vertices 0..n-1 with stable edge ids."""

    __slots__ = ("n", "edges", "adj", "_edge_arr")

    def __init__(self, n: int, edges):
        self.n = int(n)
        self.edges = [(int(u), int(v)) if u <= v else (int(v), int(u)) for u, v in edges]
        self.adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for eid, (u, v) in enumerate(self.edges):
            self.adj[u].append((v, eid))
            if v != u:
                self.adj[v].append((u, eid))
        self._edge_arr = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int):
        return [w for w, _ in self.adj[v]]

    def edge_ids(self, u: int, v: int) -> list[int]:
        a, b = (u, v) if u <= v else (v, u)
        return [eid for eid, e in enumerate(self.edges) if e == (a, b)]

    def edge_array(self) -> np.ndarray:
        if self._edge_arr is None or len(self._edge_arr) != self.m:
            self._edge_arr = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        return self._edge_arr

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w, _ in self.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    def __repr__(self):
        return f"FiniteGraph(n={self.n}, m={self.m})"


def graph_distance(graph: FiniteGraph, sources) -> np.ndarray:
    """Hop distances from a vertex or set of vertices; unreachable = -1."""
    if isinstance(sources, (int, np.integer)):
        sources = [int(sources)]
    dist = np.full(graph.n, -1, dtype=np.int64)
    q = deque()
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            q.append(s)
    while q:
        v = q.popleft()
        for w, _ in graph.adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def bipartition(graph: FiniteGraph):
    """2-coloring as an int8 array, or None if an odd cycle exists."""
    color = np.full(graph.n, -1, dtype=np.int8)
    for s in range(graph.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for w, _ in graph.adj[v]:
                if color[w] < 0:
                    color[w] = 1 - color[v]
                    q.append(w)
                elif color[w] == color[v]:
                    return None
    return color


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Lozenge:
    """Rhombus of half-width n in the two period directions."""

    n: int
    center: tuple[int, int] = (0, 0)

    def token(self) -> str:
        if self.center == (0, 0):
            return f"Lozenge({self.n})"
        return f"Lozenge({self.n};{self.center[0]},{self.center[1]})"


@dataclass(frozen=True)
class Rectangle:
    n: int
    m: int
    center: tuple[int, int] = (0, 0)

    def token(self) -> str:
        if self.center == (0, 0):
            return f"Rectangle({self.n},{self.m})"
        return f"Rectangle({self.n},{self.m};{self.center[0]},{self.center[1]})"


@dataclass(frozen=True)
class Annulus:
    inner: Lozenge
    outer: Lozenge

    def __post_init__(self):
        if self.inner.n >= self.outer.n:
            raise ValueError("annulus needs inner.n < outer.n")
        if self.inner.center != self.outer.center:
            raise ValueError("annulus regions must be cocentric")

    def token(self) -> str:
        return f"Annulus({self.inner.token()},{self.outer.token()})"


@dataclass(frozen=True)
class Torus:
    n: int

    def token(self) -> str:
        return f"Torus({self.n})"


_REGION_RE = re.compile(r"(Lozenge|Rectangle|Torus)\(([-\d,;]+)\)")


def parse_region(token: str):
    token = token.strip()
    if token.startswith("Annulus(") and token.endswith(")"):
        body = token[len("Annulus(") : -1]
        depth = 0
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return Annulus(parse_region(body[:i]), parse_region(body[i + 1 :]))
        raise ValueError(f"bad annulus token {token!r}")
    m = _REGION_RE.fullmatch(token)
    if not m:
        raise ValueError(f"bad region token {token!r}")
    name, body = m.groups()
    center = (0, 0)
    if ";" in body:
        body, ctr = body.split(";")
        parts = ctr.split(",")
        center = (int(parts[0]), int(parts[1]))
    args = [int(t) for t in body.split(",")]
    if name == "Lozenge":
        return Lozenge(args[0], center)
    if name == "Rectangle":
        return Rectangle(args[0], args[1], center)
    return Torus(args[0])


# ---------------------------------------------------------------------------
# face templates
#
# A template enumerates lattice faces as ccw cycles of integer vertex keys,
# plus the float embedding of every key it mentions. Integer keys use a
# per-kind scaling chosen so that all lattice points are exact.


@dataclass
class _Template:
    faces: list            # ccw cycles of ikeys
    coords: dict           # ikey -> (x, y)
    periods: tuple         # two integer vectors in ikey space
    max_degree: int


def _tpl_square(lo, hi):
    faces, coords = [], {}
    for j in range(lo, hi):
        for i in range(lo, hi):
            cyc = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            faces.append(cyc)
            for k in cyc:
                coords[k] = (float(k[0]), float(k[1]))
    return _Template(faces, coords, ((1, 0), (0, 1)), 4)


def _tri_key(i, j):
    return (2 * i + j, j)


def _tpl_triangular(lo, hi):
    # vertex (i,j) -> ikey (2i+j, j), embedded at (X/2, Y*sqrt3/2)
    faces, coords = [], {}

    def key(i, j):
        k = _tri_key(i, j)
        coords[k] = (k[0] / 2.0, k[1] * SQRT3 / 2.0)
        return k

    for j in range(lo, hi):
        for i in range(lo, hi):
            a, b = key(i, j), key(i + 1, j)
            c, d = key(i, j + 1), key(i + 1, j + 1)
            faces.append((a, b, c))
            faces.append((b, d, c))
    return _Template(faces, coords, ((2, 0), (1, 1)), 6)


def _tpl_honeycomb(lo, hi):
    # face (i,j) centered at ikey (2i+j, 3j); vertices ccw from the top
    faces, coords = [], {}
    offs = ((0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1), (1, 1))
    for j in range(lo, hi):
        for i in range(lo, hi):
            cx, cy = 2 * i + j, 3 * j
            cyc = tuple((cx + dx, cy + dy) for dx, dy in offs)
            faces.append(cyc)
            for X, Y in cyc:
                coords[(X, Y)] = (X / (2.0 * SQRT3), Y / 6.0)
    return _Template(faces, coords, ((2, 0), (1, 3)), 3)


def _tpl_kagome(lo, hi):
    # vertices are triangular edge midpoints: ikey = sum of endpoint ikeys
    faces, coords = [], {}

    def mid(p, q):
        k = (p[0] + q[0], p[1] + q[1])
        coords[k] = (k[0] / 4.0, k[1] * SQRT3 / 4.0)
        return k

    for j in range(lo, hi):
        for i in range(lo, hi):
            a, b = _tri_key(i, j), _tri_key(i + 1, j)
            c, d = _tri_key(i, j + 1), _tri_key(i + 1, j + 1)
            faces.append((mid(a, b), mid(b, c), mid(a, c)))
            faces.append((mid(b, d), mid(d, c), mid(b, c)))
            # hexagon around the triangular vertex (i+1, j+1), ccw
            nbrs = (
                _tri_key(i + 2, j + 1),
                _tri_key(i + 1, j + 2),
                _tri_key(i, j + 2),
                _tri_key(i, j + 1),
                _tri_key(i + 1, j),
                _tri_key(i + 2, j),
            )
            faces.append(tuple(mid(d, w) for w in nbrs))
    return _Template(faces, coords, ((4, 0), (2, 2)), 4)


def _tpl_rhombille(lo, hi):
    # triangular corners plus triangle centers; one rhombus per triangular edge
    faces, coords = [], {}

    def corner(i, j):
        k = (2 * i + j, 3 * j)
        coords[k] = (k[0] / 2.0, k[1] * SQRT3 / 6.0)
        return k

    def center(tri):
        X = sum(k[0] for k in tri)
        Y = sum(k[1] for k in tri)
        k = (X // 3, Y // 3)
        coords[k] = (k[0] / 2.0, k[1] * SQRT3 / 6.0)
        return k

    for j in range(lo, hi):
        for i in range(lo, hi):
            a, b = corner(i, j), corner(i + 1, j)
            c = corner(i, j + 1)
            d = corner(i + 1, j + 1)
            up = center((a, b, c))
            dn = center((b, d, c))
            dn_below = center((a, b, corner(i + 1, j - 1)))
            dn_left = center((corner(i - 1, j + 1), a, c))
            faces.append((b, dn, c, up))
            faces.append((a, dn_below, b, up))
            faces.append((a, up, c, dn_left))
    return _Template(faces, coords, ((2, 0), (1, 3)), 6)


def _tpl_square_octagon(lo, hi):
    # one diamond per integer point; ikey (4i+dx, 4j+dy) with dx,dy in {-1,0,1}
    faces, coords = [], {}
    dshift = 1.0 / (2.0 + math.sqrt(2.0))

    def key(i, j, dx, dy):
        k = (4 * i + dx, 4 * j + dy)
        coords[k] = (i + dshift * dx, j + dshift * dy)
        return k

    for j in range(lo, hi):
        for i in range(lo, hi):
            E, N = key(i, j, 1, 0), key(i, j, 0, 1)
            W, S = key(i, j, -1, 0), key(i, j, 0, -1)
            faces.append((E, N, W, S))
            faces.append((
                key(i, j, 1, 0), key(i + 1, j, -1, 0), key(i + 1, j, 0, 1),
                key(i + 1, j + 1, 0, -1), key(i + 1, j + 1, -1, 0),
                key(i, j + 1, 1, 0), key(i, j + 1, 0, -1), key(i, j, 0, 1),
            ))
    return _Template(faces, coords, ((4, 0), (0, 4)), 3)


_TPL_FNS = {
    "square": _tpl_square,
    "triangular": _tpl_triangular,
    "honeycomb": _tpl_honeycomb,
    "kagome": _tpl_kagome,
    "rhombille": _tpl_rhombille,
    "square-octagon": _tpl_square_octagon,
}


def _ekey(p, q):
    return (p, q) if p <= q else (q, p)


def _dot_template(base: _Template) -> _Template:
    """Subdivide every edge; ikeys double so midpoints stay integral."""
    coords = {}
    for k, xy in base.coords.items():
        coords[(2 * k[0], 2 * k[1])] = xy
    faces = []
    for cyc in base.faces:
        new = []
        L = len(cyc)
        for t in range(L):
            p, q = cyc[t], cyc[(t + 1) % L]
            km = (p[0] + q[0], p[1] + q[1])
            coords[km] = (
                (base.coords[p][0] + base.coords[q][0]) / 2.0,
                (base.coords[p][1] + base.coords[q][1]) / 2.0,
            )
            new.append((2 * p[0], 2 * p[1]))
            new.append(km)
        faces.append(tuple(new))
    p1, p2 = base.periods
    periods = ((2 * p1[0], 2 * p1[1]), (2 * p2[0], 2 * p2[1]))
    return _Template(faces, coords, periods, base.max_degree)


def _is_up_triangle(cyc) -> bool:
    ys = [k[1] for k in cyc]
    return ys.count(min(ys)) == 2


def _deltawye_template(base_kind: str, lo, hi) -> _Template:
    """Star every triangle of an edge-disjoint cover; keep the other faces.

    Triangular base: star the up-triangles (down-triangles become hexagons).
    Kagome base: star all small triangles (the result is a dotted honeycomb).
    """
    base = _TPL_FNS[base_kind](lo - 1, hi + 1)
    if base_kind == "triangular":
        starred = [c for c in base.faces if _is_up_triangle(c)]
        kept = [c for c in base.faces if not _is_up_triangle(c)]
    elif base_kind == "kagome":
        starred = [c for c in base.faces if len(c) == 3]
        kept = [c for c in base.faces if len(c) != 3]
    else:
        raise ValueError(f"no triangle cover for base kind {base_kind!r}")
    coords = {}
    center_of = {}
    for cyc in starred:
        X = sum(k[0] for k in cyc)
        Y = sum(k[1] for k in cyc)
        ck = (2 * X, 2 * Y)  # 6x-scaled centroid stays integral
        coords[ck] = (
            sum(base.coords[k][0] for k in cyc) / 3.0,
            sum(base.coords[k][1] for k in cyc) / 3.0,
        )
        for t in range(3):
            e = _ekey(cyc[t], cyc[(t + 1) % 3])
            if e in center_of:
                raise ValueError("triangle cover is not edge-disjoint")
            center_of[e] = ck
    faces = []
    for cyc in kept:
        new = []
        L = len(cyc)
        ok = True
        for t in range(L):
            p, q = cyc[t], cyc[(t + 1) % L]
            e = _ekey(p, q)
            if e not in center_of:
                ok = False
                break
            kp = (6 * p[0], 6 * p[1])
            coords[kp] = base.coords[p]
            new.append(kp)
            new.append(center_of[e])
        if ok:
            faces.append(tuple(new))
    p1, p2 = base.periods
    periods = ((6 * p1[0], 6 * p1[1]), (6 * p2[0], 6 * p2[1]))
    return _Template(faces, coords, periods, 3)


def _get_template(kind: str, lo: int, hi: int) -> _Template:
    if kind.startswith("dotted-"):
        return _dot_template(_get_template(kind[len("dotted-") :], lo, hi))
    if kind.startswith("deltawye-"):
        return _deltawye_template(kind[len("deltawye-") :], lo, hi)
    if kind not in _TPL_FNS:
        raise ValueError(f"unknown lattice kind {kind!r}")
    return _TPL_FNS[kind](lo, hi)


def _base_kind(kind: str) -> str:
    while kind.startswith(("dotted-", "deltawye-")):
        kind = kind.split("-", 1)[1]
    return kind


# ---------------------------------------------------------------------------
# patch assembly


@dataclass
class Halo:
    """Lattice faces straddling the patch boundary, with the bounding loop."""

    faces: list            # cycles in mixed ids: >=0 local vertex, <0 exterior
    ext_ikeys: list        # exterior ikeys; ext id -(k+1) -> ext_ikeys[k]
    ext_coords: np.ndarray
    centers: list          # Fraction period-coordinate midpoints per halo face
    ring: list | None      # ccw halo-face indices forming the bounding loop
    ring_cross: list | None  # (local u, other id) edge crossed between ring[t]
                             # and ring[t+1]
    edge_halo: dict        # boundary edge id -> halo face index on its far side


@dataclass
class LatticePatch:
    kind: str
    region: object
    graph: FiniteGraph
    coords: np.ndarray
    ikeys: list
    boundary: list
    faces: list                      # interior faces, ccw local-vertex cycles
    face_centers: list               # Fraction period-coordinate pairs
    dual: FiniteGraph | None         # dual edge i crosses primal edge i
    outer_face: int | None
    parts: np.ndarray | None
    periods: tuple
    halo: Halo | None
    _ikey_index: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.graph.n

    def vertex_at(self, ikey) -> int:
        return self._ikey_index[tuple(ikey)]

    def center_vertex(self) -> int:
        """Vertex nearest the origin (deterministic tie-break by id)."""
        d = np.round(np.hypot(self.coords[:, 0], self.coords[:, 1]), 9)
        return int(np.lexsort((np.arange(self.n), d))[0])

    def halo_center_xy(self, idx: int):
        cyc = self.halo.faces[idx]
        xs = ys = 0.0
        for t in cyc:
            x, y = (self.coords[t] if t >= 0 else self.halo.ext_coords[-t - 1])
            xs += x
            ys += y
        return (xs / len(cyc), ys / len(cyc))

    def halo_face_nearest(self, xy) -> int:
        if self.halo is None:
            raise ValueError("patch has no halo")
        cand = self.halo.ring if self.halo.ring is not None else range(len(self.halo.faces))
        best, best_d = -1, math.inf
        for idx in cand:
            c = self.halo_center_xy(idx)
            d = (c[0] - xy[0]) ** 2 + (c[1] - xy[1]) ** 2
            if d < best_d - 1e-12:
                best, best_d = idx, d
        return best


def _period_coords(ikey, periods):
    """Solve ikey = a*p1 + b*p2 exactly."""
    (p, q), (r, s) = periods
    det = p * s - q * r
    a = Fraction(ikey[0] * s - ikey[1] * r, det)
    b = Fraction(ikey[1] * p - ikey[0] * q, det)
    return a, b


def build_patch(kind: str, region) -> LatticePatch:
    """Carve a finite patch of the given lattice kind.

    Vertex kinds (square, triangular) read Lozenge(n) / Rectangle(n,m) as
    vertex boxes in period coordinates. Face kinds take the union of closed
    faces with midpoint in the closed region, except the honeycomb lozenge,
    which keeps the vertices strictly inside the bounding dual walk through
    the ring of face midpoints (the discretization used by the annulus
    observables).
    """
    if isinstance(region, Torus):
        return _build_torus(kind, region)
    if isinstance(region, Annulus):
        patch = build_patch(kind, region.outer)
        patch.region = region
        return patch

    if isinstance(region, Lozenge):
        na, nb = region.n, region.n
    elif isinstance(region, Rectangle):
        na, nb = region.n, region.m
    else:
        raise TypeError(f"unsupported region {region!r}")
    ca, cb = region.center

    box = na + nb + abs(ca) + abs(cb) + 3
    tpl = _get_template(kind, -box, box + 1)
    periods = tpl.periods
    base = _base_kind(kind)

    def face_center_pc(cyc):
        X = sum(k[0] for k in cyc)
        Y = sum(k[1] for k in cyc)
        a, b = _period_coords((X, Y), periods)
        return (a / len(cyc), b / len(cyc))

    selected: set = set()
    face_edges: set = set()
    if kind == "honeycomb" and isinstance(region, Lozenge):
        for cyc in tpl.faces:
            for k in cyc:
                if k not in selected:
                    a, b = _period_coords(k, periods)
                    if max(abs(a - ca), abs(b - cb)) < na:
                        selected.add(k)
        edge_mode = "induced"
    elif base in ("square", "triangular") and kind == base:
        for cyc in tpl.faces:
            for k in cyc:
                if k not in selected:
                    a, b = _period_coords(k, periods)
                    if abs(a - ca) <= na and abs(b - cb) <= nb:
                        selected.add(k)
        edge_mode = "induced"
    else:
        # union of closed faces by midpoint-in-closed-region
        if kind == "honeycomb" and (ca, cb) != (0, 0):
            raise ValueError("honeycomb rectangles must be centered")
        for cyc in tpl.faces:
            if kind == "honeycomb":
                X = sum(k[0] for k in cyc)
                Y = sum(k[1] for k in cyc)
                # centers (X/6, Y/6) in ikey scale: |x| <= n/sqrt3, |y| <= m
                ok = abs(Fraction(X, 6)) <= 2 * na and abs(Fraction(Y, 6)) <= 6 * nb
            else:
                a, b = face_center_pc(cyc)
                ok = abs(a - ca) <= na and abs(b - cb) <= nb
            if ok:
                L = len(cyc)
                for t in range(L):
                    selected.add(cyc[t])
                    face_edges.add(_ekey(cyc[t], cyc[(t + 1) % L]))
        edge_mode = "faces"

    if not selected:
        raise ValueError("empty patch")

    big_edges = set()
    for cyc in tpl.faces:
        L = len(cyc)
        for t in range(L):
            big_edges.add(_ekey(cyc[t], cyc[(t + 1) % L]))

    order = sorted(selected, key=lambda k: (k[1], k[0]))
    index = {k: i for i, k in enumerate(order)}

    if edge_mode == "induced":
        pool = (e for e in big_edges if e[0] in selected and e[1] in selected)
    else:
        pool = iter(face_edges)
    d_edges = sorted(pool, key=lambda e: (e[0][1], e[0][0], e[1][1], e[1][0]))

    graph = FiniteGraph(len(order), [(index[u], index[v]) for u, v in d_edges])
    coords = np.asarray([tpl.coords[k] for k in order], dtype=float)
    eset = set(d_edges)

    # interior faces: all vertices selected and all boundary edges present
    interior = []
    for cyc in tpl.faces:
        L = len(cyc)
        if all(k in selected for k in cyc) and all(
            _ekey(cyc[t], cyc[(t + 1) % L]) in eset for t in range(L)
        ):
            interior.append(cyc)
    interior.sort(key=_face_sort_key)
    interior_of_big = {frozenset(cyc): fid for fid, cyc in enumerate(interior)}
    face_centers = [face_center_pc(cyc) for cyc in interior]

    # big faces bordering each big edge
    edge_faces: dict = {}
    for bfid, cyc in enumerate(tpl.faces):
        L = len(cyc)
        for t in range(L):
            edge_faces.setdefault(_ekey(cyc[t], cyc[(t + 1) % L]), []).append(bfid)

    # halo: straddling faces (plus faces whose vertices are all in but an edge
    # is missing, which only happens for ragged face-unions)
    halo_cycles = []
    halo_idx_of_big = {}
    for bfid, cyc in enumerate(tpl.faces):
        ins = sum(1 for k in cyc if k in selected)
        if 0 < ins < len(cyc) or (ins == len(cyc) and frozenset(cyc) not in interior_of_big):
            halo_idx_of_big[bfid] = len(halo_cycles)
            halo_cycles.append(cyc)

    ext_ikeys: list = []
    ext_index: dict = {}

    def mixed_id(k):
        if k in index:
            return index[k]
        if k not in ext_index:
            ext_index[k] = len(ext_ikeys)
            ext_ikeys.append(k)
        return -(ext_index[k] + 1)

    halo_faces = [tuple(mixed_id(k) for k in cyc) for cyc in halo_cycles]
    halo_centers = [face_center_pc(cyc) for cyc in halo_cycles]

    crossing = [
        e for e in big_edges
        if ((e[0] in selected) != (e[1] in selected))
        or (e[0] in selected and e[1] in selected and e not in eset)
    ]
    boundary = sorted({index[k] for e in crossing for k in e if k in index})

    ring, ring_cross = _trace_ring(crossing, edge_faces, halo_idx_of_big, halo_cycles, tpl.coords)
    ring_cross_ids = None
    if ring_cross is not None:
        ring_cross_ids = []
        for e in ring_cross:
            ku, kv = e
            if ku not in index:
                ku, kv = kv, ku
            ring_cross_ids.append((index[ku], mixed_id(kv)))

    # dual graph aligned with the primal edge order
    F = len(interior)
    dual_pairs = []
    edge_halo = {}
    for eid, e in enumerate(d_edges):
        sides = []
        for bfid in edge_faces[e]:
            key = frozenset(tpl.faces[bfid])
            if key in interior_of_big:
                sides.append(interior_of_big[key])
            else:
                sides.append(F)
                if bfid in halo_idx_of_big:
                    edge_halo[eid] = halo_idx_of_big[bfid]
        if len(sides) != 2:
            raise AssertionError("template box too small: edge with <2 faces")
        dual_pairs.append(tuple(sides))
    dual = FiniteGraph(F + 1, dual_pairs)

    ext_coords = np.asarray([tpl.coords[k] for k in ext_ikeys], dtype=float).reshape(-1, 2)
    halo = Halo(
        faces=halo_faces,
        ext_ikeys=ext_ikeys,
        ext_coords=ext_coords,
        centers=halo_centers,
        ring=ring,
        ring_cross=ring_cross_ids,
        edge_halo=edge_halo,
    )

    patch = LatticePatch(
        kind=kind,
        region=region,
        graph=graph,
        coords=coords,
        ikeys=order,
        boundary=boundary,
        faces=[tuple(index[k] for k in cyc) for cyc in interior],
        face_centers=face_centers,
        dual=dual,
        outer_face=F,
        parts=bipartition(graph),
        periods=periods,
        halo=halo,
        _ikey_index=index,
    )
    _check_patch(patch, tpl.max_degree)
    return patch


def _face_sort_key(cyc):
    X = sum(k[0] for k in cyc)
    Y = sum(k[1] for k in cyc)
    return (Fraction(Y, len(cyc)), Fraction(X, len(cyc)))


def _trace_ring(crossing, edge_faces, halo_idx_of_big, halo_cycles, coords):
    """Order the straddling faces into the bounding dual loop.

    The duals of the crossing edges form a closed walk through the straddling
    faces whenever the carved region is simply connected; returns (None, None)
    when the walk is not a single simple cycle.
    """
    if len(crossing) < 3:
        return None, None
    steps: dict = {}
    for e in crossing:
        fs = [halo_idx_of_big.get(b) for b in edge_faces.get(e, ())]
        if len(fs) != 2 or fs[0] is None or fs[1] is None:
            return None, None
        steps.setdefault(fs[0], []).append((fs[1], e))
        steps.setdefault(fs[1], []).append((fs[0], e))
    if any(len(v) != 2 for v in steps.values()):
        return None, None
    start = min(steps)
    ring = [start]
    prev_e = None
    cur = start
    while True:
        nxt = None
        for f, e in steps[cur]:
            if e != prev_e:
                nxt = (f, e)
                break
        if nxt is None:
            return None, None
        prev_e = nxt[1]
        if nxt[0] == start:
            break
        ring.append(nxt[0])
        cur = nxt[0]
    if len(ring) != len(steps):
        return None, None

    def center(idx):
        cyc = halo_cycles[idx]
        return (
            sum(coords[k][0] for k in cyc) / len(cyc),
            sum(coords[k][1] for k in cyc) / len(cyc),
        )

    pts = [center(idx) for idx in ring]
    area = 0.0
    for t in range(len(pts)):
        x0, y0 = pts[t]
        x1, y1 = pts[(t + 1) % len(pts)]
        area += x0 * y1 - x1 * y0
    if area < 0:
        ring = [ring[0]] + ring[:0:-1]
    cross = []
    for t in range(len(ring)):
        a, b = ring[t], ring[(t + 1) % len(ring)]
        hop = None
        for f, e in steps[a]:
            if f == b:
                hop = e
                break
        if hop is None:
            return None, None
        cross.append(hop)
    return ring, cross


def _check_patch(patch: LatticePatch, max_degree: int):
    g = patch.graph
    for v in range(g.n):
        if g.degree(v) > max_degree:
            raise AssertionError(f"degree {g.degree(v)} exceeds the lattice bound")
    if patch.dual is not None and patch.dual.m != g.m:
        raise AssertionError("dual edge bijection broken")
    if patch.halo is not None and patch.halo.ring is not None and g.is_connected():
        if g.n - g.m + len(patch.faces) != 1:
            raise AssertionError("Euler check failed")


def _build_torus(kind: str, region: Torus) -> LatticePatch:
    if kind != "square":
        raise ValueError("torus regions are supported for the square kind only")
    N = region.n
    if N < 2:
        raise ValueError("torus needs n >= 2")
    L = 2 * N
    index = {}
    order = []
    for j in range(L):
        for i in range(L):
            index[(i, j)] = len(order)
            order.append((i, j))
    edges = []
    for j in range(L):
        for i in range(L):
            edges.append((index[(i, j)], index[((i + 1) % L, j)]))
            edges.append((index[(i, j)], index[(i, (j + 1) % L)]))
    graph = FiniteGraph(L * L, edges)
    coords = np.asarray(order, dtype=float)
    parts = np.asarray([(i + j) % 2 for i, j in order], dtype=np.int8)
    return LatticePatch(
        kind=kind,
        region=region,
        graph=graph,
        coords=coords,
        ikeys=order,
        boundary=[],
        faces=[],
        face_centers=[],
        dual=None,
        outer_face=None,
        parts=parts,
        periods=((1, 0), (0, 1)),
        halo=None,
        _ikey_index=index,
    )


# ---------------------------------------------------------------------------
# quads


@dataclass
class QuadSide:
    dual_faces: list    # halo face indices on the arc, endpoints included
    vertices: list      # patch vertices adjacent to the crossed edges
    crossings: list     # (local u, other id) crossing edges on the arc


@dataclass
class Quad:
    patch: LatticePatch
    marked: tuple            # halo face indices (bl, br, tr, tl)
    sides: dict              # 'left'|'bottom'|'right'|'top' -> QuadSide
    dual_graph: FiniteGraph  # interior + ring faces; dual edge i <-> primal i
    dual_of_halo: dict       # halo face index -> dual_graph vertex id

    def dual_side_ids(self, side: str) -> list:
        return [self.dual_of_halo[f] for f in self.sides[side].dual_faces]


def make_quad(patch: LatticePatch, marked) -> Quad:
    """Mark four faces on the bounding dual loop, counterclockwise bl,br,tr,tl.

    Each side of the quad is the loop arc between consecutive marked faces
    (inclusive on dual vertices, exclusive on the marked faces' far edges):
    left runs tl..bl, bottom bl..br, right br..tr, top tr..tl. A side carries
    its dual-vertex arc, the primal edges crossing it, and their endpoints
    inside the patch. The refined dual graph attaches boundary edges to their
    actual halo faces instead of a single outer vertex.
    """
    halo = patch.halo
    if halo is None or halo.ring is None:
        raise ValueError("patch has no bounding dual loop")
    ring = halo.ring
    pos = {f: t for t, f in enumerate(ring)}
    for f in marked:
        if f not in pos:
            raise ValueError("marked faces must lie on the bounding loop")
    if len(set(marked)) != 4:
        raise ValueError("marked faces must be distinct")
    bl, br, tr, tl = marked
    p0 = pos[bl]
    shifted = [(pos[f] - p0) % len(ring) for f in (bl, br, tr, tl)]
    if not (shifted[0] == 0 and shifted[1] < shifted[2] < shifted[3]):
        raise ValueError("marked faces must appear counterclockwise")

    def arc(f0, f1):
        faces = [f0]
        cross = []
        t = pos[f0]
        while ring[t] != f1:
            cross.append(halo.ring_cross[t])
            t = (t + 1) % len(ring)
            faces.append(ring[t])
        return faces, cross

    sides = {}
    for name, (f0, f1) in (
        ("bottom", (bl, br)),
        ("right", (br, tr)),
        ("top", (tr, tl)),
        ("left", (tl, bl)),
    ):
        faces, cross = arc(f0, f1)
        sides[name] = QuadSide(
            dual_faces=faces,
            vertices=sorted({u for u, _ in cross}),
            crossings=cross,
        )

    F = len(patch.faces)
    dual_of_halo = {f: F + t for t, f in enumerate(ring)}
    local_sets = {f: {t for t in halo.faces[f] if t >= 0} for f in ring}
    pairs = []
    for eid in range(patch.graph.m):
        a, b = patch.dual.edges[eid]
        if a == patch.outer_face and b == patch.outer_face:
            # pendant edge: both sides are outer fragments, and the loop must
            # connect the two distinct halo faces flanking it (edge_halo keeps
            # only one, which would degenerate into a self-loop here)
            u, v = patch.graph.edges[eid]
            flank = [f for f in ring if u in local_sets[f] and v in local_sets[f]]
            if len(flank) != 2:
                raise ValueError("boundary edge without two flanking ring faces")
            pairs.append((dual_of_halo[flank[0]], dual_of_halo[flank[1]]))
            continue
        out = []
        for s in (a, b):
            if s == patch.outer_face:
                hidx = halo.edge_halo.get(eid)
                if hidx is None or hidx not in dual_of_halo:
                    raise ValueError("boundary edge without a ring face")
                out.append(dual_of_halo[hidx])
            else:
                out.append(s)
        pairs.append(tuple(out))
    dual_graph = FiniteGraph(F + len(ring), pairs)
    return Quad(patch=patch, marked=tuple(marked), sides=sides,
                dual_graph=dual_graph, dual_of_halo=dual_of_halo)


# ---------------------------------------------------------------------------
# reflections


@dataclass
class Reflection:
    axis: str
    vertex_perm: np.ndarray
    face_perm: np.ndarray | None
    halo_perm: dict | None


def _reflect_ikey(k, axis, periods):
    if axis == "x":
        return (-k[0], k[1])
    if axis == "y":
        return (k[0], -k[1])
    if axis == "diag":
        a, b = _period_coords(k, periods)
        (p, q), (r, s) = periods
        X = b * p + a * r
        Y = b * q + a * s
        if X.denominator != 1 or Y.denominator != 1:
            raise ValueError("diagonal reflection leaves the lattice")
        return (int(X), int(Y))
    raise ValueError(f"unknown axis {axis!r}")


def reflect(patch: LatticePatch, axis: str) -> Reflection:
    """Reflection automorphism of the patch; raises if the region lacks it.

    axis 'x' negates x, 'y' negates y, 'diag' swaps the two period directions.
    """
    perm = np.empty(patch.n, dtype=np.int64)
    for v, k in enumerate(patch.ikeys):
        kk = _reflect_ikey(k, axis, patch.periods)
        w = patch._ikey_index.get(kk)
        if w is None:
            raise ValueError(f"patch is not symmetric under axis {axis!r}")
        perm[v] = w
    eset = set(patch.graph.edges)
    for u, v in patch.graph.edges:
        a, b = int(perm[u]), int(perm[v])
        if ((a, b) if a <= b else (b, a)) not in eset:
            raise ValueError("reflection is not a graph automorphism")

    face_perm = None
    if patch.faces:
        fidx = {frozenset(cyc): i for i, cyc in enumerate(patch.faces)}
        face_perm = np.empty(len(patch.faces), dtype=np.int64)
        for i, cyc in enumerate(patch.faces):
            img = frozenset(int(perm[v]) for v in cyc)
            if img not in fidx:
                raise ValueError("reflection does not permute interior faces")
            face_perm[i] = fidx[img]

    halo_perm = None
    if patch.halo is not None:
        def face_key(idx):
            return frozenset(
                patch.ikeys[t] if t >= 0 else patch.halo.ext_ikeys[-t - 1]
                for t in patch.halo.faces[idx]
            )

        fmap = {face_key(idx): idx for idx in range(len(patch.halo.faces))}
        halo_perm = {}
        for idx in range(len(patch.halo.faces)):
            img = frozenset(_reflect_ikey(k, axis, patch.periods) for k in face_key(idx))
            if img not in fmap:
                raise ValueError("reflection does not permute the halo")
            halo_perm[idx] = fmap[img]
    return Reflection(axis=axis, vertex_perm=perm, face_perm=face_perm, halo_perm=halo_perm)


def is_symmetric_quad(quad: Quad, refl: Reflection) -> bool:
    """True when the reflection fixes two opposite marked faces and swaps the
    other two (the symmetry needed for the crossing lower bound)."""
    if refl.halo_perm is None:
        return False
    bl, br, tr, tl = quad.marked
    m = refl.halo_perm
    diag1 = m.get(br) == br and m.get(tl) == tl and m.get(bl) == tr and m.get(tr) == bl
    diag2 = m.get(bl) == bl and m.get(tr) == tr and m.get(br) == tl and m.get(tl) == br
    return bool(diag1 or diag2)


# ---------------------------------------------------------------------------
# transforms (operations on existing patches; the dotted-* and deltawye-*
# kinds are generated directly from templates instead)


def dot_transform(patch: LatticePatch):
    """Subdivide every edge with a midpoint vertex.

    Returns (graph, info): old vertex v keeps id v, edge e gets the midpoint
    id n + e and splits into new edge ids (2e, 2e+1).
    """
    g = patch.graph
    n, m = g.n, g.m
    edges = []
    for eid, (u, v) in enumerate(g.edges):
        edges.append((u, n + eid))
        edges.append((n + eid, v))
    new = FiniteGraph(n + m, edges)
    coords = np.vstack([patch.coords, patch.coords[g.edge_array()].mean(axis=1)])
    info = {
        "vertex_map": np.arange(n, dtype=np.int64),
        "midpoint_of_edge": np.arange(n, n + m, dtype=np.int64),
        "edge_map": [(2 * e, 2 * e + 1) for e in range(m)],
        "coords": coords,
    }
    return new, info


def star_triangle_transform(graph: FiniteGraph, triangles):
    """Replace each triangle of an edge-disjoint cover by a 3-star.

    `triangles` lists vertex triples; together they must use every edge of
    the graph exactly once. Star centers are appended after the original
    vertices (center of triangle t = n + t).
    """
    n = graph.n
    used: dict = {}
    for t, tri in enumerate(triangles):
        a, b, c = tri
        for e in (_iekey(a, b), _iekey(b, c), _iekey(a, c)):
            if e in used:
                raise ValueError("triangles are not edge-disjoint")
            used[e] = t
    for u, v in graph.edges:
        if _iekey(u, v) not in used:
            raise ValueError("triangles do not cover every edge")
    if len(used) != graph.m:
        raise ValueError("triangle cover mentions non-edges")
    edges = []
    for t, tri in enumerate(triangles):
        for v in tri:
            edges.append((v, n + t))
    new = FiniteGraph(n + len(triangles), edges)
    info = {
        "vertex_map": np.arange(n, dtype=np.int64),
        "center_of_triangle": np.arange(n, n + len(triangles), dtype=np.int64),
    }
    return new, info


def _iekey(u, v):
    return (u, v) if u <= v else (v, u)


# ---------------------------------------------------------------------------
# serialization


def dump_patch(patch: LatticePatch) -> str:
    lines = [f"{patch.kind} {patch.region.token()}"]
    for v in range(patch.n):
        x, y = patch.coords[v]
        lines.append(f"V {v} {x:.12g} {y:.12g}")
    outer = patch.outer_face
    for eid, (u, v) in enumerate(patch.graph.edges):
        flag = 0
        if patch.dual is not None:
            a, b = patch.dual.edges[eid]
            flag = int(a == outer or b == outer)
        lines.append(f"E {eid} {u} {v} {flag}")
    lines.append("B " + " ".join(str(v) for v in patch.boundary))
    return "\n".join(lines) + "\n"


def load_patch(text: str) -> LatticePatch:
    """Rebuild a patch from its header line and verify the body matches.

    The body carries no face data, so the patch is reconstructed from
    (kind, region); determinism makes the round trip byte-exact.
    """
    head = text.splitlines()[0]
    kind, token = head.split(" ", 1)
    patch = build_patch(kind, parse_region(token))
    if dump_patch(patch) != text:
        raise ValueError("serialized patch does not match its reconstruction")
    return patch
