"""Derived edge sets and planar crossing events.

An edge set kind selects edges by the triplet values on their endpoints:
the open edges themselves, the level sets (both heights at least s, with the
coin breaking ties on s-s edges one way or the other), and the sign-carrying
sets around level one. Crossing and circuit events are evaluated on the quad
and annulus discretizations from the lattice module.

Circuits are detected through the complementary connection on the other
graph: a primal circuit around the hole exists exactly when no dual path
escapes from the hole to the outer face through non-open edges, and the dual
statement is the transpose. A direct loop-finding reference lives in the
test suite only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coupling import clusters, nu_from
from .lattice import Annulus, LatticePatch, Lozenge, Quad, Rectangle, make_quad, parse_region

_PARAM_TAGS = ("h_geqB", "level_set", "level_set_abs")
_PLAIN_TAGS = ("omega_open", "omega_closed", "h_omega_leq0", "h_omega_geq1")


@dataclass(frozen=True)
class EdgeSetKind:
    """Which derived edge set to extract from a triplet."""

    tag: str
    s: int = 0          # threshold for level sets, center level for nu_zero

    def __post_init__(self):
        if self.tag in _PARAM_TAGS + ("nu_zero",):
            if self.s <= 0 or self.s % 2 == 0:
                raise ValueError(f"{self.tag} needs a positive odd parameter")
        elif self.tag not in _PLAIN_TAGS:
            raise ValueError(f"unknown edge set kind {self.tag!r}")

    def token(self) -> str:
        if self.tag == "level_set":
            return f"E{self.s}"
        if self.tag == "level_set_abs":
            return f"Eabs{self.s}"
        if self.tag == "h_geqB":
            return f"hB{self.s}"
        if self.tag == "nu_zero":
            return f"nu0_{self.s}" if self.s != 3 else "nu0"
        return {"omega_open": "omega", "omega_closed": "omega_closed",
                "h_omega_leq0": "hwleq0", "h_omega_geq1": "hwgeq1"}[self.tag]


_SET_TOKENS = {
    "omega": ("omega_open", 0),
    "omega_closed": ("omega_closed", 0),
    "hwleq0": ("h_omega_leq0", 0),
    "hwgeq1": ("h_omega_geq1", 0),
}


def parse_edge_set(text: str) -> EdgeSetKind:
    t = text.strip()
    if t in _SET_TOKENS:
        return EdgeSetKind(*_SET_TOKENS[t])
    m = re.fullmatch(r"E(\d+)", t)
    if m:
        return EdgeSetKind("level_set", int(m.group(1)))
    m = re.fullmatch(r"Eabs(\d+)", t)
    if m:
        return EdgeSetKind("level_set_abs", int(m.group(1)))
    m = re.fullmatch(r"hB(\d+)", t)
    if m:
        return EdgeSetKind("h_geqB", int(m.group(1)))
    m = re.fullmatch(r"nu0(?:_(\d+))?", t)
    if m:
        return EdgeSetKind("nu_zero", int(m.group(1) or 3))
    raise ValueError(f"unknown edge set token {text!r}")


def edge_set(h, B, omega, edges, kind: EdgeSetKind) -> np.ndarray:
    """Membership mask of the requested edge set, one byte per edge."""
    h = np.asarray(h)
    B = np.asarray(B)
    omega = np.asarray(omega)
    hu, hv = h[edges[:, 0]], h[edges[:, 1]]
    tag, s = kind.tag, kind.s
    if tag == "omega_open":
        out = omega == 1
    elif tag == "omega_closed":
        out = omega == 0
    elif tag == "h_omega_leq0":
        out = (hu <= 1) & (hv <= 1) & ~((hu == 1) & (hv == 1) & (B == 1))
    elif tag == "h_omega_geq1":
        out = (hu >= 1) & (hv >= 1) & ~((hu == 1) & (hv == 1) & (B == 0))
    elif tag == "h_geqB":
        out = (hu >= s) & (hv >= s) & ~((hu == s) & (hv == s) & (B == 0))
    elif tag == "level_set":
        out = (hu >= s) & (hv >= s) & ~((hu == s) & (hv == s) & (B == 1))
    elif tag == "level_set_abs":
        au, av = np.abs(hu), np.abs(hv)
        out = (au >= s) & (av >= s) & ~((au == s) & (av == s) & (B == 1))
    else:
        out = nu_from(h, B, edges, level=s) == 0
    return out.astype(np.uint8)


# ---------------------------------------------------------------------------
# quad crossings


def quad_crossing(quad: Quad, open_mask, direction: str, graph: str = "primal") -> bool:
    """Connection between opposite sides of the quad through the open set.

    horizontal joins left and right, vertical joins bottom and top. Primal
    connections run between the side vertex sets through open edges; dual
    connections run between the side face arcs through the duals of open
    edges (the refined dual graph, boundary edges attached to their bounding
    loop faces).
    """
    open_mask = np.asarray(open_mask, dtype=bool)
    if direction == "horizontal":
        a, b = "left", "right"
    elif direction == "vertical":
        a, b = "bottom", "top"
    else:
        raise ValueError(f"bad quad direction {direction!r}")
    if graph == "primal":
        if open_mask.shape != (quad.patch.graph.m,):
            raise ValueError("open mask does not match the patch")
        src = quad.sides[a].vertices
        tgt = quad.sides[b].vertices
        labels = clusters(quad.patch.graph, open_mask).labels
    elif graph == "dual":
        src = quad.dual_side_ids(a)
        tgt = quad.dual_side_ids(b)
        labels = clusters(quad.dual_graph, open_mask).labels
    else:
        raise ValueError(f"bad graph {graph!r}")
    if not src or not tgt:
        raise ValueError("empty quad side")
    return bool(np.isin(labels[np.asarray(src)], labels[np.asarray(tgt)]).any())


def corner_quad(patch: LatticePatch) -> Quad:
    """Quad spanning the whole patch, corners marked nearest the bounding box."""
    xs, ys = patch.coords[:, 0], patch.coords[:, 1]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    marked = tuple(patch.halo_face_nearest(p)
                   for p in ((x0, y0), (x1, y0), (x1, y1), (x0, y1)))
    if len(set(marked)) != 4:
        raise ValueError("patch too small for distinct corner faces")
    return make_quad(patch, marked)


# ---------------------------------------------------------------------------
# annulus circuits


def _face_strictly_inside(center_pc, region) -> bool:
    a, b = center_pc
    ca, cb = region.center
    if isinstance(region, Lozenge):
        return max(abs(a - ca), abs(b - cb)) < region.n
    if isinstance(region, Rectangle):
        return abs(a - ca) < region.n and abs(b - cb) < region.m
    raise TypeError(f"unsupported hole region {region!r}")


def hole_faces(patch: LatticePatch, inner=None) -> list:
    """Interior faces strictly inside the annulus hole (period coordinates)."""
    if inner is None:
        if not isinstance(patch.region, Annulus):
            raise ValueError("patch region is not an annulus")
        inner = patch.region.inner
    if patch.kind == "honeycomb" and isinstance(inner, Rectangle):
        # mirror the rectangle builder's physical box, strictly
        def inside(pc):
            a, b = pc
            ca, cb = inner.center
            x = 2 * (a - ca) + (b - cb)
            return abs(x) < 2 * inner.n and abs(b - cb) < 2 * inner.m
    else:
        def inside(pc):
            return _face_strictly_inside(pc, inner)
    return [f for f, pc in enumerate(patch.face_centers) if inside(pc)]


def _hole_structure(patch: LatticePatch, inner=None):
    # memoized on the patch: samplers evaluate circuits per retained sweep
    key = None if inner is None else inner.token()
    memo = getattr(patch, "_hole_memo", None)
    if memo is None:
        memo = {}
        patch._hole_memo = memo
    if key in memo:
        return memo[key]
    blob = hole_faces(patch, inner)
    if not blob:
        raise ValueError("degenerate annulus: hole contains no face")
    blobset = set(blob)
    inner_edges = np.zeros(patch.graph.m, dtype=bool)
    for eid, (fa, fb) in enumerate(patch.dual.edges):
        if fa in blobset and fb in blobset:
            inner_edges[eid] = True
    verts = sorted({v for f in blob for v in patch.faces[f]})
    if set(verts) & set(patch.boundary):
        raise ValueError("degenerate annulus: hole touches the patch boundary")
    memo[key] = (blob, inner_edges, verts)
    return memo[key]


def annulus_circuit(patch: LatticePatch, open_mask, graph: str = "primal",
                    inner=None) -> bool:
    """Loop around the annulus hole within the open set.

    Primal: a cycle of open edges (none strictly inside the hole)
    surrounding the hole; present exactly when the hole's faces cannot reach
    the outer face through duals of non-open edges. Dual: a dual loop
    crossing only open-set edges; present exactly when the hole's vertices
    cannot reach the patch boundary through complement edges.
    """
    open_mask = np.asarray(open_mask, dtype=bool)
    if open_mask.shape != (patch.graph.m,):
        raise ValueError("open mask does not match the patch")
    blob, inner_edges, verts = _hole_structure(patch, inner)
    if graph == "primal":
        # dual escape may cross anything except the surrounding-loop candidates
        blocked = open_mask & ~inner_edges
        labels = clusters(patch.dual, ~blocked).labels
        return not bool((labels[blob] == labels[patch.outer_face]).any())
    if graph == "dual":
        labels = clusters(patch.graph, ~open_mask).labels
        targets = labels[np.asarray(patch.boundary)]
        return not bool(np.isin(labels[np.asarray(verts)], targets).any())
    raise ValueError(f"bad graph {graph!r}")


# ---------------------------------------------------------------------------
# event specs (the string form used by CLI configs)


@dataclass(frozen=True)
class EventSpec:
    """A crossing or circuit event over a derived edge set."""

    mode: str                   # cross | circuit
    graph: str                  # primal | dual
    kind: EdgeSetKind
    region: object              # Rectangle/Lozenge for cross, Annulus for circuit
    direction: str = ""         # horizontal | vertical for cross

    def token(self) -> str:
        if self.mode == "cross":
            return (f"cross({self.graph}, {self.kind.token()}, "
                    f"{_region_token(self.region)}, {self.direction})")
        return (f"circuit({self.graph}, {self.kind.token()}, "
                f"{_region_token(self.region.inner)}, {_region_token(self.region.outer)})")


def _region_token(region) -> str:
    if isinstance(region, Lozenge) and region.center == (0, 0):
        return f"L({region.n})"
    if isinstance(region, Rectangle) and region.center == (0, 0):
        return f"R({region.n},{region.m})"
    return region.token()


def _parse_region_arg(text: str):
    t = text.strip()
    m = re.fullmatch(r"L\((\d+)\)", t)
    if m:
        return Lozenge(int(m.group(1)))
    m = re.fullmatch(r"R\((\d+)\s*,\s*(\d+)\)", t)
    if m:
        return Rectangle(int(m.group(1)), int(m.group(2)))
    return parse_region(t)


def parse_event(text: str) -> EventSpec:
    """`cross(primal, omega, R(10,1), vertical)` or `circuit(dual, E5, L(2), L(6))`."""
    m = re.fullmatch(r"\s*(cross|circuit)\s*\((.*)\)\s*", text)
    if not m:
        raise ValueError(f"bad event {text!r}")
    mode = m.group(1)
    args = [a.strip() for a in _split_args(m.group(2))]
    if mode == "cross":
        if len(args) != 4:
            raise ValueError("cross takes (graph, set, region, direction)")
        graph, kind, region, direction = args
        if direction not in ("horizontal", "vertical"):
            raise ValueError(f"bad direction {direction!r}")
        return EventSpec("cross", _check_graph(graph), parse_edge_set(kind),
                         _parse_region_arg(region), direction)
    if len(args) != 4:
        raise ValueError("circuit takes (graph, set, inner, outer)")
    graph, kind, inner, outer = args
    region = Annulus(_parse_region_arg(inner), _parse_region_arg(outer))
    return EventSpec("circuit", _check_graph(graph), parse_edge_set(kind), region)


def _check_graph(g: str) -> str:
    if g not in ("primal", "dual"):
        raise ValueError(f"bad graph {g!r}")
    return g


def _split_args(body: str) -> list:
    out, depth, cur = [], 0, []
    for ch in body:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


class EventEvaluator:
    """Bind an event spec to a patch; evaluation is then (h, B, omega) -> bool."""

    def __init__(self, patch: LatticePatch, spec: EventSpec):
        if patch.region != spec.region:
            raise ValueError(
                f"event region {spec.region!r} does not match patch {patch.region!r}")
        self.patch = patch
        self.spec = spec
        self.edges = patch.graph.edge_array()
        if spec.mode == "cross":
            self.quad = corner_quad(patch)
        else:
            _hole_structure(patch)   # fail fast on degenerate annuli

    def __call__(self, h, B, omega) -> bool:
        mask = edge_set(h, B, omega, self.edges, self.spec.kind)
        if self.spec.mode == "cross":
            return quad_crossing(self.quad, mask, self.spec.direction, self.spec.graph)
        return annulus_circuit(self.patch, mask, self.spec.graph)
