from __future__ import annotations

import math

import numpy as np
import pytest

from liplat.lattice import (
    Annulus,
    Lozenge,
    Rectangle,
    Torus,
    bipartition,
    build_patch,
    dot_transform,
    dump_patch,
    graph_distance,
    is_symmetric_quad,
    load_patch,
    make_quad,
    parse_region,
    reflect,
    star_triangle_transform,
)

ALL_KINDS = [
    ("square", Lozenge(3)),
    ("square", Rectangle(4, 2)),
    ("triangular", Lozenge(2)),
    ("honeycomb", Lozenge(2)),
    ("honeycomb", Rectangle(3, 1)),
    ("kagome", Lozenge(2)),
    ("rhombille", Lozenge(2)),
    ("square-octagon", Lozenge(2)),
    ("dotted-honeycomb", Lozenge(2)),
    ("dotted-square", Lozenge(2)),
    ("deltawye-triangular", Lozenge(2)),
    ("deltawye-kagome", Lozenge(2)),
]


@pytest.mark.parametrize("kind,region", ALL_KINDS)
def test_build_connected_planar(kind, region):
    p = build_patch(kind, region)
    g = p.graph
    assert g.is_connected()
    # discs of a planar lattice satisfy V - E + F = 1
    assert g.n - g.m + len(p.faces) == 1
    assert p.dual.m == g.m
    # every boundary vertex meets a crossing edge of the halo
    assert p.boundary == sorted(set(p.boundary))
    for v in p.boundary:
        assert 0 <= v < g.n


@pytest.mark.parametrize(
    "kind,region,n,m,f",
    [
        ("honeycomb", Lozenge(1), 8, 8, 1),
        ("honeycomb", Lozenge(2), 32, 40, 9),
        ("honeycomb", Lozenge(3), 72, 96, 25),
        ("honeycomb", Rectangle(0, 0), 6, 6, 1),
        ("square", Lozenge(3), 49, 84, 36),
        ("triangular", Lozenge(2), 25, 56, 32),
    ],
)
def test_sizes_frozen(kind, region, n, m, f):
    p = build_patch(kind, region)
    assert (p.n, p.graph.m, len(p.faces)) == (n, m, f)


def test_honeycomb_lozenge_grows_quadratically():
    # strict-inside rule gives 8 n^2 vertices
    for n in (1, 2, 3, 4):
        assert build_patch("honeycomb", Lozenge(n)).n == 8 * n * n


def test_bipartite_kinds():
    for kind, region in ALL_KINDS:
        p = build_patch(kind, region)
        if kind in ("triangular", "kagome"):
            assert p.parts is None
        else:
            assert p.parts is not None
            u, v = p.graph.edges[0]
            assert p.parts[u] != p.parts[v]


def test_degree_bounds():
    assert max(build_patch("honeycomb", Lozenge(2)).graph.degree(v) for v in range(32)) == 3
    p = build_patch("square-octagon", Lozenge(2))
    assert max(p.graph.degree(v) for v in range(p.n)) == 3


def test_halo_ring_closed():
    for kind, region in [("honeycomb", Lozenge(2)), ("square", Rectangle(3, 2)),
                         ("rhombille", Lozenge(1)), ("square-octagon", Lozenge(1))]:
        p = build_patch(kind, region)
        ring = p.halo.ring
        assert ring is not None and len(ring) == len(set(ring))
        assert len(p.halo.ring_cross) == len(ring)
        # ring is ccw: positive signed area through the face midpoints
        pts = [p.halo_center_xy(i) for i in ring]
        area = sum(
            pts[t][0] * pts[(t + 1) % len(pts)][1] - pts[(t + 1) % len(pts)][0] * pts[t][1]
            for t in range(len(pts))
        )
        assert area > 0


def test_kagome_has_pinched_boundary():
    # corner faces of the kagome lozenge meet at single vertices, so the
    # bounding dual walk is not a simple cycle; the halo still exists
    p = build_patch("kagome", Lozenge(2))
    assert p.halo.ring is None
    assert len(p.halo.faces) > 0
    assert p.graph.n - p.graph.m + len(p.faces) == 1


def test_torus_square_regular():
    p = build_patch("square", Torus(3))
    assert p.n == 36
    assert all(p.graph.degree(v) == 4 for v in range(p.n))
    assert p.parts is not None
    d = graph_distance(p.graph, 0)
    assert d.max() == 6  # antipode of a 6x6 torus


def test_torus_other_kinds_rejected():
    with pytest.raises(ValueError):
        build_patch("honeycomb", Torus(3))


def test_annulus_builds_outer():
    reg = Annulus(Lozenge(1), Lozenge(3))
    p = build_patch("honeycomb", reg)
    assert p.region == reg
    assert p.n == build_patch("honeycomb", Lozenge(3)).n
    with pytest.raises(ValueError):
        Annulus(Lozenge(3), Lozenge(3))


def test_region_tokens_round_trip():
    for reg in (Lozenge(4), Lozenge(2, (1, -1)), Rectangle(5, 2), Torus(8),
                Annulus(Lozenge(2), Lozenge(6))):
        assert parse_region(reg.token()) == reg


def test_quad_single_hexagon():
    p = build_patch("honeycomb", Rectangle(0, 0))
    ring = p.halo.ring
    assert len(ring) == 6
    ang = {}
    for idx in ring:
        x, y = p.halo_center_xy(idx)
        ang[round(math.degrees(math.atan2(y, x))) % 360] = idx
    q = make_quad(p, (ang[240], ang[0], ang[120], ang[180]))
    assert [len(q.sides[s].dual_faces) for s in ("bottom", "right", "top", "left")] == [3, 3, 2, 2]
    # arcs partition the six crossing edges
    total = sum(len(q.sides[s].crossings) for s in q.sides)
    assert total == 6
    r = reflect(p, "y")
    assert is_symmetric_quad(q, r)
    rx = reflect(p, "x")
    assert not is_symmetric_quad(q, rx)


def test_quad_requires_ccw():
    p = build_patch("square", Rectangle(2, 2))
    ring = p.halo.ring
    cx = [p.halo_center_xy(i) for i in ring]

    def corner(fx, fy):
        t = min(range(len(ring)), key=lambda t: (cx[t][0] - fx) ** 2 + (cx[t][1] - fy) ** 2)
        return ring[t]

    bl, br, tr, tl = corner(-2.5, -2.5), corner(2.5, -2.5), corner(2.5, 2.5), corner(-2.5, 2.5)
    q = make_quad(p, (bl, br, tr, tl))
    assert q.dual_graph.m == p.graph.m
    with pytest.raises(ValueError):
        make_quad(p, (bl, tl, tr, br))  # clockwise
    rd = reflect(p, "diag")
    assert is_symmetric_quad(q, rd)


def test_reflection_symmetries():
    reflect(build_patch("square", Lozenge(3)), "x")
    reflect(build_patch("square", Lozenge(3)), "diag")
    reflect(build_patch("honeycomb", Lozenge(2)), "diag")
    reflect(build_patch("honeycomb", Rectangle(2, 1)), "y")
    with pytest.raises(ValueError):
        reflect(build_patch("triangular", Lozenge(2)), "x")


def test_reflection_is_involution():
    p = build_patch("honeycomb", Rectangle(2, 1))
    r = reflect(p, "y")
    perm = r.vertex_perm
    assert np.array_equal(perm[perm], np.arange(p.n))


def test_dot_transform_matches_template_kind():
    base = build_patch("honeycomb", Lozenge(2))
    g, info = dot_transform(base)
    assert g.n == base.n + base.graph.m
    assert g.m == 2 * base.graph.m
    assert bipartition(g) is not None
    tpl = build_patch("dotted-honeycomb", Lozenge(2))
    # same vertex and edge counts as the directly generated dotted kind is
    # not guaranteed (region rules differ), but both must be subdivisions:
    assert all(g.degree(int(mid)) == 2 for mid in info["midpoint_of_edge"])
    assert all(tpl.graph.degree(v) in (2, 3) for v in range(tpl.n))


def test_star_triangle_transform():
    tri = build_patch("triangular", Lozenge(1))
    ups = []
    for cyc in tri.faces:
        ys = [tri.coords[v][1] for v in cyc]
        if sum(1 for y in ys if abs(y - min(ys)) < 1e-9) == 2:
            ups.append(tuple(cyc))
    # up-triangles cover each edge of the full lattice once; on a finite
    # lozenge the rim edges stay uncovered, so restrict to covered subgraph
    from liplat.lattice import FiniteGraph

    eset = set()
    for a, b, c in ups:
        for u, v in ((a, b), (b, c), (a, c)):
            eset.add((u, v) if u <= v else (v, u))
    sub = FiniteGraph(tri.n, sorted(eset))
    g, info = star_triangle_transform(sub, ups)
    assert g.n == tri.n + len(ups)
    assert g.m == 3 * len(ups)
    with pytest.raises(ValueError):
        star_triangle_transform(sub, ups + [ups[0]])


def test_serialization_round_trip():
    for kind, region in [("honeycomb", Lozenge(2)), ("square", Rectangle(3, 2)),
                         ("kagome", Lozenge(1))]:
        text = dump_patch(build_patch(kind, region))
        p2 = load_patch(text)
        assert dump_patch(p2) == text
        assert text.startswith(f"{kind} {region.token()}\n")


def test_vertex_lookup_and_center():
    p = build_patch("square", Lozenge(2))
    c = p.center_vertex()
    assert np.allclose(p.coords[c], [0.0, 0.0])
    assert p.vertex_at(p.ikeys[5]) == 5
