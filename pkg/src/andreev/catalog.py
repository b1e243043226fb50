"""Named complexes used throughout the tests and examples."""

from __future__ import annotations

from typing import Iterable, List, Tuple

from . import complexes
from .complexes import AbstractPolyhedron, DualComplex, build, primal


def tetrahedron() -> AbstractPolyhedron:
    return build(4, [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)], name="tetrahedron")


def cube() -> AbstractPolyhedron:
    faces = [
        (0, 3, 2, 1),
        (4, 5, 6, 7),
        (0, 1, 5, 4),
        (1, 2, 6, 5),
        (2, 3, 7, 6),
        (3, 0, 4, 7),
    ]
    return build(8, faces, name="cube")


def prism(n: int) -> AbstractPolyhedron:
    """The prism with n faces: two (n-2)-gons and n-2 side quadrilaterals."""
    if n < 5:
        raise ValueError("a prism needs at least 5 faces")
    k = n - 2
    bottom = tuple(range(k - 1, -1, -1))
    top = tuple(range(k, 2 * k))
    sides = [(i, (i + 1) % k, k + (i + 1) % k, k + i) for i in range(k)]
    return build(2 * k, [bottom, top] + sides, name=f"prism_{n}")


def dodecahedron() -> AbstractPolyhedron:
    # Built as the primal of the icosahedral triangulation.
    u = [1 + i for i in range(5)]
    lo = [6 + i for i in range(5)]
    tris = []
    for i in range(5):
        j = (i + 1) % 5
        tris.append(tuple(sorted((0, u[i], u[j]))))
        tris.append(tuple(sorted((u[i], u[j], lo[i]))))
        tris.append(tuple(sorted((lo[i], lo[j], u[j]))))
        tris.append(tuple(sorted((11, lo[i], lo[j]))))
    dc = DualComplex(node_count=12, triangles=tuple(sorted(tris)))
    ap = primal(dc, name="dodecahedron")
    assert ap.face_count == 12 and ap.vertex_count == 20
    return ap


def truncate_vertices(ap: AbstractPolyhedron, cut: Iterable[int], name: str) -> AbstractPolyhedron:
    """Cut the listed vertices, each becoming a triangular face whose
    corners sit on the former incident edges."""
    cut = set(cut)
    next_id = ap.vertex_count
    corner = {}  # (cut vertex, incident edge) -> new vertex id
    for v in sorted(cut):
        for e in ap.vertex_edges(v):
            corner[(v, e)] = next_id
            next_id += 1

    faces: List[Tuple[int, ...]] = []
    for cycle in ap.faces:
        new: List[int] = []
        n = len(cycle)
        for i, v in enumerate(cycle):
            if v not in cut:
                new.append(v)
                continue
            a = cycle[(i - 1) % n]
            b = cycle[(i + 1) % n]
            new.append(corner[(v, ap.edge_index(a, v))])
            new.append(corner[(v, ap.edge_index(v, b))])
        faces.append(tuple(new))

    for v in sorted(cut):
        # Follow the directed corner-to-corner arcs contributed by the
        # surrounding faces, reversed, to orient the new triangle.
        step = {}
        for f in ap.vertex_faces(v):
            cycle = ap.faces[f]
            i = cycle.index(v)
            a = cycle[(i - 1) % len(cycle)]
            b = cycle[(i + 1) % len(cycle)]
            e_in = corner[(v, ap.edge_index(a, v))]
            e_out = corner[(v, ap.edge_index(v, b))]
            step[e_out] = e_in
        start = min(step)
        tri = [start, step[start], step[step[start]]]
        faces.append(tuple(tri))

    used = sorted({v for f in faces for v in f})
    relabel = {v: i for i, v in enumerate(used)}
    faces = [tuple(relabel[v] for v in f) for f in faces]
    return build(len(used), faces, name=name)


def truncated_tetrahedron() -> AbstractPolyhedron:
    return truncate_vertices(tetrahedron(), range(4), "truncated_tetrahedron")


def alternately_truncated_cube() -> AbstractPolyhedron:
    return truncate_vertices(cube(), (0, 2, 5, 7), "alternately_truncated_cube")


def corner_truncated_cube() -> AbstractPolyhedron:
    return truncate_vertices(cube(), (0,), "corner_truncated_cube")


def corner_doubled_cube() -> AbstractPolyhedron:
    """Two corner-truncated cubes glued across their triangles: a nine-faced
    complex whose three hexagons form an essential prismatic 3-circuit."""
    faces = [
        (2, 1, 0, 7, 8, 9),
        (0, 4, 3, 10, 11, 7),
        (3, 6, 2, 9, 13, 10),
        (3, 4, 5, 6),
        (0, 1, 5, 4),
        (1, 2, 6, 5),
        (13, 12, 11, 10),
        (11, 12, 8, 7),
        (12, 13, 9, 8),
    ]
    return build(14, faces, name="corner_doubled_cube")


def split_prism_dual(n: int) -> DualComplex:
    """Dual of the split prism with n faces, n >= 8.

    Node 0 is the apex of maximal degree, nodes 1..n-3 its link, node n-2
    the interior node joined to three consecutive link nodes, node n-1 the
    other interior node.
    """
    if n < 8:
        raise ValueError("split prism needs more than 7 faces")
    k = n - 3
    i1, i2 = k + 1, k + 2
    ring = lambda i: 1 + (i - 1) % k
    tris = [tuple(sorted((0, ring(i), ring(i + 1)))) for i in range(1, k + 1)]
    tris += [
        tuple(sorted((i1, 1, 2))),
        tuple(sorted((i1, 2, 3))),
        tuple(sorted((i1, i2, 1))),
        tuple(sorted((i1, i2, 3))),
    ]
    tris += [tuple(sorted((i2, ring(j), ring(j + 1)))) for j in range(3, k + 1)]
    return DualComplex(node_count=n, triangles=tuple(sorted(set(tris))))


def split_prism(n: int) -> AbstractPolyhedron:
    return primal(split_prism_dual(n), name=f"split_prism_{n}")


def corpus() -> List[AbstractPolyhedron]:
    """The standing test corpus."""
    out = [tetrahedron(), cube()]
    out += [prism(n) for n in range(5, 11)]
    out += [dodecahedron(), truncated_tetrahedron(), alternately_truncated_cube()]
    return out
