"""Cell-complex validation, duality, and circuit enumeration."""

import json

import pytest

from andreev import catalog, complexes, whitehead
from conftest import brute_prismatic


class TestBuild:
    def test_tetrahedron_counts(self):
        ap = catalog.tetrahedron()
        assert (ap.face_count, ap.edge_count, ap.vertex_count) == (4, 6, 4)

    def test_dodecahedron_counts(self):
        ap = catalog.dodecahedron()
        assert (ap.face_count, ap.edge_count, ap.vertex_count) == (12, 30, 20)

    def test_repeated_face_rejected(self):
        cube = catalog.cube()
        faces = list(cube.faces) + [cube.faces[0]]
        with pytest.raises(complexes.ComplexError):
            complexes.build(cube.vertex_count, faces)

    def test_tiny_face_rejected(self):
        with pytest.raises(complexes.ComplexError):
            complexes.build(2, [[0, 1], [1, 0]])

    def test_nontrivalent_rejected(self):
        # square pyramid: apex has degree 4
        faces = [[0, 1, 2, 3], [0, 4, 1], [1, 4, 2], [2, 4, 3], [3, 4, 0]]
        with pytest.raises(complexes.NotTrivalent):
            complexes.build(5, faces)

    def test_counting_identities(self, corpus):
        for ap in corpus:
            assert ap.edge_count == 3 * (ap.face_count - 2)
            assert 3 * ap.vertex_count == 2 * ap.edge_count
            assert ap.face_count - ap.edge_count + ap.vertex_count == 2


class TestDual:
    def test_cube_is_octahedral(self):
        dc = complexes.dual(catalog.cube())
        assert len(dc.adjacency()) == 6
        assert len(dc.triangles) == 8

    def test_dodecahedron_is_icosahedral(self):
        dc = complexes.dual(catalog.dodecahedron())
        assert len(dc.adjacency()) == 12
        assert len(dc.triangles) == 20
        assert all(len(dc.adjacency()[v]) == 5 for v in dc.adjacency())

    def test_triangular_prism_dual_counts(self):
        dc = complexes.dual(catalog.prism(5))
        assert len(dc.adjacency()) == 5
        assert len(dc.triangles) == 6
        assert len(dc.edges) == 9

    def test_round_trip(self, corpus):
        for ap in corpus:
            back = complexes.primal(complexes.dual(ap))
            assert complexes.isomorphic(complexes.dual(back),
                                        complexes.dual(ap)) is not None


class TestCircuits:
    def test_dodecahedron_has_none(self):
        assert complexes.prismatic_circuits(catalog.dodecahedron(), 3) == []

    def test_triangular_prism_has_one(self):
        found = complexes.prismatic_circuits(catalog.prism(5), 3)
        assert len(found) == 1
        (u0, v0, _, _) = catalog.prism(5).edges[found[0].crossed_edges[0]]
        assert u0 != v0

    def test_alternately_truncated_cube_has_four(self):
        found = complexes.prismatic_circuits(
            catalog.alternately_truncated_cube(), 3)
        assert len(found) == 4
        crossed = set()
        for c in found:
            crossed.update(c.crossed_edges)
        assert len(crossed) == 12  # the twelve original cube edges

    def test_matches_brute_force(self, corpus):
        for ap in corpus:
            for k in (3, 4):
                ours = {(tuple(c.dual_nodes), tuple(c.crossed_edges))
                        for c in complexes.prismatic_circuits(ap, k)}
                oracle = set()
                for cyc, crossed in brute_prismatic(ap, k):
                    oracle.add((cyc, crossed))
                normalized = set()
                for nodes, crossed in ours:
                    rot = min(nodes[i:] + nodes[:i] for i in range(k))
                    rev = tuple(reversed(rot))
                    rot2 = min(rev[i:] + rev[:i] for i in range(k))
                    normalized.add(min(rot, rot2))
                assert normalized == {c for c, _ in oracle}, ap.name

    def test_non_prismatic_3cycles_meet_at_vertex(self, corpus):
        # any dual 3-cycle that fails the distinct-endpoint test bounds
        # a triangle: its three crossed edges share a vertex
        for ap in corpus:
            dc = complexes.dual(ap)
            prisms = {tuple(sorted(c.dual_nodes))
                      for c in complexes.prismatic_circuits(ap, 3)}
            adj = dc.adjacency()
            for a in adj:
                for b in adj[a]:
                    for c in adj[b]:
                        if c <= b or b <= a or a not in adj[c]:
                            continue
                        if (a, b, c) in prisms:
                            continue
                        crossed = [ap.edge_between_faces(x, y)
                                   for x, y in ((a, b), (b, c), (a, c))]
                        shared = set(ap.edges[crossed[0]][:2])
                        for e in crossed[1:]:
                            shared &= set(ap.edges[e][:2])
                        assert len(shared) == 1


def test_separating_4cycles(corpus):
    # every non-prismatic simple 4-cycle of the dual of a simple complex
    # cuts off exactly two vertices
    for ap in corpus:
        if not complexes.is_simple(ap):
            continue
        prismatic = {c for c, _ in brute_prismatic(ap, 4)}
        dc = complexes.dual(ap)
        adj = dc.adjacency()
        seen = set()
        for a in adj:
            for b in adj[a]:
                for c in adj[b]:
                    if c == a:
                        continue
                    for d in adj[c]:
                        if d in (a, b) or a not in adj[d]:
                            continue
                        cyc = (a, b, c, d)
                        rot = min(cyc[i:] + cyc[:i] for i in range(4))
                        rev = tuple(reversed(rot))
                        rot2 = min(rev[i:] + rev[:i] for i in range(4))
                        key = min(rot, rot2)
                        if key in seen or key in prismatic:
                            continue
                        seen.add(key)
                        # drop chords: simple cycles only
                        if c in adj[a] or d in adj[b]:
                            continue
                        crossed = {ap.edge_between_faces(cyc[i], cyc[(i + 1) % 4])
                                   for i in range(4)}
                        parts = _components_without(ap, crossed)
                        assert len(parts) == 2
                        assert min(len(p) for p in parts) == 2, ap.name


def _components_without(ap, dropped):
    remaining = {}
    for e, (u, v, _, _) in enumerate(ap.edges):
        if e in dropped:
            continue
        remaining.setdefault(u, []).append(v)
        remaining.setdefault(v, []).append(u)
    unseen = set(range(ap.vertex_count))
    parts = []
    while unseen:
        stack = [unseen.pop()]
        comp = set(stack)
        while stack:
            x = stack.pop()
            for y in remaining.get(x, ()):
                if y not in comp:
                    comp.add(y)
                    unseen.discard(y)
                    stack.append(y)
        parts.append(comp)
    return parts


def test_is_simple_flags():
    assert complexes.is_simple(catalog.tetrahedron())
    assert complexes.is_simple(catalog.dodecahedron())
    assert not complexes.is_simple(catalog.prism(5))
    assert not complexes.is_simple(catalog.truncated_tetrahedron())


def test_quadrilateral_contexts():
    assert len(complexes.quadrilateral_contexts(catalog.cube())) == 6
    assert len(complexes.quadrilateral_contexts(catalog.prism(5))) == 3
    assert complexes.quadrilateral_contexts(catalog.dodecahedron()) == []
    for f, boundary, entering in complexes.quadrilateral_contexts(catalog.cube()):
        assert len(boundary) == 4 and len(entering) == 4
        assert len(set(boundary) | set(entering)) == 8


class TestCollapseEdge:
    def test_cube_collapse(self):
        con = complexes.collapse_edge(catalog.cube(), 0)
        assert con.vertex_count == 7
        incidence = [0] * con.vertex_count
        for cycle in con.faces:
            for v in cycle:
                incidence[v] += 1
        assert sorted(incidence) == [3, 3, 3, 3, 3, 3, 4]
        assert incidence[con.merged_vertex] == 4
        assert len(con.surrounding_edges) == 4
        assert len(set(con.surrounding_faces)) == 4

    def test_dodecahedron_collapse(self):
        con = complexes.collapse_edge(catalog.dodecahedron(), 0)
        assert con.vertex_count == 19
        quads = sum(1 for f in con.faces if len(f) == 4)
        assert quads == 2

    def test_prism_refused(self):
        with pytest.raises(complexes.NotSimple):
            complexes.collapse_edge(catalog.prism(5), 0)


class TestIsomorphic:
    def test_relabeled_cube(self):
        cube = catalog.cube()
        perm = [3, 0, 4, 1, 6, 2, 7, 5]
        faces = [[perm[v] for v in f] for f in cube.faces]
        other = complexes.build(8, faces)
        assert complexes.isomorphic(complexes.dual(cube),
                                    complexes.dual(other)) is not None

    def test_cube_is_the_six_face_prism(self):
        # both are combinatorial Pr_6; only the labels differ
        assert complexes.isomorphic(
            complexes.dual(catalog.cube()),
            complexes.dual(catalog.prism(6))) is not None

    def test_different_sizes(self):
        assert complexes.isomorphic(
            complexes.dual(catalog.tetrahedron()),
            complexes.dual(catalog.cube())) is None

    def test_same_size_different_type(self):
        d8 = catalog.split_prism_dual(8)
        pr8 = complexes.dual(catalog.prism(8))
        assert complexes.isomorphic(d8, pr8) is None


def test_json_round_trip():
    ap = catalog.truncated_tetrahedron()
    again = complexes.from_json(complexes.to_json(ap))
    assert again.faces == ap.faces
    assert again.vertex_count == ap.vertex_count

    circuits = complexes.prismatic_circuits(catalog.prism(5), 3)
    data = json.loads(complexes.circuits_to_json(circuits))
    assert data[0]["kind"] == "prismatic3"
    assert len(data[0]["crossed_edges"]) == 3


def test_random_simple_is_simple():
    for seed in range(5):
        dc = whitehead.random_simple(10, seed=seed)
        ap = complexes.primal(dc)
        assert complexes.is_simple(ap)
        assert ap.face_count == 10
