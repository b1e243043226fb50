"""Abstract polyhedra: trivalent cell complexes on the sphere.

An abstract polyhedron is given by its faces, each a cyclic vertex list
oriented counterclockwise as seen from outside the sphere.  Validation
enforces the incidence axioms (trivalence, edges on exactly two faces,
faces meeting in at most one edge or vertex, Euler relation) and derives
the edge list and the dual triangulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple


class ComplexError(ValueError):
    """Base class for cell-complex validation failures."""


class NotTrivalent(ComplexError):
    pass


class EdgeNotInTwoFaces(ComplexError):
    pass


class FacesMeetTwice(ComplexError):
    pass


class FaceTooSmall(ComplexError):
    pass


class EulerViolation(ComplexError):
    pass


class NotSimple(ComplexError):
    pass


class EdgeOnTriangle(ComplexError):
    pass


@dataclass(frozen=True)
class Circuit:
    """A prismatic k-circuit of the dual complex.

    dual_nodes is the cyclic node sequence in canonical rotation
    (lowest node first, then the smaller neighbor).  crossed_edges are
    the primal edge indices crossed by the circuit, in circuit order.
    """

    kind: str
    dual_nodes: Tuple[int, ...]
    crossed_edges: Tuple[int, ...]


@dataclass(frozen=True)
class AbstractPolyhedron:
    vertex_count: int
    faces: Tuple[Tuple[int, ...], ...]
    # edges[i] = (u, v, face_a, face_b) with u < v, lexicographic by (u, v)
    edges: Tuple[Tuple[int, int, int, int], ...]
    name: str = "complex"

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_index(self, u: int, v: int) -> int:
        return self._edge_lookup[(u, v) if u < v else (v, u)]

    @cached_property
    def _edge_lookup(self) -> Dict[Tuple[int, int], int]:
        return {(u, v): i for i, (u, v, _, _) in enumerate(self.edges)}

    def edge_between_faces(self, a: int, b: int) -> Optional[int]:
        """Index of the primal edge shared by faces a and b, if any."""
        key = (a, b) if a < b else (b, a)
        return self._face_pair_edges.get(key)

    @cached_property
    def _face_pair_edges(self) -> Dict[Tuple[int, int], int]:
        out: Dict[Tuple[int, int], int] = {}
        for i, (_, _, fa, fb) in enumerate(self.edges):
            out[(fa, fb) if fa < fb else (fb, fa)] = i
        return out

    def vertex_edges(self, v: int) -> Tuple[int, ...]:
        """Indices of the three edges incident to vertex v, ascending."""
        return self._vertex_edges[v]

    @cached_property
    def _vertex_edges(self) -> Tuple[Tuple[int, ...], ...]:
        incident: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for i, (u, v, _, _) in enumerate(self.edges):
            incident[u].append(i)
            incident[v].append(i)
        return tuple(tuple(sorted(e)) for e in incident)

    def vertex_faces(self, v: int) -> Tuple[int, ...]:
        """The three faces meeting at v, ascending."""
        return self._vertex_faces[v]

    @cached_property
    def _vertex_faces(self) -> Tuple[Tuple[int, ...], ...]:
        around: List[set] = [set() for _ in range(self.vertex_count)]
        for f, cycle in enumerate(self.faces):
            for v in cycle:
                around[v].add(f)
        return tuple(tuple(sorted(s)) for s in around)

    def face_edge_cycle(self, f: int) -> Tuple[int, ...]:
        """Edge indices along the boundary of face f, in face order.

        Entry i is the edge between faces[f][i] and faces[f][i+1].
        """
        cycle = self.faces[f]
        n = len(cycle)
        return tuple(self.edge_index(cycle[i], cycle[(i + 1) % n]) for i in range(n))


@dataclass(frozen=True)
class DualComplex:
    """Simplicial triangulation dual to an abstract polyhedron.

    Nodes are the faces of the primal, triangles its vertices.  Edges are
    derived node pairs; when built from a primal they carry its edge index.
    """

    node_count: int
    triangles: Tuple[Tuple[int, int, int], ...]  # each sorted ascending

    def __post_init__(self):
        seen = set()
        for t in self.triangles:
            if len(set(t)) != 3 or tuple(sorted(t)) != tuple(t):
                raise ComplexError("triangles must be sorted triples of distinct nodes")
            if t in seen:
                raise ComplexError("repeated triangle")
            seen.add(t)
            for x in t:
                if not 0 <= x < self.node_count:
                    raise ComplexError("triangle node out of range")

    @cached_property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        es = set()
        for a, b, c in self.triangles:
            es.update({(a, b), (a, c), (b, c)})
        return tuple(sorted(es))

    def adjacency(self) -> Dict[int, set]:
        adj: Dict[int, set] = {i: set() for i in range(self.node_count)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    @property
    def triangle_set(self) -> FrozenSet[Tuple[int, int, int]]:
        return frozenset(self.triangles)

    def edge_triangles(self, a: int, b: int) -> List[Tuple[int, int, int]]:
        return [t for t in self.triangles if a in t and b in t]


def build(vertex_count: int, faces: Sequence[Sequence[int]], name: str = "complex") -> AbstractPolyhedron:
    """Validate the incidence axioms and return the derived complex.

    Faces must be cyclic vertex lists oriented consistently (each edge
    traversed once in each direction across the two incident faces).
    """
    faces_t = tuple(tuple(int(v) for v in f) for f in faces)
    n_faces = len(faces_t)
    if n_faces <= 3:
        raise EulerViolation(f"need at least 4 faces, got {n_faces}")
    for f, cycle in enumerate(faces_t):
        if len(cycle) < 3:
            raise FaceTooSmall(f"face {f} has {len(cycle)} edges")
        if len(set(cycle)) != len(cycle):
            raise FacesMeetTwice(f"face {f} repeats a vertex")
        for v in cycle:
            if not 0 <= v < vertex_count:
                raise ComplexError(f"face {f} references vertex {v} out of range")

    # Directed edge sweep.  Each undirected edge must be traversed exactly
    # once in each direction, which also certifies consistent orientation.
    directed: Dict[Tuple[int, int], int] = {}
    for f, cycle in enumerate(faces_t):
        n = len(cycle)
        for i in range(n):
            u, v = cycle[i], cycle[(i + 1) % n]
            if (u, v) in directed:
                raise EdgeNotInTwoFaces(
                    f"directed edge {u}->{v} appears in faces {directed[(u, v)]} and {f}")
            directed[(u, v)] = f

    edge_faces: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for (u, v), f in directed.items():
        if u < v:
            if (v, u) not in directed:
                raise EdgeNotInTwoFaces(f"edge {{{u},{v}}} traversed only one way")
            edge_faces[(u, v)] = (f, directed[(v, u)])

    edges = tuple((u, v, fa, fb) for (u, v), (fa, fb) in sorted(edge_faces.items()))

    # Trivalence: every vertex on exactly 3 edges and 3 faces.
    degree = [0] * vertex_count
    for u, v, _, _ in edges:
        degree[u] += 1
        degree[v] += 1
    for v, d in enumerate(degree):
        if d != 3:
            raise NotTrivalent(f"vertex {v} has degree {d}")

    face_sets = [frozenset(c) for c in faces_t]
    shared_edge = {}
    for (u, v), (fa, fb) in edge_faces.items():
        key = (fa, fb) if fa < fb else (fb, fa)
        if key in shared_edge:
            raise FacesMeetTwice(f"faces {key[0]} and {key[1]} share two edges")
        if fa == fb:
            raise FacesMeetTwice(f"face {fa} meets itself along edge {{{u},{v}}}")
        shared_edge[key] = (u, v)
    for a in range(n_faces):
        for b in range(a + 1, n_faces):
            common = face_sets[a] & face_sets[b]
            if len(common) >= 2:
                uv = shared_edge.get((a, b))
                if uv is None or set(uv) != common:
                    raise FacesMeetTwice(
                        f"faces {a} and {b} meet in more than one edge or vertex")

    n_edges = len(edges)
    if vertex_count - n_edges + n_faces != 2:
        raise EulerViolation(
            f"V-E+F = {vertex_count}-{n_edges}+{n_faces} != 2")
    if n_edges != 3 * (n_faces - 2):
        raise EulerViolation(f"E = {n_edges} != 3(N-2) = {3 * (n_faces - 2)}")

    # Dual (face-adjacency) graph must be connected for a sphere complex.
    adj: Dict[int, set] = {i: set() for i in range(n_faces)}
    for _, _, fa, fb in edges:
        adj[fa].add(fb)
        adj[fb].add(fa)
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != n_faces:
        raise EulerViolation("face adjacency graph is disconnected")

    return AbstractPolyhedron(vertex_count=vertex_count, faces=faces_t, edges=edges, name=name)


def dual(ap: AbstractPolyhedron) -> DualComplex:
    """Dual triangulation: one node per face, one triangle per vertex."""
    triangles = tuple(sorted(ap.vertex_faces(v) for v in range(ap.vertex_count)))
    dc = DualComplex(node_count=ap.face_count, triangles=triangles)
    if len(dc.edges) != ap.edge_count:
        raise ComplexError("dual edge count mismatch")
    return dc


def _link_cycles(dc: DualComplex) -> Dict[int, List[int]]:
    """Unoriented link cycle of every node: neighbors in rotation order."""
    adj = dc.adjacency()
    tri = dc.triangle_set
    cycles = {}
    for a in range(dc.node_count):
        nbrs = sorted(adj[a])
        if len(nbrs) < 3:
            raise ComplexError(f"dual node {a} has degree {len(nbrs)}")
        partner: Dict[int, List[int]] = {x: [] for x in nbrs}
        for x in nbrs:
            for y in nbrs:
                if x < y and tuple(sorted((a, x, y))) in tri:
                    partner[x].append(y)
                    partner[y].append(x)
        for x in nbrs:
            if len(partner[x]) != 2:
                raise ComplexError(f"link of node {a} is not a cycle at {x}")
        cycle = [nbrs[0], partner[nbrs[0]][0]]
        while len(cycle) < len(nbrs):
            prev, cur = cycle[-2], cycle[-1]
            nxt = partner[cur][0] if partner[cur][0] != prev else partner[cur][1]
            cycle.append(nxt)
        if partner[cycle[-1]][0] != cycle[0] and partner[cycle[-1]][1] != cycle[0]:
            raise ComplexError(f"link of node {a} does not close up")
        cycles[a] = cycle
    return cycles


def _oriented_rotation(dc: DualComplex) -> Dict[int, List[int]]:
    """Globally consistent rotation system (link cycles with one orientation).

    Triangle orientations are propagated from triangle 0 across shared
    edges, then each node's link cycle is ordered by the successor rule
    of its oriented triangles.
    """
    tri = list(dc.triangles)
    by_edge: Dict[Tuple[int, int], List[int]] = {}
    for i, (a, b, c) in enumerate(tri):
        for e in ((a, b), (a, c), (b, c)):
            by_edge.setdefault(e, []).append(i)
    for e, ts in by_edge.items():
        if len(ts) != 2:
            raise ComplexError(f"dual edge {e} lies on {len(ts)} triangles")

    orient: Dict[int, Tuple[int, int, int]] = {0: tri[0]}
    stack = [0]
    while stack:
        i = stack.pop()
        a, b, c = orient[i]
        for u, v in ((a, b), (b, c), (c, a)):
            e = (u, v) if u < v else (v, u)
            j = by_edge[e][0] if by_edge[e][0] != i else by_edge[e][1]
            if j in orient:
                continue
            w = next(x for x in tri[j] if x not in (u, v))
            orient[j] = (v, u, w)  # shared edge reversed in the neighbor
            stack.append(j)
    if len(orient) != len(tri):
        raise ComplexError("triangle adjacency graph is disconnected")

    succ: Dict[int, Dict[int, int]] = {n: {} for n in range(dc.node_count)}
    for a, b, c in orient.values():
        succ[a][b] = c
        succ[b][c] = a
        succ[c][a] = b
    rotation = {}
    for n in range(dc.node_count):
        start = min(succ[n])
        cycle = [start]
        while True:
            nxt = succ[n][cycle[-1]]
            if nxt == start:
                break
            cycle.append(nxt)
            if len(cycle) > len(succ[n]):
                raise ComplexError(f"rotation at node {n} does not close up")
        if len(cycle) != len(succ[n]):
            raise ComplexError(f"rotation at node {n} misses neighbors")
        rotation[n] = cycle
    return rotation


def primal(dc: DualComplex, name: str = "complex") -> AbstractPolyhedron:
    """Reconstruct the abstract polyhedron whose dual is dc.

    Primal vertices are the dual triangles, numbered by lexicographic
    order of their sorted node triples.  Faces are the rotation cycles.
    """
    rotation = _oriented_rotation(dc)
    tri_ids = {t: i for i, t in enumerate(sorted(dc.triangle_set))}
    faces = []
    for n in range(dc.node_count):
        cyc = rotation[n]
        k = len(cyc)
        face = tuple(
            tri_ids[tuple(sorted((n, cyc[i], cyc[(i + 1) % k])))] for i in range(k))
        faces.append(face)
    try:
        return build(len(tri_ids), faces, name=name)
    except EdgeNotInTwoFaces:
        # The propagated orientation may be globally mirrored; flip it.
        return build(len(tri_ids), [f[::-1] for f in faces], name=name)


def _simple_cycles(dc: DualComplex, k: int) -> List[Tuple[int, ...]]:
    """All simple k-cycles of the dual graph, canonical and sorted, k in {3,4}."""
    adj = dc.adjacency()
    found = set()
    nodes = range(dc.node_count)
    if k == 3:
        for a in nodes:
            for b in adj[a]:
                if b <= a:
                    continue
                for c in adj[b]:
                    if c > b and c in adj[a]:
                        found.add((a, b, c))
    elif k == 4:
        import itertools
        for quad in itertools.combinations(nodes, 4):
            a, b, c, d = quad
            for order in ((a, b, c, d), (a, b, d, c), (a, c, b, d)):
                ok = all(order[(i + 1) % 4] in adj[order[i]] for i in range(4))
                if ok:
                    found.add(_canonical_cycle(order))
    else:
        raise ValueError("k must be 3 or 4")
    return sorted(found, key=lambda c: tuple(sorted(c)))


def _canonical_cycle(cycle: Tuple[int, ...]) -> Tuple[int, ...]:
    """Rotate and reflect so the cycle starts at its minimum node and the
    second entry is the smaller of that node's two cycle neighbors."""
    n = len(cycle)
    i = cycle.index(min(cycle))
    fwd = tuple(cycle[(i + j) % n] for j in range(n))
    rev = tuple(cycle[(i - j) % n] for j in range(n))
    return fwd if fwd[1] <= rev[1] else rev


def prismatic_circuits(ap: AbstractPolyhedron, k: int) -> List[Circuit]:
    """Prismatic k-circuits: k-cycles of the dual whose crossed primal
    edges have pairwise distinct endpoints (2k vertices in all)."""
    dc = dual(ap)
    out = []
    for cycle in _simple_cycles(dc, k):
        crossed = []
        for i in range(k):
            e = ap.edge_between_faces(cycle[i], cycle[(i + 1) % k])
            if e is None:
                break
            crossed.append(e)
        else:
            ends = set()
            for e in crossed:
                u, v, _, _ = ap.edges[e]
                ends.update((u, v))
            if len(ends) == 2 * k:
                out.append(Circuit(kind=f"prismatic{k}",
                                   dual_nodes=_canonical_cycle(cycle),
                                   crossed_edges=tuple(crossed)))
    return out


def is_simple(ap: AbstractPolyhedron) -> bool:
    return not prismatic_circuits(ap, 3)


def quadrilateral_contexts(ap: AbstractPolyhedron):
    """Per 4-sided face: (face, boundary edges e1..e4, entering edges
    e12, e23, e34, e41).  The entering edge e_{i,i+1} is the third edge
    at the vertex shared by boundary edges e_i and e_{i+1}."""
    out = []
    for f, cycle in enumerate(ap.faces):
        if len(cycle) != 4:
            continue
        boundary = list(ap.face_edge_cycle(f))
        entering = []
        for i in range(4):
            corner = cycle[(i + 1) % 4]  # shared by boundary[i], boundary[i+1]
            third = [e for e in ap.vertex_edges(corner)
                     if e not in (boundary[i], boundary[(i + 1) % 4])]
            entering.append(third[0])
        out.append((f, tuple(boundary), tuple(entering)))
    return out


@dataclass(frozen=True)
class ContractedComplex:
    """Result of collapsing an edge: one 4-valent vertex, with the four
    surrounding edges and faces recorded in cyclic order."""

    vertex_count: int
    faces: Tuple[Tuple[int, ...], ...]
    merged_vertex: int
    surrounding_edges: Tuple[int, int, int, int]   # original edge indices
    surrounding_faces: Tuple[int, int, int, int]


def collapse_edge(ap: AbstractPolyhedron, edge: int) -> ContractedComplex:
    if not is_simple(ap):
        raise NotSimple("edge collapse requires a simple complex")
    u, v, fa, fb = ap.edges[edge]
    for f in set(ap.vertex_faces(u)) | set(ap.vertex_faces(v)):
        if len(ap.faces[f]) == 3:
            raise EdgeOnTriangle(f"face {f} incident to edge {edge} is a triangle")

    fu = next(f for f in ap.vertex_faces(u) if f not in (fa, fb))
    fv = next(f for f in ap.vertex_faces(v) if f not in (fa, fb))
    e1 = next(e for e in ap.vertex_edges(u) if e != edge and fa in ap.edges[e][2:])
    e2 = next(e for e in ap.vertex_edges(u) if e != edge and e != e1)
    e3 = next(e for e in ap.vertex_edges(v) if e != edge and fb in ap.edges[e][2:])
    e4 = next(e for e in ap.vertex_edges(v) if e != edge and e != e3)
    # Cyclic order around the merged vertex: e1 (on fa), e2, e3 (on fb), e4,
    # with faces fa, fu, fb, fv between consecutive edges.
    surrounding = (e1, e2, e3, e4)
    around = (fa, fu, fb, fv)

    keep, drop = (u, v) if u < v else (v, u)
    faces = []
    for cycle in ap.faces:
        new = []
        for w in cycle:
            w2 = keep if w == drop else w
            if new and new[-1] == w2:
                continue
            new.append(w2)
        if new[0] == new[-1]:
            new.pop()
        new = [w - 1 if w > drop else w for w in new]
        faces.append(tuple(new))
    merged = keep if keep < drop else keep - 1
    return ContractedComplex(
        vertex_count=ap.vertex_count - 1,
        faces=tuple(faces),
        merged_vertex=merged,
        surrounding_edges=surrounding,
        surrounding_faces=around,
    )


def _canonical_form(dc: DualComplex):
    """Canonical trace of the rotation system, with the labeling achieving
    it.  Two duals are isomorphic iff their traces are equal."""
    rotation = _oriented_rotation(dc)
    n = dc.node_count
    best = None
    best_labels = None
    for chirality in (1, -1):
        rot = {a: (cyc if chirality == 1 else cyc[::-1]) for a, cyc in rotation.items()}
        pos = {a: {x: i for i, x in enumerate(cyc)} for a, cyc in rot.items()}
        for a in range(n):
            for v0 in rot[a]:
                labels = {a: 0}
                order = [a]
                entry = {a: v0}
                trace = []
                for cur in order:
                    cyc = rot[cur]
                    i0 = pos[cur][entry[cur]]
                    ring = [cyc[(i0 + j) % len(cyc)] for j in range(len(cyc))]
                    row = []
                    for x in ring:
                        if x not in labels:
                            labels[x] = len(labels)
                            order.append(x)
                            entry[x] = cur
                        row.append(labels[x])
                    trace.append(tuple(row))
                key = tuple(trace)
                if best is None or key < best:
                    best = key
                    best_labels = dict(labels)
    return best, best_labels


def isomorphic(a, b) -> Optional[Dict[int, int]]:
    """Incidence-preserving relabeling between two complexes, or None.

    Accepts abstract polyhedra or dual complexes; the returned map is on
    dual nodes, which for primal inputs means faces.
    """
    da = a if isinstance(a, DualComplex) else dual(a)
    db = b if isinstance(b, DualComplex) else dual(b)
    if da.node_count != db.node_count or len(da.triangles) != len(db.triangles):
        return None
    ta, la = _canonical_form(da)
    tb, lb = _canonical_form(db)
    if ta != tb:
        return None
    inv_b = {lab: node for node, lab in lb.items()}
    return {node: inv_b[lab] for node, lab in la.items()}


# JSON interfaces

def to_json(ap: AbstractPolyhedron) -> str:
    return json.dumps(
        {"name": ap.name, "vertex_count": ap.vertex_count,
         "faces": [list(f) for f in ap.faces]},
        indent=2) + "\n"


def from_json(text: str) -> AbstractPolyhedron:
    data = json.loads(text)
    return build(int(data["vertex_count"]), data["faces"],
                 name=str(data.get("name", "complex")))


def circuits_to_json(circuits: Sequence[Circuit]) -> str:
    return json.dumps(
        [{"kind": c.kind, "dual_nodes": list(c.dual_nodes),
          "crossed_edges": list(c.crossed_edges)} for c in circuits],
        indent=2) + "\n"


def dual_to_json_dict(dc: DualComplex) -> dict:
    return {"node_count": dc.node_count, "triangles": [list(t) for t in dc.triangles]}


def dual_from_json_dict(data: dict) -> DualComplex:
    return DualComplex(node_count=int(data["node_count"]),
                       triangles=tuple(tuple(sorted(t)) for t in data["triangles"]))
