"""Whitehead moves on dual complexes and the certified reduction of a
simple complex to the split prism.

A Whitehead move removes a dual edge AB flanked by triangles ABX and
ABY and inserts the edge XY, replacing those triangles with AXY and
BXY.  The reduction grows the outer polygon around a fixed apex node
one vertex per episode until only two interior nodes remain, checking
after every single move that no prismatic 3-circuit appeared.
"""

from __future__ import annotations

import json
import random as _random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import catalog, complexes
from .complexes import DualComplex


class WhiteheadError(ValueError):
    pass


class EdgeMissing(WhiteheadError):
    pass


class TargetEdgeExists(WhiteheadError):
    pass


class NotFlankedByTwoTriangles(WhiteheadError):
    pass


class IsPrism(WhiteheadError):
    pass


class TooSmall(WhiteheadError):
    pass


class InternalInvariantBroken(RuntimeError):
    pass


@dataclass(frozen=True)
class WhiteheadMove:
    removed_edge: Tuple[int, int]
    inserted_edge: Tuple[int, int]

    def inverse(self) -> "WhiteheadMove":
        return WhiteheadMove(self.inserted_edge, self.removed_edge)


def _flank_apexes(dc: DualComplex, a: int, b: int) -> Tuple[int, int]:
    lo, hi = (a, b) if a < b else (b, a)
    if (lo, hi) not in set(dc.edges):
        raise EdgeMissing(f"no dual edge {{{lo},{hi}}}")
    flanks = dc.edge_triangles(lo, hi)
    if len(flanks) != 2:
        raise NotFlankedByTwoTriangles(
            f"edge {{{lo},{hi}}} lies on {len(flanks)} triangles")
    apexes = [next(v for v in t if v not in (lo, hi)) for t in flanks]
    if apexes[0] == apexes[1]:
        raise NotFlankedByTwoTriangles(
            f"edge {{{lo},{hi}}} has a repeated flanking apex")
    return min(apexes), max(apexes)


def move_on(dc: DualComplex, a: int, b: int) -> WhiteheadMove:
    """The Whitehead move removing dual edge {a,b} of this complex."""
    x, y = _flank_apexes(dc, a, b)
    lo, hi = (a, b) if a < b else (b, a)
    return WhiteheadMove((lo, hi), (x, y))


def apply_move(dc: DualComplex, move: WhiteheadMove) -> DualComplex:
    a, b = move.removed_edge
    x, y = _flank_apexes(dc, a, b)
    if (min(x, y), max(x, y)) != tuple(sorted(move.inserted_edge)):
        raise EdgeMissing(
            f"move inserts {move.inserted_edge} but flanks give {{{x},{y}}}")
    if (x, y) in set(dc.edges):
        raise TargetEdgeExists(f"dual edge {{{x},{y}}} already present")
    drop = {tuple(sorted((a, b, x))), tuple(sorted((a, b, y)))}
    add = [tuple(sorted((a, x, y))), tuple(sorted((b, x, y)))]
    tris = [t for t in dc.triangles if t not in drop] + add
    return DualComplex(node_count=dc.node_count, triangles=tuple(sorted(tris)))


def new_3cycles(dc: DualComplex, move: WhiteheadMove) -> List[Tuple[int, int, int]]:
    """The 3-cycles present after the move but not before.

    Every new 3-cycle uses the inserted edge, so these are the common
    neighbors of its endpoints in the moved complex.
    """
    after = apply_move(dc, move)
    x, y = move.inserted_edge
    adj = after.adjacency()
    return sorted(tuple(sorted((x, y, v))) for v in adj[x] & adj[y])


@dataclass(frozen=True)
class OuterPolygonView:
    """The dual complex seen from a fixed apex node.

    polygon is the apex's link in canonical rotation (lowest node
    first, toward its smaller neighbor).  components[v] lists, for each
    interior node v, the maximal arcs of polygon nodes in v's link,
    each ordered along the polygon.
    """

    v_infty: int
    polygon: Tuple[int, ...]
    interior: Tuple[int, ...]
    components: Dict[int, Tuple[Tuple[int, ...], ...]]
    endpoints: Tuple[int, ...]


def outer_view(dc: DualComplex, v_infty: Optional[int] = None) -> OuterPolygonView:
    n = dc.node_count
    if n <= 7:
        raise TooSmall(f"{n} faces, need more than 7")
    adj = dc.adjacency()
    if v_infty is None:
        v_infty = max(range(n), key=lambda v: (len(adj[v]), -v))

    link = complexes._link_cycles(dc)[v_infty]
    if len(link) == n - 2:
        raise IsPrism("outer polygon has length N-2")

    # Canonical rotation of the polygon.
    start = link.index(min(link))
    link = link[start:] + link[:start]
    if link[-1] < link[1]:
        link = [link[0]] + link[1:][::-1]
    polygon = tuple(link)
    on_p = set(polygon)
    pos = {v: i for i, v in enumerate(polygon)}
    k = len(polygon)

    interior = tuple(v for v in range(n) if v != v_infty and v not in on_p)
    interior_set = set(interior)

    links = complexes._link_cycles(dc)
    components: Dict[int, Tuple[Tuple[int, ...], ...]] = {}
    for v in interior:
        cyc = links[v]
        m = len(cyc)
        runs: List[List[int]] = []
        if all(u in on_p for u in cyc):
            raise InternalInvariantBroken(
                "interior node with link entirely on the polygon")
        # Start the scan at a non-polygon link node so runs do not wrap.
        s = next(i for i, u in enumerate(cyc) if u not in on_p)
        cur: List[int] = []
        for i in range(m):
            u = cyc[(s + i) % m]
            if u in on_p:
                cur.append(u)
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        arcs = []
        for run in runs:
            idx = {pos[u] for u in run}
            if len(idx) == k:
                raise InternalInvariantBroken(
                    "link component covers the whole polygon")
            head = next(i for i in idx if (i - 1) % k not in idx)
            arc = [polygon[(head + j) % k] for j in range(len(run))]
            if set(arc) != set(run):
                raise InternalInvariantBroken(
                    "link component is not a polygon arc")
            arcs.append(tuple(arc))
        arcs.sort(key=lambda a: pos[a[0]])
        components[v] = tuple(arcs)

    endpoints = tuple(v for v in interior
                      if sum(1 for u in adj[v] if u in interior_set) == 1)
    for v in endpoints:
        comps = components[v]
        if len(comps) != 1 or len(comps[0]) < 3:
            raise InternalInvariantBroken(
                f"endpoint {v} connected to the polygon in {comps}")
    return OuterPolygonView(v_infty, polygon, interior, components, endpoints)


@dataclass(frozen=True)
class ReductionTrace:
    start: DualComplex
    moves: Tuple[WhiteheadMove, ...]
    witnesses: Tuple[int, ...]  # prismatic 3-circuit count after each move
    end: DualComplex


def _certify_step(after: DualComplex) -> int:
    """Independent simplicity count on the primal; must be zero."""
    circuits = complexes.prismatic_circuits(complexes.primal(after), 3)
    if circuits:
        raise InternalInvariantBroken(
            f"move created prismatic 3-circuits {circuits}")
    return 0


class _Reducer:
    def __init__(self, dc: DualComplex):
        self.current = dc
        self.moves: List[WhiteheadMove] = []
        self.witnesses: List[int] = []
        self.seen = {dc.triangles}

    def do(self, a: int, b: int) -> WhiteheadMove:
        move = move_on(self.current, a, b)
        cycles = new_3cycles(self.current, move)
        after = apply_move(self.current, move)
        tri = after.triangle_set
        if any(c not in tri for c in cycles):
            raise InternalInvariantBroken(
                f"move {move} created a non-facial 3-cycle")
        self.witnesses.append(_certify_step(after))
        if after.triangles in self.seen:
            raise InternalInvariantBroken("reduction revisited a complex")
        self.seen.add(after.triangles)
        self.moves.append(move)
        self.current = after
        return move


def _trim_component(red: _Reducer, v_infty: int, a: int,
                    arc: Sequence[int], keep: int) -> None:
    """Whitehead moves removing a's connections to the arc's tail until
    only the first `keep` nodes remain, trimming from the far end."""
    arc = list(arc)
    while len(arc) > keep:
        red.do(a, arc[-1])
        arc.pop()


def _strip_other_components(red: _Reducer, v_infty: int, a: int,
                            kept: set) -> None:
    """Remove a's connections to every polygon component disjoint from
    `kept`; a stays connected to at least two polygon nodes in kept."""
    while True:
        view = outer_view(red.current, v_infty)
        target = next((arc for arc in view.components[a]
                       if not (set(arc) & kept)), None)
        if target is None:
            return
        if len(target) > 2:
            _trim_component(red, v_infty, a, target, 2)
        elif len(target) == 2:
            red.do(a, target[1])
        else:
            red.do(a, target[0])


def _grow_episode(red: _Reducer, v_infty: int) -> None:
    """One episode: Whitehead moves that lengthen the outer polygon by
    exactly one, dispatching on the three shapes the interior can take."""
    view = outer_view(red.current, v_infty)
    k = len(view.polygon)

    wide = [v for v in view.interior if v not in view.endpoints
            and any(len(arc) >= 2 for arc in view.components[v])]
    if wide:
        a = min(wide)
        arc = next(arc for arc in view.components[a] if len(arc) >= 2)
        _trim_component(red, v_infty, a, arc, 2)
        _strip_other_components(red, v_infty, a, set(arc[:2]))
        red.do(arc[0], arc[1])
    elif any(len(view.components[v][0]) > 3 for v in view.endpoints):
        # Borrow one connection from the endpoint for its interior
        # neighbor, which then has a two-node component.
        a = min(v for v in view.endpoints if len(view.components[v][0]) > 3)
        arc = view.components[a][0]
        red.do(a, arc[-1])
        _grow_episode(red, v_infty)
        return
    else:
        _case3(red, v_infty, view)

    after = outer_view(red.current, v_infty)
    if len(after.polygon) != k + 1:
        raise InternalInvariantBroken("episode did not lengthen the polygon")


def _case3(red: _Reducer, v_infty: int, view: OuterPolygonView) -> None:
    """Endpoints all touch exactly three polygon nodes and every other
    interior node touches the polygon in single nodes only.  Walk the
    chain from an endpoint to the first branching interior node and
    rotate the whole chain past the polygon."""
    adj = red.current.adjacency()
    interior_set = set(view.interior)
    if not view.endpoints:
        raise InternalInvariantBroken("no endpoint in a branching interior")
    i1 = min(view.endpoints)
    arc = view.components[i1][0]
    p2 = arc[1]
    p1, p3 = (arc[0], arc[2]) if arc[0] < arc[2] else (arc[2], arc[0])

    chain = [i1]
    prev, cur = None, i1
    while True:
        nbrs = [u for u in adj[cur] if u in interior_set and u != prev]
        if cur != i1 and len([u for u in adj[cur] if u in interior_set]) > 2:
            break
        if len(nbrs) != 1:
            raise InternalInvariantBroken(
                "interior graph is a segment; complex should be a prism")
        prev, cur = cur, nbrs[0]
        chain.append(cur)
    im = chain[-1]

    _strip_other_components(red, v_infty, im, {p1, p3})
    red.do(im, p3)
    for ik in chain[-2::-1]:
        red.do(ik, p1)
    red.do(p1, p2)


def reduce_to_dn(dc: DualComplex) -> ReductionTrace:
    """Reduce a simple non-prism complex with more than 7 faces to the
    split prism by Whitehead moves, never passing through a complex
    with a prismatic 3-circuit."""
    n = dc.node_count
    view = outer_view(dc)  # raises TooSmall / IsPrism
    if complexes.prismatic_circuits(complexes.primal(dc), 3):
        raise WhiteheadError("complex is not simple")
    v_infty = view.v_infty

    red = _Reducer(dc)
    while len(outer_view(red.current, v_infty).polygon) < n - 3:
        _grow_episode(red, v_infty)

    # Exactly two interior nodes remain, both endpoints; shrink the one
    # with the smaller polygon contact down to three nodes.
    view = outer_view(red.current, v_infty)
    if sorted(view.interior) != sorted(view.endpoints):
        raise InternalInvariantBroken("final interior nodes are not endpoints")
    a = min(view.interior,
            key=lambda v: (len(view.components[v][0]), v))
    arc = view.components[a][0]
    _trim_component(red, v_infty, a, arc, 3)

    end = red.current
    if complexes.isomorphic(end, catalog.split_prism_dual(n)) is None:
        raise InternalInvariantBroken("reduction did not end at the split prism")
    return ReductionTrace(dc, tuple(red.moves), tuple(red.witnesses), end)


def replay(trace: ReductionTrace) -> DualComplex:
    """Re-run a trace from its start, verifying the recorded end."""
    cur = trace.start
    for move in trace.moves:
        cur = apply_move(cur, move)
    if cur.triangles != trace.end.triangles:
        raise WhiteheadError("trace does not replay to its recorded end")
    return cur


def random_simple(n: int, seed: int, moves: int = 20) -> DualComplex:
    """A random simple complex with n faces, reached from the split
    prism by Whitehead moves that keep every intermediate simple."""
    if n < 8:
        raise TooSmall(f"{n} faces, need at least 8")
    rng = _random.Random(seed)
    cur = catalog.split_prism_dual(n)
    accepted = 0
    attempts = 0
    while accepted < moves and attempts < 200 * (moves + 1):
        attempts += 1
        a, b = rng.choice(cur.edges)
        try:
            move = move_on(cur, a, b)
            after = apply_move(cur, move)
        except WhiteheadError:
            continue
        if complexes.prismatic_circuits(complexes.primal(after), 3):
            continue
        cur = after
        accepted += 1
    return cur


def trace_to_json(trace: ReductionTrace) -> str:
    return json.dumps({
        "start": complexes.dual_to_json_dict(trace.start),
        "moves": [{"remove": list(m.removed_edge), "insert": list(m.inserted_edge)}
                  for m in trace.moves],
        "end": complexes.dual_to_json_dict(trace.end),
    })


def trace_from_json(text: str) -> ReductionTrace:
    data = json.loads(text)
    start = complexes.dual_from_json_dict(data["start"])
    end = complexes.dual_from_json_dict(data["end"])
    moves = tuple(WhiteheadMove(tuple(m["remove"]), tuple(m["insert"]))
                  for m in data["moves"])
    witnesses = (0,) * len(moves)
    return ReductionTrace(start, moves, witnesses, end)
