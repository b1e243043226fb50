import math

import numpy as np
import pytest

from andreev import catalog, complexes


def brute_prismatic(ap, k):
    """Independent circuit oracle: enumerate every simple k-cycle of the
    dual by DFS and keep those whose crossed primal edges have pairwise
    distinct endpoints."""
    dc = complexes.dual(ap)
    adj = dc.adjacency()
    n = len(adj)
    cycles = set()
    for start in range(n):
        stack = [(start, (start,))]
        while stack:
            node, path = stack.pop()
            for nxt in adj[node]:
                if nxt == start and len(path) == k:
                    rot = min(path[i:] + path[:i] for i in range(k))
                    rev = tuple(reversed(rot))
                    rot2 = min(rev[i:] + rev[:i] for i in range(k))
                    cycles.add(min(rot, rot2))
                elif nxt not in path and len(path) < k:
                    stack.append((nxt, path + (nxt,)))
    out = []
    for cyc in sorted(cycles):
        crossed = []
        for i in range(k):
            a, b = cyc[i], cyc[(i + 1) % k]
            crossed.append(ap.edge_between_faces(a, b))
        ends = []
        for e in crossed:
            u, v = ap.edges[e][0], ap.edges[e][1]
            ends += [u, v]
        if len(set(ends)) == 2 * k:
            out.append((cyc, tuple(crossed)))
    return out


def gram_residual(r, target):
    """Max violation of the unit-norm and edge-angle equations."""
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    V = np.array(r.normals)
    G = V @ eta @ V.T
    worst = max(abs(G[i, i] - 1.0) for i in range(len(V)))
    for e, (_, _, fa, fb) in enumerate(r.complex.edges):
        worst = max(worst, abs(G[fa, fb] + math.cos(float(target[e]) * math.pi)))
    return worst


@pytest.fixture(scope="session")
def corpus():
    return catalog.corpus()
