"""Exact minimum Steiner trees: Dreyfus-Wagner DP and a brute-force validator."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations

from steiner_qubo.graph_io import Edge, Graph

INF = float("inf")
BRUTE_FORCE_MAX_EDGES = 20


class DisconnectedTerminalsError(ValueError):
    pass


def shortest_paths(g: Graph) -> tuple[list[list[float]], list[list[int]]]:
    """All-pairs distances and predecessor tables by one Dijkstra per source.

    Runs on the real edges only; ties go to the smaller predecessor id.
    """
    adj = g.adjacency()
    dist = [[INF] * g.n for _ in range(g.n)]
    pred = [[-1] * g.n for _ in range(g.n)]
    for src in range(g.n):
        d, p = dist[src], pred[src]
        d[src] = 0
        heap = [(0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > d[u]:
                continue
            for v, w in adj[u]:
                nd = du + w
                if nd < d[v] or (nd == d[v] and u < p[v]):
                    if nd < d[v]:
                        heapq.heappush(heap, (nd, v))
                    d[v], p[v] = nd, u
    return dist, pred


def _path_edges(g: Graph, pred: list[list[int]], src: int, dst: int) -> set[Edge]:
    em = g.edge_map()
    out = set()
    v = dst
    while v != src:
        u = pred[src][v]
        key = (min(u, v), max(u, v))
        out.add((*key, em[key]))
        v = u
    return out


@dataclass
class DpTable:
    best: dict[tuple[int, int], int]
    back: dict[tuple[int, int], tuple]
    dist: list[list[float]]


def dreyfus_wagner(g: Graph, table: bool = False):
    """Minimum Steiner tree weight and one optimal edge set.

    ``best[D, v]`` is the cheapest tree spanning terminal subset D plus v.
    Subsets are built from splits at a junction vertex u followed by a
    shortest path u -> v; the last terminal closes the table.  Ties keep
    the first (submask, vertex) in ascending order.
    """
    terms = list(g.terminals)
    m = len(terms)
    if m == 1:
        return (0, set(), None) if table else (0, set())
    dist, pred = shortest_paths(g)
    for t in terms[1:]:
        if dist[terms[0]][t] == INF:
            raise DisconnectedTerminalsError(f"terminal {t} is not reachable from {terms[0]}")

    n = g.n
    q = terms[-1]
    base = terms[:-1]
    k = len(base)
    full = (1 << k) - 1
    best: dict[tuple[int, int], float] = {}
    back: dict[tuple[int, int], tuple] = {}
    for j, t in enumerate(base):
        for v in range(n):
            best[1 << j, v] = dist[t][v]
            back[1 << j, v] = ("path", t)

    masks = sorted(range(1, full + 1), key=lambda s: (bin(s).count("1"), s))
    for mask in masks:
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        split: list[float] = [INF] * n
        split_at: list[int] = [0] * n
        sub = (mask - 1) & mask
        subs = []
        while sub:
            # each unordered split once: the part holding the lowest bit
            if sub & low:
                subs.append(sub)
            sub = (sub - 1) & mask
        subs.sort()
        for u in range(n):
            for d in subs:
                c = best[d, u] + best[mask ^ d, u]
                if c < split[u]:
                    split[u], split_at[u] = c, d
        for v in range(n):
            bu, bc = -1, INF
            for u in range(n):
                c = split[u] + dist[u][v]
                if c < bc:
                    bu, bc = u, c
            best[mask, v] = bc
            back[mask, v] = ("join", bu, split_at[bu])

    def edges_of(mask: int, v: int) -> set[Edge]:
        kind = back[mask, v]
        if kind[0] == "path":
            return _path_edges(g, pred, kind[1], v)
        _, u, d = kind
        return _path_edges(g, pred, u, v) | edges_of(d, u) | edges_of(mask ^ d, u)

    weight = int(best[full, q])
    tree = edges_of(full, q)
    if table:
        return weight, tree, DpTable(best, back, dist)
    return weight, tree


def _spans(n: int, subset, terminals) -> bool:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, _ in subset:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    root = find(terminals[0])
    return all(find(t) == root for t in terminals)


def brute_force(g: Graph) -> tuple[int, set[Edge]]:
    """Cheapest acyclic connected edge subset touching every terminal, by enumeration."""
    if len(g.edges) > BRUTE_FORCE_MAX_EDGES:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_MAX_EDGES} edges, got {len(g.edges)}")
    terms = list(g.terminals)
    if len(terms) == 1:
        return 0, set()
    best_w, best_set = None, None
    for r in range(1, len(g.edges) + 1):
        for subset in combinations(g.edges, r):
            w = sum(e[2] for e in subset)
            if best_w is not None and w >= best_w:
                continue
            if not _spans(g.n, subset, terms):
                continue
            # extra components not touching the terminals would only add weight
            best_w, best_set = w, set(subset)
    if best_w is None:
        raise DisconnectedTerminalsError("terminals are not mutually reachable")
    return best_w, best_set


def is_steiner_tree(g: Graph, edges, terminals=None, root: int | None = None) -> bool:
    """Connected, acyclic, uses real edges, and covers the terminals (and root if given)."""
    terms = list(g.terminals if terminals is None else terminals)
    if root is not None and root not in terms:
        terms.append(root)
    em = g.edge_map()
    edges = list(edges)
    for u, v, w in edges:
        if em.get((min(u, v), max(u, v))) != w:
            return False
    if not edges:
        return len(set(terms)) <= 1
    verts = {u for u, _, _ in edges} | {v for _, v, _ in edges}
    if not set(terms) <= verts:
        return False
    # a tree on V' has |V'| - 1 edges and no cycle
    return len(edges) == len(verts) - 1 and _spans(g.n, edges, sorted(verts))
