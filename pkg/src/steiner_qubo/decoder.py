"""Turn sampled bit vectors back into per-target paths and a candidate tree."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import networkx as nx
import numpy as np

from steiner_qubo.graph_io import DEFAULT_BIG, Edge, Graph, build_weight_matrix
from steiner_qubo.oracle import is_steiner_tree
from steiner_qubo.qubo.builders import DEFAULT_LAMBDA
from steiner_qubo.qubo.index import VarIndex
from steiner_qubo.qubo.model import PENALTY_LABELS


@dataclass(frozen=True)
class SteinerSolution:
    paths: dict[int, list[tuple[int, int]]]
    tree_edges: frozenset[Edge]
    tree_weight: int
    objective_energy: int
    penalty_energy: int
    violations: dict[str, int]
    feasible: bool
    penalty_values: dict[str, int] = field(default_factory=dict)
    invalid_hops: tuple[tuple[int, int, int, int], ...] = ()
    is_tree: bool = False
    pruned: bool = False

    @property
    def energy(self) -> int:
        return self.objective_energy + self.penalty_energy


def _layers(x: np.ndarray, idx: VarIndex) -> np.ndarray:
    return np.asarray(x[: idx.num_path_vars], dtype=np.int64).reshape(idx.m, idx.layers, idx.n)


def constraint_report(x, idx: VarIndex, g: Graph) -> tuple[dict[str, int], dict[str, int]]:
    """Per-constraint (penalty value, violation count), computed straight from the bits."""
    x = np.asarray(x, dtype=np.int64)
    X = _layers(x, idx)
    S = idx.steps
    occ = X.sum(axis=2)
    terminals = set(g.terminals)
    pen: dict[str, int] = {}
    cnt: dict[str, int] = {}

    first = int(X[0, 0, g.root])
    pen["H1"] = (1 - first) ** 2
    cnt["H1"] = 1 - first

    ends = np.array([X[k, S, t] for k, t in enumerate(idx.targets)])
    pen["H2"] = int(((1 - ends) ** 2).sum())
    cnt["H2"] = int((ends == 0).sum())

    pen["H3"] = int((occ * occ - occ).sum())
    cnt["H3"] = int((occ > 1).sum())

    pen["H4"] = int((occ[:, :-1] - occ[:, :-1] * occ[:, 1:]).sum())
    cnt["H4"] = int(((occ[:, :-1] > 0) & (occ[:, 1:] == 0)).sum())

    free = [i for i in range(idx.n) if i not in terminals]
    dwell = (X[:, :-1, free] * X[:, 1:, free]).sum() if free else 0
    pen["H5"] = cnt["H5"] = int(dwell)

    h6 = bad = 0
    for k, kp in idx.pairs:
        for s in range(idx.layers):
            for i in range(idx.n):
                z, a, b = x[idx.aux(k, kp, s, i)], X[k, s, i], X[kp, s, i]
                h6 += a * b - 2 * a * z - 2 * b * z + 3 * z
                bad += int(z != a * b)
    for k in range(1, idx.m):
        o = sum(
            x[idx.aux(k, kp, s, i)]
            for kp in range(idx.m)
            if kp != k
            for s in range(idx.layers)
            for i in range(idx.n)
        )
        y = sum(x[idx.slack(k, b)] << b for b in range(idx.slack_bits_per_target))
        r = int(o - y - 1)
        h6 += r * r
        bad += int(r != 0)
    pen["H6"] = int(h6)
    cnt["H6"] = bad
    return pen, cnt


def objective_value(x, idx: VarIndex, g: Graph, big: int = DEFAULT_BIG) -> int:
    w = build_weight_matrix(g, big).entries
    X = _layers(np.asarray(x), idx)
    return int(sum(X[k, s] @ w @ X[k, s + 1] for k in range(idx.m) for s in range(idx.steps)))


def decode(
    x,
    idx: VarIndex,
    g: Graph,
    *,
    lam: int = DEFAULT_LAMBDA,
    big: int = DEFAULT_BIG,
) -> SteinerSolution:
    """Best-effort decode; defects are reported in the result, never raised.

    A step holding several vertices is read as its lowest vertex; moves
    along non-edges are listed in ``invalid_hops`` and left out of the tree.
    """
    x = np.asarray(x)
    if x.shape != (idx.num_vars,):
        raise ValueError(f"bit vector has shape {x.shape}, index expects {idx.num_vars}")
    X = _layers(x, idx)
    em = g.edge_map()
    paths: dict[int, list[tuple[int, int]]] = {}
    tree: set[Edge] = set()
    hops = []
    for k, t in enumerate(idx.targets):
        path = []
        for s in range(idx.layers):
            hit = np.flatnonzero(X[k, s])
            if hit.size:
                path.append((s, int(hit[0])))
        for (s, i), (s2, j) in zip(path, path[1:]):
            if s2 != s + 1 or i == j:
                continue
            key = (min(i, j), max(i, j))
            if key in em:
                tree.add((*key, em[key]))
            else:
                hops.append((k, s, i, j))
        paths[t] = path

    pen, cnt = constraint_report(x, idx, g)
    penalty = lam * sum(pen.values())
    sol = SteinerSolution(
        paths=paths,
        tree_edges=frozenset(tree),
        tree_weight=sum(e[2] for e in tree),
        objective_energy=objective_value(x, idx, g, big),
        penalty_energy=penalty,
        violations={lb: cnt[lb] for lb in PENALTY_LABELS},
        feasible=all(c == 0 for c in cnt.values()),
        penalty_values={lb: pen[lb] for lb in PENALTY_LABELS},
        invalid_hops=tuple(hops),
    )
    return replace(sol, is_tree=verify_feasible(sol, g))


def verify_feasible(sol: SteinerSolution, g: Graph) -> bool:
    """Graph-side check of the decoded tree, independent of any energy."""
    if sol.invalid_hops:
        return False
    return is_steiner_tree(g, sol.tree_edges, g.terminals, g.root)


def prune(sol: SteinerSolution, g: Graph) -> SteinerSolution:
    """Optional repair: spanning tree of the decoded edges with non-terminal leaves stripped.

    Not part of the QUBO method itself; results are flagged ``pruned``.
    """
    h = nx.Graph()
    h.add_weighted_edges_from(sol.tree_edges)
    keep = set(g.terminals) | {g.root}
    t = nx.minimum_spanning_tree(h) if h.number_of_edges() else h
    changed = True
    while changed:
        changed = False
        for v in [v for v in t.nodes if t.degree(v) <= 1 and v not in keep]:
            t.remove_node(v)
            changed = True
    edges = frozenset((min(u, v), max(u, v), d["weight"]) for u, v, d in t.edges(data=True))
    out = replace(sol, tree_edges=edges, tree_weight=sum(e[2] for e in edges), pruned=True)
    return replace(out, is_tree=verify_feasible(out, g))


def encode_paths(paths: Sequence[Sequence[int | None]], idx: VarIndex) -> np.ndarray:
    """Bit vector for an explicit path family.

    ``paths[k][s]`` is the vertex of target position k at step s (None for
    an empty step).  Overlap indicators are set to the products they stand
    for and each slack to ``overlaps - 1`` when that is representable.
    """
    if len(paths) != idx.m:
        raise ValueError(f"expected {idx.m} paths, got {len(paths)}")
    x = np.zeros(idx.num_vars, dtype=np.int8)
    for k, path in enumerate(paths):
        if len(path) != idx.layers:
            raise ValueError(f"path {k} has {len(path)} steps, expected {idx.layers}")
        for s, v in enumerate(path):
            if v is not None:
                x[idx.x(k, s, v)] = 1
    for k, kp in idx.pairs:
        for s in range(idx.layers):
            v = paths[k][s]
            if v is not None and paths[kp][s] == v:
                x[idx.aux(k, kp, s, v)] = 1
    for k in range(1, idx.m):
        overlaps = sum(
            1 for kp in range(idx.m) if kp != k for s in range(idx.layers)
            if paths[k][s] is not None and paths[kp][s] == paths[k][s]
        )
        y = max(overlaps - 1, 0)
        if y > idx.max_slack():
            raise ValueError(f"slack {y} for target {k} does not fit in {idx.slack_bits_per_target} bits")
        for b in range(idx.slack_bits_per_target):
            x[idx.slack(k, b)] = (y >> b) & 1
    return x


def complete_auxiliaries(x, idx: VarIndex) -> np.ndarray:
    """Copy of ``x`` with overlap indicators and slacks made consistent with its path bits.

    Slacks are clipped to their representable range.
    """
    x = np.array(x, dtype=np.int8)
    X = _layers(x, idx)
    for k, kp in idx.pairs:
        for s in range(idx.layers):
            for i in range(idx.n):
                x[idx.aux(k, kp, s, i)] = X[k, s, i] * X[kp, s, i]
    for k in range(1, idx.m):
        o = int(sum((X[k] * X[kp]).sum() for kp in range(idx.m) if kp != k))
        y = min(max(o - 1, 0), idx.max_slack())
        for b in range(idx.slack_bits_per_target):
            x[idx.slack(k, b)] = (y >> b) & 1
    return x
