"""Problem instances: STP parsing/serialization, padded weight matrices and
solution output (JSON and DOT)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable

import numpy as np

if TYPE_CHECKING:
    from steiner_qubo.decoder import SteinerSolution

DEFAULT_BIG = 10000

Edge = tuple[int, int, int]


class GraphError(ValueError):
    """An instance violates a structural invariant."""


class StpSyntaxError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with an ordered terminal list and a root.

    ``terminals[0]`` is the first target; edges are stored with ``u < v``.
    """

    n: int
    edges: tuple[Edge, ...]
    terminals: tuple[int, ...]
    root: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        norm = []
        seen = set()
        for e in self.edges:
            u, v, w = (int(t) for t in e)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u},{v}) out of range for n={self.n}")
            if w <= 0:
                raise GraphError(f"edge ({u},{v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            norm.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(norm))
        terms = tuple(int(t) for t in self.terminals)
        object.__setattr__(self, "terminals", terms)
        if not terms:
            raise GraphError("no terminals")
        if len(set(terms)) != len(terms):
            raise GraphError("terminals are not distinct")
        if len(terms) > self.n:
            raise GraphError("more terminals than vertices")
        for t in terms:
            if not 0 <= t < self.n:
                raise GraphError(f"terminal {t} out of range for n={self.n}")
        if not 0 <= self.root < self.n:
            raise GraphError(f"root {self.root} out of range for n={self.n}")

    @property
    def m(self) -> int:
        return len(self.terminals)

    @property
    def max_weight(self) -> int:
        return max((w for _, _, w in self.edges), default=0)

    def weight(self, u: int, v: int) -> int | None:
        return self.edge_map().get((min(u, v), max(u, v)))

    def edge_map(self) -> dict[tuple[int, int], int]:
        cached = self.__dict__.get("_edge_map")
        if cached is None:
            cached = {(u, v): w for u, v, w in self.edges}
            object.__setattr__(self, "_edge_map", cached)
        return cached

    def adjacency(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        for row in adj:
            row.sort()
        return adj

    def with_edge(self, u: int, v: int, w: int) -> Graph:
        return Graph(self.n, self.edges + ((u, v, w),), self.terminals, self.root, self.name)


@dataclass(frozen=True)
class WeightMatrix:
    n: int
    entries: np.ndarray = field(repr=False)
    big: int

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return int(self.entries[ij])


def build_weight_matrix(g: Graph, big: int = DEFAULT_BIG) -> WeightMatrix:
    """Dense weights with zero diagonal and ``big`` standing in for missing edges."""
    if big <= g.max_weight:
        raise GraphError(f"big={big} must exceed the maximum edge weight {g.max_weight}")
    a = np.full((g.n, g.n), big, dtype=np.int64)
    np.fill_diagonal(a, 0)
    for u, v, w in g.edges:
        a[u, v] = a[v, u] = w
    a.setflags(write=False)
    return WeightMatrix(g.n, a, big)


def _ints(fields: list[str], count: int, lineno: int) -> list[int]:
    if len(fields) != count + 1:
        raise StpSyntaxError(lineno, f"expected {count} arguments to {fields[0]!r}")
    try:
        return [int(f) for f in fields[1:]]
    except ValueError:
        raise StpSyntaxError(lineno, f"non-integer argument to {fields[0]!r}") from None


def parse_stp(text: str | Iterable[str]) -> Graph:
    """Parse the line-oriented STP subset (Graph, Terminals, optional Comment)."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    n = None
    n_edges = None
    n_terms = None
    edges: list[Edge] = []
    terms: list[int] = []
    root = 0
    name = ""
    section = None
    seen_sections = set()
    seen_eof = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if seen_eof:
            raise StpSyntaxError(lineno, "content after EOF")
        fields = line.split()
        key = fields[0].upper()

        if section is None:
            if key == "EOF":
                seen_eof = True
            elif key == "SECTION" and len(fields) == 2:
                section = fields[1].capitalize()
                if section not in ("Graph", "Terminals", "Comment"):
                    raise StpSyntaxError(lineno, f"unknown section {fields[1]!r}")
                if section in seen_sections:
                    raise StpSyntaxError(lineno, f"repeated section {section}")
                seen_sections.add(section)
            else:
                raise StpSyntaxError(lineno, f"expected SECTION or EOF, got {fields[0]!r}")
            continue

        if key == "END":
            if section == "Graph" and n_edges is not None and n_edges != len(edges):
                raise StpSyntaxError(lineno, f"Edges declares {n_edges}, found {len(edges)}")
            if section == "Terminals" and n_terms is not None and n_terms != len(terms):
                raise StpSyntaxError(lineno, f"Terminals declares {n_terms}, found {len(terms)}")
            section = None
        elif section == "Comment":
            if key == "NAME":
                name = line.split(None, 1)[1].strip().strip('"') if len(fields) > 1 else ""
        elif section == "Graph":
            if key == "NODES":
                (n,) = _ints(fields, 1, lineno)
                if n < 1:
                    raise StpSyntaxError(lineno, "Nodes must be positive")
            elif key == "EDGES":
                (n_edges,) = _ints(fields, 1, lineno)
            elif key == "E":
                if n is None:
                    raise StpSyntaxError(lineno, "edge before Nodes")
                u, v, w = _ints(fields, 3, lineno)
                if u == v:
                    raise StpSyntaxError(lineno, f"self-loop at vertex {u}")
                if not (0 <= u < n and 0 <= v < n):
                    raise StpSyntaxError(lineno, f"edge ({u},{v}) out of range")
                if w <= 0:
                    raise StpSyntaxError(lineno, f"weight {w} must be positive")
                if any({u, v} == {a, b} for a, b, _ in edges):
                    raise StpSyntaxError(lineno, f"duplicate edge ({u},{v})")
                edges.append((u, v, w))
            else:
                raise StpSyntaxError(lineno, f"unexpected {fields[0]!r} in Graph section")
        elif section == "Terminals":
            if key == "TERMINALS":
                (n_terms,) = _ints(fields, 1, lineno)
            elif key in ("T", "ROOT"):
                (v,) = _ints(fields, 1, lineno)
                if n is None:
                    raise StpSyntaxError(lineno, "Terminals section before Graph section")
                if not 0 <= v < n:
                    raise StpSyntaxError(lineno, f"vertex {v} out of range")
                if key == "T":
                    if v in terms:
                        raise StpSyntaxError(lineno, f"duplicate terminal {v}")
                    terms.append(v)
                else:
                    root = v
            else:
                raise StpSyntaxError(lineno, f"unexpected {fields[0]!r} in Terminals section")

    last = len(lines)
    if section is not None:
        raise StpSyntaxError(last, f"section {section} not closed")
    if n is None:
        raise StpSyntaxError(last, "no Graph section")
    if not terms:
        raise GraphError("no terminals")
    return Graph(n, tuple(edges), tuple(terms), root, name)


def serialize_stp(g: Graph) -> str:
    out = []
    if g.name:
        out += ["SECTION Comment", f'Name "{g.name}"', "END", ""]
    out += ["SECTION Graph", f"Nodes {g.n}", f"Edges {len(g.edges)}"]
    out += [f"E {u} {v} {w}" for u, v, w in g.edges]
    out += ["END", "", "SECTION Terminals", f"Terminals {g.m}"]
    out += [f"T {t}" for t in g.terminals]
    out += [f"Root {g.root}", "END", "", "EOF", ""]
    return "\n".join(out)


def solution_record(sol: SteinerSolution, g: Graph, run_info: dict[str, Any] | None = None) -> dict[str, Any]:
    info = dict(run_info or {})
    return {
        "instance": g.name,
        "n": g.n,
        "m": g.m,
        "tree_edges": [list(e) for e in sorted(sol.tree_edges)],
        "tree_weight": sol.tree_weight,
        "feasible": sol.feasible,
        "is_tree": sol.is_tree,
        "violations": dict(sol.violations),
        "invalid_hops": [list(h) for h in sol.invalid_hops],
        "energy": sol.energy,
        "objective_energy": sol.objective_energy,
        "penalty_energy": sol.penalty_energy,
        "paths": {str(k): [list(p) for p in path] for k, path in sol.paths.items()},
        "reads": info.pop("reads", None),
        "sweeps": info.pop("sweeps", None),
        "seed": info.pop("seed", None),
        **info,
    }


def emit_solution(sol: SteinerSolution, fmt: str = "json", *, graph: Graph, run_info: dict[str, Any] | None = None) -> str:
    """Render a decoded solution as JSON or as a Graphviz DOT document."""
    if fmt == "json":
        return json.dumps(solution_record(sol, graph, run_info), indent=2) + "\n"
    if fmt != "dot":
        raise ValueError(f"unknown format {fmt!r}")
    tree = {(u, v) for u, v, _ in sol.tree_edges}
    terms = set(graph.terminals)
    title = graph.name or "steiner"
    lines = [f'graph "{title}" {{', "  node [shape=circle];"]
    for v in range(graph.n):
        attrs = ["shape=doublecircle"] if v in terms else []
        if v == graph.root:
            attrs.append('xlabel="root"')
        lines.append(f"  {v}" + (f" [{', '.join(attrs)}];" if attrs else ";"))
    for u, v, w in graph.edges:
        style = 'style=bold, penwidth=3' if (u, v) in tree else 'color=gray'
        lines.append(f'  {u} -- {v} [label="{w}", {style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
