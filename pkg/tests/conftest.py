from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from steiner_qubo.graph_io import Graph
from steiner_qubo.oracle import shortest_paths


def random_connected_graph(rng: random.Random, n: int, max_edges: int, m: int, wmax: int = 20) -> Graph:
    """Random spanning tree plus extra edges; terminals[0] is vertex 0 and the root."""
    order = list(range(n))
    rng.shuffle(order)
    edges = {}
    for a in range(1, n):
        u, v = order[a], order[rng.randrange(a)]
        edges[(min(u, v), max(u, v))] = rng.randint(1, wmax)
    rest = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    rng.shuffle(rest)
    for u, v in rest[: max(0, max_edges - len(edges))]:
        edges[(u, v)] = rng.randint(1, wmax)
    terms = [0] + rng.sample(range(1, n), m - 1)
    return Graph(n, tuple((u, v, w) for (u, v), w in sorted(edges.items())), tuple(terms), 0)


@st.composite
def graphs(draw, max_n: int = 6, max_edges: int = 12, max_m: int = 4, min_m: int = 1):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(min(min_m, n), min(max_m, n)))
    seed = draw(st.integers(0, 2**32 - 1))
    extra = draw(st.integers(n - 1, max(n - 1, min(max_edges, n * (n - 1) // 2))))
    return random_connected_graph(random.Random(seed), n, extra, m)


def shortest_route(g: Graph, src: int, dst: int) -> list[int]:
    _, pred = shortest_paths(g)
    route = [dst]
    while route[-1] != src:
        route.append(pred[src][route[-1]])
    return route[::-1]


def random_feasible_family(g: Graph, steps: int, rng: random.Random) -> list[list[int | None]]:
    """Path family satisfying every constraint.

    The first path walks root -> first terminal and waits there; every later
    path appears on a cell already used by an earlier path, walks a shortest
    route to its terminal and waits.
    """
    layers = steps + 1
    family: list[list[int | None]] = []
    first = shortest_route(g, g.root, g.terminals[0])
    assert len(first) <= layers
    family.append(first + [first[-1]] * (layers - len(first)))
    for t in g.terminals[1:]:
        options = []
        for path in family:
            for s, v in enumerate(path):
                if v is None:
                    continue
                route = shortest_route(g, v, t)
                if s + len(route) <= layers:
                    options.append((s, route))
        s, route = rng.choice(options)
        path = [None] * s + route
        family.append(path + [route[-1]] * (layers - len(path)))
    return family


@pytest.fixture
def path3() -> Graph:
    return Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")


@pytest.fixture
def star3() -> Graph:
    # center 0 is the Steiner point; leaves 1, 2, 3 are terminals, root is leaf 1
    return Graph(4, ((0, 1, 2), (0, 2, 3), (0, 3, 4)), (1, 2, 3), 1, "star3")


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line; the lines are repeated in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
