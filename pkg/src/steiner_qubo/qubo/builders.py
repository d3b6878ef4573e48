"""Objective and penalty terms of the time-expanded Steiner tree QUBO.

A target k's path occupies at most one vertex per step s = 0..S.  The
objective charges w[i][j] whenever the path moves from i at step s to j at
step s + 1; the penalties pin the first path to the root, make every path
finish on its own terminal, keep paths single-valued and gap-free, forbid
idling on non-terminals, and require every later path to share a cell with
some other path.
"""

from __future__ import annotations

import warnings

from steiner_qubo.graph_io import DEFAULT_BIG, Graph, WeightMatrix, build_weight_matrix
from steiner_qubo.qubo.index import VarIndex
from steiner_qubo.qubo.model import QuboBuilder, QuboModel

DEFAULT_LAMBDA = 10000


def _check(g: Graph, idx: VarIndex, wm: WeightMatrix | None = None) -> None:
    if idx.n != g.n or (wm is not None and wm.n != g.n):
        raise ValueError("variable index / weight matrix do not match the graph size")
    if idx.m and idx.targets != g.terminals:
        raise ValueError("variable index targets do not match the graph terminals")


def build_objective(g: Graph, wm: WeightMatrix, idx: VarIndex) -> QuboModel:
    _check(g, idx, wm)
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H_A")
    w = wm.entries
    for k in range(idx.m):
        for s in range(idx.steps):
            for i in range(idx.n):
                xi = idx.x(k, s, i)
                for j in range(idx.n):
                    if w[i, j]:
                        qb.quadratic(xi, idx.x(k, s + 1, j), int(w[i, j]), "H_A")
    return qb.build()


def build_h1(idx: VarIndex, root: int = 0) -> QuboModel:
    """(1 - X[first target, step 0, root])**2."""
    if not idx.m:
        raise ValueError("no targets")
    qb = QuboBuilder(idx.num_vars)
    qb.square([(idx.x(0, 0, root), -1)], 1, "H1")
    return qb.build()


def build_h2(idx: VarIndex) -> QuboModel:
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H2")
    for k, t in enumerate(idx.targets):
        qb.square([(idx.x(k, idx.steps, t), -1)], 1, "H2")
    return qb.build()


def build_h3(idx: VarIndex) -> QuboModel:
    # (sum x)^2 - sum x leaves only the cross terms
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H3")
    for k in range(idx.m):
        for s in range(idx.layers):
            for i in range(idx.n):
                for j in range(i + 1, idx.n):
                    qb.quadratic(idx.x(k, s, i), idx.x(k, s, j), 2, "H3")
    return qb.build()


def build_h4(idx: VarIndex) -> QuboModel:
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H4")
    for k in range(idx.m):
        for s in range(idx.steps):
            for i in range(idx.n):
                xi = idx.x(k, s, i)
                qb.linear(xi, 1, "H4")
                for j in range(idx.n):
                    qb.quadratic(xi, idx.x(k, s + 1, j), -1, "H4")
    return qb.build()


def build_h5(g: Graph, idx: VarIndex) -> QuboModel:
    _check(g, idx)
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H5")
    terminals = set(g.terminals)
    for k in range(idx.m):
        for i in range(idx.n):
            if i in terminals:
                continue
            for s in range(idx.steps):
                qb.quadratic(idx.x(k, s, i), idx.x(k, s + 1, i), 1, "H5")
    return qb.build()


def build_h6(idx: VarIndex) -> QuboModel:
    """Overlap requirement for every target after the first.

    The overlap count of target k is linearised with one indicator per
    (pair, cell) tied to the product of the two path bits by the penalty
    ``a*b - 2*a*z - 2*b*z + 3*z`` (zero iff z == a*b, at least 1 otherwise).
    The squared equality ``(overlaps - slack - 1)**2`` then stays quadratic.
    """
    qb = QuboBuilder(idx.num_vars)
    qb.touch("H6")
    if idx.m < 2:
        return qb.build()
    worst = (idx.m - 1) * idx.layers - 1
    if idx.max_slack() < worst:
        warnings.warn(
            f"{idx.slack_bits_per_target} slack bits hold at most {idx.max_slack()}, "
            f"overlaps may need up to {worst}",
            stacklevel=2,
        )
    for k, kp in idx.pairs:
        for s in range(idx.layers):
            for i in range(idx.n):
                z, a, b = idx.aux(k, kp, s, i), idx.x(k, s, i), idx.x(kp, s, i)
                qb.quadratic(a, b, 1, "H6")
                qb.quadratic(a, z, -2, "H6")
                qb.quadratic(b, z, -2, "H6")
                qb.linear(z, 3, "H6")
    for k in range(1, idx.m):
        terms = [
            (idx.aux(k, kp, s, i), 1)
            for kp in range(idx.m)
            if kp != k
            for s in range(idx.layers)
            for i in range(idx.n)
        ]
        terms += [(idx.slack(k, b), -(1 << b)) for b in range(idx.slack_bits_per_target)]
        qb.square(terms, -1, "H6")
    return qb.build()


def penalty_floor(g: Graph, idx: VarIndex) -> int:
    return idx.layers * g.max_weight


def assemble(g: Graph, wm: WeightMatrix, idx: VarIndex, lam: int = DEFAULT_LAMBDA) -> QuboModel:
    """Objective plus ``lam`` times the six penalty terms, labels preserved."""
    if lam <= 0:
        raise ValueError(f"penalty coefficient must be positive, got {lam}")
    _check(g, idx, wm)
    if lam <= penalty_floor(g, idx):
        warnings.warn(
            f"lambda={lam} is not above (S+1) * max weight = {penalty_floor(g, idx)}",
            stacklevel=2,
        )
    penalties = (
        build_h1(idx, g.root),
        build_h2(idx),
        build_h3(idx),
        build_h4(idx),
        build_h5(g, idx),
        build_h6(idx),
    )
    # every builder owns a distinct label, so the parts can be combined in one pass
    parts = dict(build_objective(g, wm, idx).parts)
    for p in penalties:
        parts.update({label: t.scaled(lam) for label, t in p.parts.items()})
    model = QuboModel(idx.num_vars, parts)
    model.info.update(
        instance=g.name, n=g.n, m=g.m, steps=idx.steps, slack_bits=idx.slack_bits_per_target,
        lam=lam, big=wm.big,
    )
    return model


def build_model(
    g: Graph,
    steps: int | None = None,
    lam: int = DEFAULT_LAMBDA,
    big: int = DEFAULT_BIG,
    slack_bits: int | None = None,
) -> tuple[QuboModel, VarIndex, WeightMatrix]:
    wm = build_weight_matrix(g, big)
    idx = VarIndex.create(g.n, g.terminals, steps, slack_bits)
    return assemble(g, wm, idx, lam), idx, wm
