"""Sparse QUBO/Ising containers with per-label provenance."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping, TextIO

import numpy as np

LABELS = ("H_A", "H1", "H2", "H3", "H4", "H5", "H6")
PENALTY_LABELS = LABELS[1:]


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _clean(c):
    if type(c) is Fraction and c.denominator == 1:
        return int(c)
    return c


@dataclass(frozen=True)
class Terms:
    """One label's contribution: linear, pairwise and constant parts."""

    linear: Mapping[int, int] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], int] = field(default_factory=dict)
    offset: int = 0

    def scaled(self, factor) -> Terms:
        return Terms(
            {i: c * factor for i, c in self.linear.items()},
            {k: c * factor for k, c in self.quadratic.items()},
            self.offset * factor,
        )


class QuboModel:
    """Immutable quadratic form ``offset + sum a_i x_i + sum b_ij x_i x_j``.

    Coefficients are the exact sums of the labelled :class:`Terms` held in
    ``parts``; zero coefficients are dropped from the aggregate maps.
    """

    def __init__(self, num_vars: int, parts: Mapping[str, Terms], info: Mapping | None = None):
        self.num_vars = int(num_vars)
        self.parts = dict(parts)
        self.info = dict(info or {})
        linear: dict[int, int] = defaultdict(int)
        quadratic: dict[tuple[int, int], int] = defaultdict(int)
        offset = 0
        for terms in self.parts.values():
            for i, c in terms.linear.items():
                linear[i] += c
            for k, c in terms.quadratic.items():
                if k[0] >= k[1]:
                    raise ValueError(f"quadratic key {k} must have i < j")
                quadratic[k] += c
            offset += terms.offset
        for i in linear:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"variable {i} out of range")
        self.linear = {i: c if type(c) is int else _clean(c) for i, c in sorted(linear.items()) if c != 0}
        self.quadratic = {k: c if type(c) is int else _clean(c) for k, c in sorted(quadratic.items()) if c != 0}
        self.offset = _clean(offset)

    @classmethod
    def from_terms(cls, num_vars: int, linear=None, quadratic=None, offset=0, label: str = "H_A") -> QuboModel:
        quad: dict[tuple[int, int], int] = defaultdict(int)
        lin: dict[int, int] = defaultdict(int, linear or {})
        for (i, j), c in (quadratic or {}).items():
            if i == j:
                lin[i] += c
            else:
                quad[_pair(i, j)] += c
        return cls(num_vars, {label: Terms(dict(lin), dict(quad), offset)})

    def __repr__(self) -> str:
        return (
            f"QuboModel(num_vars={self.num_vars}, linear={len(self.linear)}, "
            f"quadratic={len(self.quadratic)}, offset={self.offset})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.linear == other.linear
            and self.quadratic == other.quadratic
            and self.offset == other.offset
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: QuboModel) -> QuboModel:
        parts = dict(self.parts)
        for label, t in other.parts.items():
            if label in parts:
                parts[label] = _merge(parts[label], t)
            else:
                parts[label] = t
        return QuboModel(max(self.num_vars, other.num_vars), parts, {**self.info, **other.info})

    def scaled(self, factor, labels: Iterable[str] | None = None) -> QuboModel:
        labels = set(self.parts if labels is None else labels)
        parts = {k: (t.scaled(factor) if k in labels else t) for k, t in self.parts.items()}
        return QuboModel(self.num_vars, parts, self.info)

    def restrict(self, label: str) -> QuboModel:
        """The sub-model made of one label's contributions only."""
        return QuboModel(self.num_vars, {label: self.parts.get(label, Terms())})

    @property
    def labels(self) -> list[str]:
        return [k for k in self.parts]

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(linear vector, pair rows, pair cols, pair coefficients) as int64."""
        lin = np.zeros(self.num_vars, dtype=np.int64)
        for i, c in self.linear.items():
            lin[i] = int(c)
        if self.quadratic:
            ij = np.array(list(self.quadratic), dtype=np.int64)
            qc = np.array([int(c) for c in self.quadratic.values()], dtype=np.int64)
            qi, qj = ij[:, 0].copy(), ij[:, 1].copy()
        else:
            qi = qj = qc = np.zeros(0, dtype=np.int64)
        return lin, qi, qj, qc

    def is_integral(self) -> bool:
        vals = [self.offset, *self.linear.values(), *self.quadratic.values()]
        return all(isinstance(v, (int, np.integer)) for v in vals)

    def dense(self) -> np.ndarray:
        """Upper-triangular Q with the linear terms on the diagonal (object dtype, exact)."""
        q = np.zeros((self.num_vars, self.num_vars), dtype=object)
        for i, c in self.linear.items():
            q[i, i] = c
        for (i, j), c in self.quadratic.items():
            q[i, j] = c
        return q


def _merge(a: Terms, b: Terms) -> Terms:
    lin = defaultdict(int, a.linear)
    for i, c in b.linear.items():
        lin[i] += c
    quad = defaultdict(int, a.quadratic)
    for k, c in b.quadratic.items():
        quad[k] += c
    return Terms(dict(lin), dict(quad), a.offset + b.offset)


class QuboBuilder:
    """Accumulates labelled contributions; squares of a variable fold into its linear term."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self._lin: dict[str, dict[int, int]] = defaultdict(lambda: defaultdict(int))
        self._quad: dict[str, dict[tuple[int, int], int]] = defaultdict(lambda: defaultdict(int))
        self._off: dict[str, int] = defaultdict(int)

    def linear(self, i: int, c: int, label: str) -> None:
        self._lin[label][i] += c

    def quadratic(self, i: int, j: int, c: int, label: str) -> None:
        if i == j:
            self._lin[label][i] += c
        else:
            self._quad[label][_pair(i, j)] += c

    def offset(self, c: int, label: str) -> None:
        self._off[label] += c

    def square(self, terms: list[tuple[int, int]], const: int, label: str, scale: int = 1) -> None:
        """Add ``scale * (const + sum c_i x_i)**2`` (binary x, so x_i**2 == x_i)."""
        self._off[label] += scale * const * const
        for a, (i, ci) in enumerate(terms):
            self._lin[label][i] += scale * (ci * ci + 2 * const * ci)
            for j, cj in terms[a + 1:]:
                self.quadratic(i, j, 2 * scale * ci * cj, label)

    def touch(self, label: str) -> None:
        self._off[label] += 0

    def build(self, info: Mapping | None = None) -> QuboModel:
        labels = [lb for lb in LABELS if lb in self._lin or lb in self._quad or lb in self._off]
        labels += [lb for lb in {*self._lin, *self._quad, *self._off} if lb not in labels]
        parts = {
            lb: Terms(dict(self._lin.get(lb, {})), dict(self._quad.get(lb, {})), self._off.get(lb, 0))
            for lb in labels
        }
        return QuboModel(self.num_vars, parts, info)


def energy(model: QuboModel, x) -> int:
    """Exact energy of one assignment."""
    x = np.asarray(x)
    if x.shape != (model.num_vars,):
        raise ValueError(f"assignment has shape {x.shape}, model has {model.num_vars} variables")
    if not model.is_integral():
        return _energy_exact(model, x)
    lin, qi, qj, qc = model.arrays
    xb = x.astype(np.int64)
    return int(model.offset + lin @ xb + qc @ (xb[qi] * xb[qj]))


def _energy_exact(model: QuboModel, x) -> Fraction:
    e = Fraction(model.offset)
    for i, c in model.linear.items():
        if x[i]:
            e += c
    for (i, j), c in model.quadratic.items():
        if x[i] and x[j]:
            e += c
    return _clean(e)


def energies(model: QuboModel, xs: np.ndarray) -> np.ndarray:
    """Energies of a batch of assignments (rows of ``xs``) as int64."""
    lin, qi, qj, qc = model.arrays
    xs = np.asarray(xs, dtype=np.int64)
    return model.offset + xs @ lin + (xs[:, qi] * xs[:, qj]) @ qc


def exhaustive_minimum(model: QuboModel, low_bits: int = 20, keep: int = 64) -> tuple[int, np.ndarray]:
    """Exact minimum by enumerating every assignment.

    Variables are split into a fully tabulated low block and an outer loop
    over the high block, so ~30 variables run in seconds.  Returns the
    minimum energy and up to ``keep`` minimizing assignments.
    """
    nv = model.num_vars
    if nv > 34:
        raise ValueError(f"{nv} variables is too many to enumerate")
    a = min(nv, low_bits)
    lin, qi, qj, qc = model.arrays
    codes = np.arange(1 << a, dtype=np.int64)
    low = ((codes[:, None] >> np.arange(a)) & 1).astype(np.float64)

    in_low = (qi < a) & (qj < a)
    in_high = (qi >= a) & (qj >= a)
    cross = ~in_low & ~in_high  # qi < a <= qj since qi < qj
    e_low = low @ lin[:a].astype(np.float64)
    e_low += (low[:, qi[in_low]] * low[:, qj[in_low]]) @ qc[in_low].astype(np.float64)
    b = nv - a
    cross_m = np.zeros((a, b), dtype=np.float64)
    np.add.at(cross_m, (qi[cross], qj[cross] - a), qc[cross])
    hi_i, hi_j, hi_c = qi[in_high] - a, qj[in_high] - a, qc[in_high]
    hcodes = np.arange(1 << b, dtype=np.int64)
    high = ((hcodes[:, None] >> np.arange(b)) & 1).astype(np.float64)
    e_high = high @ lin[a:].astype(np.float64)
    e_high += (high[:, hi_i] * high[:, hi_j]) @ hi_c.astype(np.float64)
    fields = high @ cross_m.T  # (2^b, a)

    best = None
    winners: list[np.ndarray] = []
    chunk = max(1, (1 << 24) >> a)
    for h0 in range(0, 1 << b, chunk):
        tot = e_low[:, None] + low @ fields[h0:h0 + chunk].T + e_high[None, h0:h0 + chunk]
        lo = tot.min()
        if best is None or lo < best:
            best, winners = lo, []
        if lo == best and len(winners) < keep:
            li, hj = np.nonzero(tot == lo)
            for code, h in list(zip(li, hj))[: keep - len(winners)]:
                winners.append(np.concatenate([low[code], high[h0 + h]]).astype(np.int8))
    return int(round(best)) + model.offset, np.array(winners, dtype=np.int8)


@dataclass(frozen=True)
class IsingModel:
    """``offset + sum h_i s_i + sum J_ij s_i s_j`` over spins in {-1, +1}."""

    num_vars: int
    h: Mapping[int, Rational]
    J: Mapping[tuple[int, int], Rational]
    offset: Rational = 0

    def __post_init__(self) -> None:
        for i, j in self.J:
            if i >= j:
                raise ValueError(f"coupling key {(i, j)} must have i < j")


def ising_energy(im: IsingModel, s) -> Rational:
    e = Fraction(im.offset)
    for i, c in im.h.items():
        e += c * s[i]
    for (i, j), c in im.J.items():
        e += c * s[i] * s[j]
    return _clean(e)


def to_ising(model: QuboModel) -> IsingModel:
    """Substitute x = (1 + s) / 2; energies agree exactly for s = 2x - 1."""
    h: dict[int, Fraction] = defaultdict(Fraction)
    J: dict[tuple[int, int], Fraction] = {}
    off = Fraction(model.offset)
    for i, c in model.linear.items():
        h[i] += Fraction(c, 2)
        off += Fraction(c, 2)
    for (i, j), c in model.quadratic.items():
        q = Fraction(c, 4)
        J[(i, j)] = q
        h[i] += q
        h[j] += q
        off += q
    return IsingModel(
        model.num_vars,
        {i: _clean(c) for i, c in sorted(h.items()) if c != 0},
        {k: _clean(c) for k, c in sorted(J.items()) if c != 0},
        _clean(off),
    )


def to_qubo(im: IsingModel, label: str = "H_A") -> QuboModel:
    """Inverse of :func:`to_ising` via s = 2x - 1."""
    lin: dict[int, Fraction] = defaultdict(Fraction)
    quad: dict[tuple[int, int], Fraction] = {}
    off = Fraction(im.offset)
    for i, c in im.h.items():
        lin[i] += 2 * c
        off -= c
    for (i, j), c in im.J.items():
        quad[(i, j)] = 4 * c
        lin[i] -= 2 * c
        lin[j] -= 2 * c
        off += c
    lin = {i: _clean(c) for i, c in lin.items() if c != 0}
    quad = {k: _clean(c) for k, c in quad.items() if c != 0}
    return QuboModel(im.num_vars, {label: Terms(lin, quad, _clean(off))})


def write_model(model: QuboModel, fh: TextIO, header: Mapping[str, object] | None = None) -> None:
    """Line format: ``# key: value`` comments, the variable count, then ``i j coeff`` lines (i == j is linear)."""
    meta = {"offset": model.offset, **(header or {})}
    for k, v in meta.items():
        fh.write(f"# {k}: {v}\n")
    fh.write(f"{model.num_vars}\n")
    for i, c in model.linear.items():
        fh.write(f"{i} {i} {c}\n")
    for (i, j), c in model.quadratic.items():
        fh.write(f"{i} {j} {c}\n")


def read_model(fh: TextIO) -> tuple[QuboModel, dict[str, str]]:
    header: dict[str, str] = {}
    num_vars = None
    lin: dict[int, int] = {}
    quad: dict[tuple[int, int], int] = {}
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            header[key.strip()] = val.strip()
            continue
        fields = line.split()
        if num_vars is None:
            num_vars = int(fields[0])
            continue
        i, j = int(fields[0]), int(fields[1])
        c = Fraction(fields[2])
        if i == j:
            lin[i] = lin.get(i, 0) + c
        else:
            k = _pair(i, j)
            quad[k] = quad.get(k, 0) + c
    if num_vars is None:
        raise ValueError("model file has no variable count")
    off = Fraction(header.get("offset", "0"))
    model = QuboModel(
        num_vars,
        {"imported": Terms({i: _clean(c) for i, c in lin.items()}, {k: _clean(c) for k, c in quad.items()}, _clean(off))},
    )
    return model, header
