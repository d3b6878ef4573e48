"""Simulated annealing and simulated quantum annealing samplers for QuboModel."""

from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from steiner_qubo import _kernels
from steiner_qubo.qubo.model import QuboModel, energy

THREADS_ENV = "STEINER_QUBO_THREADS"


@dataclass(frozen=True)
class Schedule:
    """Annealing schedule.

    Inverse temperatures and transverse fields are dimensionless: the
    sampler divides model energies by ``energy_scale`` (see
    :func:`default_energy_scale` when it is None) before applying them.
    """

    num_sweeps: int = 1000
    beta_range: tuple[float, float] = (0.01, 10.0)
    gamma_range: tuple[float, float] = (30.0, 0.01)
    trotter_slices: int = 8
    beta_interpolation: str = "geometric"
    gamma_interpolation: str = "linear"
    energy_scale: float | None = None

    def __post_init__(self) -> None:
        b0, b1 = self.beta_range
        g0, g1 = self.gamma_range
        if self.num_sweeps < 1:
            raise ValueError("num_sweeps must be positive")
        if not 0 < b0 < b1:
            raise ValueError(f"need 0 < beta_start < beta_end, got {self.beta_range}")
        if not g0 > g1 >= 0:
            raise ValueError(f"need gamma_start > gamma_end >= 0, got {self.gamma_range}")
        if self.trotter_slices < 1:
            raise ValueError("trotter_slices must be at least 1")
        for kind in (self.beta_interpolation, self.gamma_interpolation):
            if kind not in ("linear", "geometric"):
                raise ValueError(f"unknown interpolation {kind!r}")
        if self.gamma_interpolation == "geometric" and g1 == 0:
            raise ValueError("geometric gamma schedule needs gamma_end > 0")
        if self.energy_scale is not None and self.energy_scale <= 0:
            raise ValueError("energy_scale must be positive")

    def betas(self) -> np.ndarray:
        return _interp(*self.beta_range, self.num_sweeps, self.beta_interpolation)

    def gammas(self) -> np.ndarray:
        return _interp(*self.gamma_range, self.num_sweeps, self.gamma_interpolation)


def _interp(a: float, b: float, n: int, kind: str) -> np.ndarray:
    if n == 1:
        return np.array([b], dtype=np.float64)
    if kind == "geometric":
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def default_energy_scale(model: QuboModel) -> float:
    """Energy unit of the dimensionless schedule.

    The smallest nonzero objective (``H_A``) coefficient when the model
    carries provenance, else the smallest nonzero coefficient.  With this
    unit beta = 10 makes the cheapest objective step an e^-10 uphill move.
    """
    part = model.parts.get("H_A")
    vals = []
    if part is not None:
        vals = [abs(c) for c in (*part.linear.values(), *part.quadratic.values()) if c]
    if not vals:
        vals = [abs(c) for c in (*model.linear.values(), *model.quadratic.values()) if c]
    return float(min(vals)) if vals else 1.0


@dataclass(frozen=True)
class Sample:
    bits: np.ndarray
    energy: int
    occurrences: int


@dataclass
class SampleSet:
    samples: list[Sample]
    info: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def first(self) -> Sample:
        return self.samples[0]

    @property
    def num_reads(self) -> int:
        return sum(s.occurrences for s in self.samples)

    def same_samples(self, other: SampleSet) -> bool:
        return len(self) == len(other) and all(
            a.energy == b.energy and a.occurrences == b.occurrences and np.array_equal(a.bits, b.bits)
            for a, b in zip(self.samples, other.samples)
        )


def read_seeds(seed: int, reads: int) -> np.ndarray:
    """One 64-bit seed per read; read r's seed does not depend on ``reads``."""
    ss = np.random.SeedSequence(seed)
    return np.array([c.generate_state(1, dtype=np.uint64)[0] for c in ss.spawn(reads)], dtype=np.uint64)


def _csr(model: QuboModel):
    lin, qi, qj, qc = model.arrays
    rows = np.concatenate([qi, qj])
    cols = np.concatenate([qj, qi])
    vals = np.concatenate([qc, qc])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(model.num_vars + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return lin, np.cumsum(indptr), cols.astype(np.int64), vals.astype(np.int64)


def _set_threads() -> None:
    cap = os.environ.get(THREADS_ENV)
    if cap:
        import numba

        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def _collect(model: QuboModel, out: np.ndarray, raw: np.ndarray, info: dict) -> SampleSet:
    groups: dict[bytes, list] = {}
    for bits, e in zip(out, raw):
        key = bits.tobytes()
        if key in groups:
            groups[key][2] += 1
        else:
            groups[key] = [bits.copy(), int(e) + model.offset, 1]
    samples = []
    for bits, e, occ in groups.values():
        exact = energy(model, bits)
        if exact != e:
            raise RuntimeError(f"incremental energy {e} disagrees with full evaluation {exact}")
        samples.append(Sample(bits, e, occ))
    samples.sort(key=lambda s: (s.energy, s.bits.tobytes()))
    return SampleSet(samples, info)


def _prepare(model: QuboModel, reads: int, schedule: Schedule):
    if reads < 1:
        raise ValueError("reads must be at least 1")
    if not model.is_integral():
        raise ValueError("samplers need an integer-coefficient model")
    _set_threads()
    scale = schedule.energy_scale or default_energy_scale(model)
    return _csr(model), scale


def sample_sa(model: QuboModel, reads: int = 1000, schedule: Schedule | None = None, seed: int = 0) -> SampleSet:
    """Metropolis single-flip annealing from random starts, one result per read."""
    schedule = schedule or Schedule()
    (lin, indptr, nbr, coef), scale = _prepare(model, reads, schedule)
    seeds = read_seeds(seed, reads)
    out = np.zeros((reads, model.num_vars), dtype=np.int8)
    raw = np.zeros(reads, dtype=np.int64)
    t0 = time.perf_counter()
    if model.num_vars:
        _kernels.sa_batch(lin, indptr, nbr, coef, schedule.betas() / scale, seeds, out, raw)
    info = _info("sa", seed, reads, schedule, scale, time.perf_counter() - t0)
    return _collect(model, out, raw, info)


def transverse_coupling(beta: np.ndarray, gamma: np.ndarray, slices: int) -> np.ndarray:
    """J_perp = -ln(tanh(beta * gamma / P)) / (2 * beta), capped where gamma -> 0."""
    with np.errstate(divide="ignore"):
        j = -np.log(np.tanh(beta * gamma / slices)) / (2.0 * beta)
    cap = 50.0 / beta
    return np.where(np.isfinite(j), np.minimum(j, cap), cap)


def sample_sqa(model: QuboModel, reads: int = 1000, schedule: Schedule | None = None, seed: int = 0) -> SampleSet:
    """Suzuki-Trotter path-integral annealing; each read returns its best replica."""
    schedule = schedule or Schedule()
    (lin, indptr, nbr, coef), scale = _prepare(model, reads, schedule)
    seeds = read_seeds(seed, reads)
    out = np.zeros((reads, model.num_vars), dtype=np.int8)
    raw = np.zeros(reads, dtype=np.int64)
    betas = schedule.betas()
    # kernel works in raw energy units: beta / scale, J_perp * scale
    jperp = transverse_coupling(betas, schedule.gammas(), schedule.trotter_slices)
    t0 = time.perf_counter()
    if model.num_vars:
        _kernels.sqa_batch(
            lin, indptr, nbr, coef, betas / scale, jperp * scale, schedule.trotter_slices, seeds, out, raw
        )
    info = _info("sqa", seed, reads, schedule, scale, time.perf_counter() - t0)
    return _collect(model, out, raw, info)


def _info(name: str, seed: int, reads: int, schedule: Schedule, scale: float, wall: float) -> dict:
    sched = asdict(schedule)
    sched["energy_scale"] = scale
    return {"algorithm": name, "seed": seed, "reads": reads, "schedule": sched, "wall_time": wall}
