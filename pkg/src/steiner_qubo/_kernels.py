"""Numba inner loops for the annealers.

Every read carries its own splitmix64 stream, so results do not depend on
thread count or scheduling.  Energies are tracked as exact int64 deltas.
"""

import math

import numpy as np
from numba import config, njit, prange

# TBB in this image is too old for numba; avoid the probe warning
config.THREADING_LAYER = "workqueue"

# exp(-40) ~ 4e-18 is below the 53-bit uniform resolution; skip the draw
_CUTOFF = 40.0


@njit(cache=True, inline="always")
def _next(state):
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _uniform(state):
    return float(_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _below(state, n):
    return int(_next(state) % np.uint64(n))


@njit(cache=True)
def _shuffle(perm, state):
    for a in range(perm.shape[0] - 1, 0, -1):
        b = _below(state, a + 1)
        perm[a], perm[b] = perm[b], perm[a]


@njit(cache=True)
def _fields(x, lin, indptr, nbr, coef):
    n = lin.shape[0]
    f = lin.copy()
    for i in range(n):
        acc = 0
        for t in range(indptr[i], indptr[i + 1]):
            if x[nbr[t]]:
                acc += coef[t]
        f[i] += acc
    return f


@njit(cache=True)
def _energy(x, lin, indptr, nbr, coef):
    n = lin.shape[0]
    e = 0
    for i in range(n):
        if x[i]:
            e += lin[i]
            for t in range(indptr[i], indptr[i + 1]):
                j = nbr[t]
                if j > i and x[j]:
                    e += coef[t]
    return e


@njit(cache=True)
def _flip(x, f, i, indptr, nbr, coef):
    if x[i]:
        x[i] = 0
        for t in range(indptr[i], indptr[i + 1]):
            f[nbr[t]] -= coef[t]
    else:
        x[i] = 1
        for t in range(indptr[i], indptr[i + 1]):
            f[nbr[t]] += coef[t]


@njit(cache=True)
def sa_read(lin, indptr, nbr, coef, betas, seed, x):
    """One Metropolis annealing run; writes the final state into ``x``.

    ``betas`` are already divided by the energy scale.  Returns the energy
    (without offset) tracked incrementally.
    """
    n = lin.shape[0]
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    for i in range(n):
        x[i] = _next(state) & np.uint64(1)
    f = _fields(x, lin, indptr, nbr, coef)
    e = _energy(x, lin, indptr, nbr, coef)
    perm = np.arange(n)
    for sweep in range(betas.shape[0]):
        beta = betas[sweep]
        _shuffle(perm, state)
        for a in range(n):
            i = perm[a]
            d = -f[i] if x[i] else f[i]
            if d <= 0 or (beta * d < _CUTOFF and _uniform(state) < math.exp(-beta * d)):
                _flip(x, f, i, indptr, nbr, coef)
                e += d
    return e


@njit(cache=True)
def sqa_read(lin, indptr, nbr, coef, betas, jperp, slices, seed, x):
    """Path-integral annealing with ``slices`` replicas on a ring.

    Replica p sees its classical energy divided by ``slices`` plus the
    ferromagnetic coupling ``jperp[sweep]`` (energy units, already scaled)
    to its neighbours p - 1 and p + 1.  Writes the lowest-energy replica
    into ``x`` and returns its energy (without offset).
    """
    n = lin.shape[0]
    P = slices
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    xs = np.empty((P, n), dtype=np.int8)
    fs = np.empty((P, n), dtype=np.int64)
    es = np.empty(P, dtype=np.int64)
    for i in range(n):
        v = _next(state) & np.uint64(1)
        for p in range(P):
            xs[p, i] = v
    for p in range(P):
        fs[p] = _fields(xs[p], lin, indptr, nbr, coef)
        es[p] = _energy(xs[p], lin, indptr, nbr, coef)
    perm = np.arange(n)
    inv_p = 1.0 / P
    for sweep in range(betas.shape[0]):
        beta = betas[sweep]
        # flip cost from the ring: 2 J s_i (s_up + s_dn), s = 2x - 1
        jq = 2.0 * jperp[sweep]
        _shuffle(perm, state)
        for a in range(n):
            i = perm[a]
            for p in range(P):
                xi = xs[p, i]
                d = -fs[p, i] if xi else fs[p, i]
                de = d * inv_p
                if P > 1:
                    pu = p + 1 if p + 1 < P else 0
                    pd = p - 1 if p > 0 else P - 1
                    ring = 2 * (xs[pu, i] + xs[pd, i]) - 2
                    de += jq * ring if xi else -jq * ring
                if de <= 0.0 or (beta * de < _CUTOFF and _uniform(state) < math.exp(-beta * de)):
                    _flip(xs[p], fs[p], i, indptr, nbr, coef)
                    es[p] += d
    best = 0
    for p in range(1, P):
        if es[p] < es[best]:
            best = p
    x[:] = xs[best]
    return es[best]


@njit(cache=True, parallel=True)
def sa_batch(lin, indptr, nbr, coef, betas, seeds, out, energies):
    for r in prange(seeds.shape[0]):
        energies[r] = sa_read(lin, indptr, nbr, coef, betas, seeds[r], out[r])


@njit(cache=True, parallel=True)
def sqa_batch(lin, indptr, nbr, coef, betas, jperp, slices, seeds, out, energies):
    for r in prange(seeds.shape[0]):
        energies[r] = sqa_read(lin, indptr, nbr, coef, betas, jperp, slices, seeds[r], out[r])
