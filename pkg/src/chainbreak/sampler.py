"""Simulated-annealing surrogate for the annealer.

Each sample is an independent Metropolis anneal from a uniform random start
over the physical model.  Randomness comes from SplitMix64 streams: sample
``i`` of a call seeded with ``seed`` uses the stream seeded by
``hash64(seed, i)``, so results do not depend on how samples are split across
threads.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from numba import njit, prange

from .chimera import EmbeddedModel
from .errors import ConfigError, DimensionError
from .ising import IsingModel
from .seeding import hash64

# the bundled TBB is too old for numba; fall back quietly
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ramp.

    ``sweeps=None`` means ``sweeps_per_qubit * n_qubits`` sweeps, resolved
    against the model at sampling time.
    """

    sweeps: int | None = None
    beta_start: float = 0.1
    beta_end: float = 10.0
    restarts: int = 1
    sweeps_per_qubit: int = 100

    def __post_init__(self):
        if self.sweeps is not None and self.sweeps < 1:
            raise ConfigError("sweeps must be >= 1")
        if not 0 < self.beta_start <= self.beta_end:
            raise ConfigError("need 0 < beta_start <= beta_end")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")

    def resolve(self, n_qubits: int) -> int:
        return self.sweeps if self.sweeps is not None else max(1, self.sweeps_per_qubit * n_qubits)

    def betas(self, n_qubits: int) -> np.ndarray:
        return np.geomspace(self.beta_start, self.beta_end, self.resolve(n_qubits))


@dataclass(frozen=True)
class NoiseConfig:
    readout_flip_p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.readout_flip_p <= 0.5:
            raise ConfigError("readout_flip_p must lie in [0, 0.5]")


@dataclass(frozen=True, eq=False)
class PhysicalSampleSet:
    """``samples[s, c]`` is the spin of qubit ``qubits[c]`` in sample ``s``."""

    samples: np.ndarray
    energies: np.ndarray
    qubits: tuple[int, ...]
    seed: int
    schedule: AnnealSchedule
    noise: NoiseConfig
    sweeps: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.samples.shape[0]

    def config(self) -> dict:
        return {
            "seed": self.seed,
            "n_samples": len(self),
            "sweeps": self.sweeps,
            "schedule": asdict(self.schedule),
            "noise": asdict(self.noise),
            "qubits": list(self.qubits),
            **self.meta,
        }


class SplitMix64:
    """SplitMix64 stream whose state lives in a 1-element uint64 array.

    The array form lets the numba kernels advance the same stream in place.
    """

    def __init__(self, seed: int):
        self.state = np.array([seed & ((1 << 64) - 1)], dtype=np.uint64)

    def random(self) -> float:
        return _uniform(self.state)


@njit(cache=True)
def _next64(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _uniform(state):
    return (_next64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _local_fields(spins, h, indptr, nbrs, w):
    n = spins.shape[0]
    f = np.empty(n)
    for i in range(n):
        acc = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            acc += w[p] * spins[nbrs[p]]
        f[i] = acc
    return f


@njit(cache=True)
def _energy(spins, h, indptr, nbrs, w, offset):
    e = offset
    for i in range(spins.shape[0]):
        e += h[i] * spins[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = nbrs[p]
            if j > i:
                e += w[p] * spins[i] * spins[j]
    return e


@njit(cache=True)
def _sweep(spins, fields, indptr, nbrs, w, beta, state):
    for i in range(spins.shape[0]):
        delta = -2.0 * spins[i] * fields[i]
        if delta <= 0.0 or _uniform(state) < np.exp(-beta * delta):
            spins[i] = -spins[i]
            step = 2.0 * spins[i]
            for p in range(indptr[i], indptr[i + 1]):
                fields[nbrs[p]] += w[p] * step


@njit(cache=True)
def _anneal_one(h, indptr, nbrs, w, offset, betas, restarts, flip_p, state, out):
    n = h.shape[0]
    best_e = np.inf
    spins = np.empty(n, dtype=np.int8)
    for _ in range(restarts):
        for i in range(n):
            spins[i] = 1 if _uniform(state) < 0.5 else -1
        fields = _local_fields(spins, h, indptr, nbrs, w)
        for t in range(betas.shape[0]):
            _sweep(spins, fields, indptr, nbrs, w, betas[t], state)
        e = _energy(spins, h, indptr, nbrs, w, offset)
        if e < best_e:
            best_e = e
            out[:] = spins
    if flip_p > 0.0:
        for i in range(n):
            if _uniform(state) < flip_p:
                out[i] = -out[i]


@njit(cache=True, parallel=True)
def _anneal_batch(h, indptr, nbrs, w, offset, betas, restarts, flip_p, seeds, out, energies):
    for s in prange(seeds.shape[0]):
        state = np.empty(1, dtype=np.uint64)
        state[0] = seeds[s]
        _anneal_one(h, indptr, nbrs, w, offset, betas, restarts, flip_p, state, out[s])
        energies[s] = _energy(out[s], h, indptr, nbrs, w, offset)


def _csr(model: EmbeddedModel | IsingModel):
    if isinstance(model, EmbeddedModel):
        h, indptr, nbrs, w = model.csr()
        return h, indptr, nbrs, w, model.beta, model.qubits
    n = model.n
    lists: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in sorted(model.J.items()):
        lists[i].append((j, v))
        lists[j].append((i, v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in lists])
    nbrs = np.array([j for x in lists for j, _ in x], dtype=np.int64)
    w = np.array([v for x in lists for _, v in x], dtype=np.float64)
    return np.asarray(model.h, dtype=np.float64), indptr, nbrs, w, model.beta, tuple(range(n))


def sample_seeds(seed: int, n_samples: int, start: int = 0) -> np.ndarray:
    return np.array([hash64(seed, i) for i in range(start, start + n_samples)], dtype=np.uint64)


def sample(model: EmbeddedModel | IsingModel, n_samples: int, schedule: AnnealSchedule | None = None,
           noise: NoiseConfig | None = None, seed: int = 0, workers: int | None = None) -> PhysicalSampleSet:
    """Draw ``n_samples`` annealed physical configurations.

    ``workers`` sets the numba thread count for this call; results are
    identical for every value.
    """
    schedule = schedule or AnnealSchedule()
    noise = noise or NoiseConfig()
    if n_samples < 0:
        raise ConfigError("n_samples must be nonnegative")
    h, indptr, nbrs, w, offset, qubits = _csr(model)
    nq = h.shape[0]
    betas = schedule.betas(nq)
    out = np.empty((n_samples, nq), dtype=np.int8)
    energies = np.empty(n_samples)
    seeds = sample_seeds(seed, n_samples)
    prev = numba.get_num_threads()
    if workers is not None:
        numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))
    try:
        _anneal_batch(h, indptr, nbrs, w, float(offset), betas, schedule.restarts,
                      float(noise.readout_flip_p), seeds, out, energies)
    finally:
        numba.set_num_threads(prev)
    return PhysicalSampleSet(out, energies, qubits, seed, schedule, noise, sweeps=len(betas))


def sweep_metropolis(state: np.ndarray, model: EmbeddedModel | IsingModel, beta: float,
                     rng: SplitMix64) -> np.ndarray:
    """One Metropolis sweep over every spin in index order; returns a new array."""
    h, indptr, nbrs, w, _, _ = _csr(model)
    spins = np.array(state, dtype=np.int8)
    if spins.shape != h.shape:
        raise DimensionError(f"state has shape {spins.shape}, model has {h.shape[0]} spins")
    fields = _local_fields(spins, h, indptr, nbrs, w)
    _sweep(spins, fields, indptr, nbrs, w, float(beta), rng.state)
    return spins


def flip_deltas(state: np.ndarray, model: EmbeddedModel | IsingModel) -> np.ndarray:
    """Energy change of flipping each spin alone, from local fields."""
    h, indptr, nbrs, w, _, _ = _csr(model)
    spins = np.asarray(state, dtype=np.int8)
    return -2.0 * spins * _local_fields(spins, h, indptr, nbrs, w)
