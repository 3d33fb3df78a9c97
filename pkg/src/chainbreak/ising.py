"""Logical problem types, exact energies, QUBO/Ising conversion and brute force.

Energy conventions (both use the plus sign)::

    E_ising(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + beta,   s_i in {-1, +1}
    E_qubo(x)  = sum_i q_i x_i + sum_{i<j} Q_ij x_i x_j + gamma,  x_i in {0, 1}

Quadratic terms are stored once per unordered pair with ``i < j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, DimensionError

BRUTE_FORCE_MAX_N = 26
DEGENERACY_TOL = 1e-12


def _canonical_pairs(n: int, pairs: Mapping[tuple[int, int], float] | Iterable) -> dict[tuple[int, int], float]:
    items = pairs.items() if isinstance(pairs, Mapping) else ((tuple(p[:2]), p[2]) for p in pairs)
    out: dict[tuple[int, int], float] = {}
    for (i, j), v in items:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-coupling ({i}, {i}) is not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
        key = (i, j) if i < j else (j, i)
        out[key] = out.get(key, 0.0) + float(v)
    return out


def _linear(n: int, values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.shape[0] != n:
        raise DimensionError(f"expected {n} linear terms, got {arr.shape[0]}")
    arr.setflags(write=False)
    return arr


def _upper_matrix(n: int, pairs: Mapping[tuple[int, int], float]) -> np.ndarray:
    mat = np.zeros((n, n))
    for (i, j), v in pairs.items():
        mat[i, j] = v
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Logical Ising instance ``(h, J, beta)`` over ``n`` spins.

    ``J`` may be given as a mapping ``{(i, j): value}`` or an iterable of
    ``(i, j, value)`` triples; it is normalized to ``i < j`` keys and
    duplicate pairs are summed.
    """

    n: int
    h: np.ndarray
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    beta: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        object.__setattr__(self, "h", _linear(self.n, self.h))
        object.__setattr__(self, "J", _canonical_pairs(self.n, self.J))
        object.__setattr__(self, "beta", float(self.beta))

    @cached_property
    def j_matrix(self) -> np.ndarray:
        """Dense strictly upper-triangular coupling matrix."""
        return _upper_matrix(self.n, self.J)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.J)

    def energy(self, s) -> float:
        return energy_ising(self, s)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Energies of a batch of spin rows, shape ``(S, n)``."""
        spins = np.asarray(spins, dtype=np.float64)
        if spins.ndim != 2 or spins.shape[1] != self.n:
            raise DimensionError(f"expected shape (S, {self.n}), got {spins.shape}")
        return spins @ self.h + np.einsum("si,ij,sj->s", spins, self.j_matrix, spins) + self.beta

    def scaled(self, factor: float) -> IsingModel:
        """Every coefficient (including beta) multiplied by ``factor``."""
        return IsingModel(self.n, self.h * factor, {e: v * factor for e, v in self.J.items()}, self.beta * factor)

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.h, other.h)
                and self.J == other.J and self.beta == other.beta)

    def __repr__(self):
        return f"IsingModel(n={self.n}, |J|={len(self.J)}, beta={self.beta:g})"


@dataclass(frozen=True, eq=False)
class Qubo:
    """Binary problem ``(q, Q, gamma)`` over ``n`` variables."""

    n: int
    q: np.ndarray
    Q: dict[tuple[int, int], float] = field(default_factory=dict)
    gamma: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        object.__setattr__(self, "q", _linear(self.n, self.q))
        object.__setattr__(self, "Q", _canonical_pairs(self.n, self.Q))
        object.__setattr__(self, "gamma", float(self.gamma))

    @cached_property
    def q_matrix(self) -> np.ndarray:
        return _upper_matrix(self.n, self.Q)

    def energy(self, x) -> float:
        return energy_qubo(self, x)

    def energies(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.n:
            raise DimensionError(f"expected shape (S, {self.n}), got {xs.shape}")
        return xs @ self.q + np.einsum("si,ij,sj->s", xs, self.q_matrix, xs) + self.gamma

    def __eq__(self, other):
        if not isinstance(other, Qubo):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.q, other.q)
                and self.Q == other.Q and self.gamma == other.gamma)

    def __repr__(self):
        return f"Qubo(n={self.n}, |Q|={len(self.Q)}, gamma={self.gamma:g})"


def as_spins(s, n: int | None = None) -> np.ndarray:
    """Validate a spin vector and return it as an int8 array."""
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise DimensionError(f"spin vector must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"spin vector has length {arr.shape[0]}, model has n={n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spin entries must be -1 or +1")
    return arr.astype(np.int8)


def energy_ising(model: IsingModel, s) -> float:
    """Energy of spin vector ``s`` under ``model``."""
    s = as_spins(s, model.n).astype(np.float64)
    e = float(model.h @ s) + model.beta
    for (i, j), v in model.J.items():
        e += v * s[i] * s[j]
    return e


def energy_qubo(model: Qubo, x) -> float:
    """Energy of binary vector ``x`` under ``model``."""
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != model.n:
        raise DimensionError(f"binary vector has shape {x.shape}, model has n={model.n}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("binary entries must be 0 or 1")
    x = x.astype(np.float64)
    e = float(model.q @ x) + model.gamma
    for (i, j), v in model.Q.items():
        e += v * x[i] * x[j]
    return e


def qubo_to_ising(model: Qubo) -> IsingModel:
    """Convert under ``s = 2x - 1``; energies agree state by state."""
    J = {e: v / 4.0 for e, v in model.Q.items()}
    h = model.q / 2.0
    for (i, j), v in J.items():
        h[i] += v
        h[j] += v
    beta = sum(model.Q.values()) / 4.0 + float(model.q.sum()) / 2.0 + model.gamma
    return IsingModel(model.n, h, J, beta)


def ising_to_qubo(model: IsingModel) -> Qubo:
    """Inverse of :func:`qubo_to_ising`, i.e. substitute ``s = 2x - 1``."""
    Q = {e: 4.0 * v for e, v in model.J.items()}
    row_sums = np.zeros(model.n)
    for (i, j), v in model.J.items():
        row_sums[i] += v
        row_sums[j] += v
    q = 2.0 * (model.h - row_sums)
    gamma = model.beta - sum(Q.values()) / 4.0 - float(q.sum()) / 2.0
    return Qubo(model.n, q, Q, gamma)


@dataclass(frozen=True, eq=False)
class GroundStateReport:
    """Minimum energy and every state attaining it (rows of ``states``)."""

    energy: float
    states: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=np.int8))
        if states.shape[0] == 0:
            raise ValueError("a ground-state report needs at least one state")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "energy", float(self.energy))

    @property
    def degeneracy(self) -> int:
        return self.states.shape[0]

    def state_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(v) for v in row) for row in self.states}

    def is_ground(self, energy: float, atol: float = 1e-9) -> bool:
        return abs(energy - self.energy) <= atol


def _index_to_spins(idx: np.ndarray, n: int) -> np.ndarray:
    # bit b of the state index is spin b; bit set means +1
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def brute_force_solve(model: IsingModel, max_n: int = BRUTE_FORCE_MAX_N,
                      tol: float = DEGENERACY_TOL, chunk: int = 1 << 16) -> GroundStateReport:
    """Exhaustive ground-state search over all ``2**n`` spin states.

    States whose energy lies within ``tol`` of the minimum are all returned,
    in increasing state-index order (bit ``b`` of the index set means spin
    ``b`` is +1).  Raises :class:`CapacityError` when ``n > max_n``.
    """
    n = model.n
    if n > max_n:
        raise CapacityError(f"brute force over 2**{n} states exceeds the cap n <= {max_n}")
    h = model.h
    jm = model.j_matrix
    best = np.inf
    found: list[np.ndarray] = []
    total = 1 << n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        s = _index_to_spins(idx, n).astype(np.float64)
        e = s @ h + np.einsum("si,si->s", s @ jm, s) + model.beta
        emin = float(e.min())
        if emin < best - tol:
            best = emin
            found = [idx[e <= best + tol]]
        elif emin <= best + tol:
            best = min(best, emin)
            found.append(idx[e <= best + tol])
    idx = np.concatenate(found)
    states = _index_to_spins(idx, n)
    # re-filter against the final minimum; earlier chunks may have admitted states within tol of a larger value
    energies = model.energies(states)
    keep = energies <= best + tol
    return GroundStateReport(best, states[keep])
