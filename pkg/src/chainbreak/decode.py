"""Chain-break detection and decoding of physical samples to logical states.

Three strategies: ``discard`` drops any sample with a broken chain,
``majority`` takes the most common value in each chain, and ``weighted``
scores both candidate values of a chain with per-position fault rates::

    W(x) = (1 - prod_{l: q_l == x} p_l) * prod_{l: q_l != x} p_l

and keeps the higher-scoring value.  The fault rates come from
:func:`estimate_fault_profile`, which needs the true ground state, so the
weighted decoder is a diagnostic tool rather than a blind solver.

Ties (equal votes or equal scores) are settled by the value held at the
chain position with the smallest fault rate; if no profile is given, or the
lowest-rate positions disagree, the value at position 0 wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .chimera import EmbeddedModel, Embedding
from .errors import DataError
from .ising import GroundStateReport

STRATEGIES = ("discard", "majority", "weighted")
DISCARDED = None
CLAMP = 1e-6


@dataclass(frozen=True)
class ChainReadout:
    index: int
    values: tuple[int, ...]

    @property
    def broken(self) -> bool:
        return min(self.values) != max(self.values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class FaultProfile:
    """Per chain, per position probability that the spin disagrees with the ground state.

    ``n_b == 0`` marks an empty profile (no broken samples were seen); its
    values are NaN and it cannot be used for weighted decoding.
    """

    values: tuple[np.ndarray, ...]
    n_b: int

    def __post_init__(self):
        vals = tuple(np.array(v, dtype=np.float64) for v in self.values)
        if self.n_b > 0:
            for i, v in enumerate(vals):
                if np.any((v < 0) | (v > 1)) or np.any(np.isnan(v)):
                    raise DataError(f"fault probabilities of chain {i} must lie in [0, 1]")
        for v in vals:
            v.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def empty(self) -> bool:
        return self.n_b == 0

    @property
    def chain_lengths(self) -> list[int]:
        return [len(v) for v in self.values]

    @classmethod
    def empty_for(cls, chain_lengths: Sequence[int]) -> FaultProfile:
        return cls(tuple(np.full(n, np.nan) for n in chain_lengths), 0)

    @classmethod
    def pool(cls, profiles: Sequence[FaultProfile]) -> FaultProfile:
        """Combine profiles of problems sharing one embedding, weighting by ``n_b``."""
        profiles = list(profiles)
        if not profiles:
            raise DataError("nothing to pool")
        lengths = profiles[0].chain_lengths
        if any(p.chain_lengths != lengths for p in profiles):
            raise DataError("profiles describe different chain layouts")
        live = [p for p in profiles if not p.empty]
        if not live:
            return cls.empty_for(lengths)
        total = sum(p.n_b for p in live)
        values = tuple(sum(p.values[i] * p.n_b for p in live) / total for i in range(len(lengths)))
        return cls(tuple(np.clip(v, 0.0, 1.0) for v in values), total)

    def matrix(self) -> np.ndarray:
        """Rows = chain, columns = position; NaN pads shorter chains."""
        width = max(self.chain_lengths, default=0)
        out = np.full((len(self.values), width), np.nan)
        for i, v in enumerate(self.values):
            out[i, : len(v)] = v
        return out


@dataclass(frozen=True, eq=False)
class DecodedSampleSet:
    """Logical rows of ``states`` are zero where ``discarded`` is set."""

    states: np.ndarray
    discarded: np.ndarray
    broken: np.ndarray
    strategy: str

    def __len__(self):
        return self.states.shape[0]

    @property
    def n_broken(self) -> np.ndarray:
        return self.broken.sum(axis=1)

    @property
    def any_broken(self) -> np.ndarray:
        return self.broken.any(axis=1)

    def logical(self, s: int):
        """State of sample ``s`` as a tuple, or ``DISCARDED``."""
        if self.discarded[s]:
            return DISCARDED
        return tuple(int(v) for v in self.states[s])


def _columns(embedding: Embedding | EmbeddedModel) -> tuple[np.ndarray, ...]:
    if isinstance(embedding, EmbeddedModel):
        return embedding.chain_columns
    index = {q: p for p, q in enumerate(embedding.qubits)}
    return tuple(np.array([index[q] for q in c], dtype=np.int64) for c in embedding.chains)


def detect_breaks(sample, embedding: Embedding | EmbeddedModel) -> list[ChainReadout]:
    """Split one physical sample into chain readouts.

    ``sample`` is either a mapping ``qubit -> spin`` or a vector over the
    embedding's qubits in increasing id order.
    """
    emb = embedding.embedding if isinstance(embedding, EmbeddedModel) else embedding
    if isinstance(sample, Mapping):
        out = []
        for i, chain in enumerate(emb.chains):
            missing = [q for q in chain if q not in sample]
            if missing:
                raise DataError(f"sample has no value for qubits {missing} of chain {i}")
            out.append(ChainReadout(i, tuple(int(sample[q]) for q in chain)))
        return out
    arr = np.asarray(sample)
    if arr.ndim != 1 or arr.shape[0] != len(emb.qubits):
        raise DataError(f"sample covers {arr.shape} values, embedding uses {len(emb.qubits)} qubits")
    return [ChainReadout(i, tuple(int(v) for v in arr[cols])) for i, cols in enumerate(_columns(emb))]


def _tie_value(values: Sequence[int], rates: np.ndarray | None) -> int:
    if rates is not None and len(rates) == len(values):
        low = np.flatnonzero(rates == rates.min())
        held = {values[p] for p in low}
        if len(held) == 1:
            return held.pop()
    return values[0]


def _rates(profile: FaultProfile | None, i: int) -> np.ndarray | None:
    if profile is None or profile.empty:
        return None
    return profile.values[i]


def decode_discard(readouts: Sequence[ChainReadout]):
    if any(r.broken for r in readouts):
        return DISCARDED
    return tuple(r.values[0] for r in readouts)


def decode_majority(readouts: Sequence[ChainReadout], tie_breaker: FaultProfile | None = None) -> tuple[int, ...]:
    out = []
    for r in readouts:
        total = sum(r.values)
        if total:
            out.append(1 if total > 0 else -1)
        else:
            out.append(_tie_value(r.values, _rates(tie_breaker, r.index)))
    return tuple(out)


def weighted_scores(values: Sequence[int], rates: Sequence[float]) -> tuple[float, float]:
    """``(W(+1), W(-1))`` for one chain, unclamped."""
    p = np.asarray(rates, dtype=np.float64)
    v = np.asarray(values)
    if p.shape != v.shape:
        raise DataError(f"chain of length {len(v)} given {len(p)} fault rates")
    if np.any((p < 0) | (p > 1)):
        raise DataError("fault rates must lie in [0, 1]")
    plus = float(np.prod(p[v == 1]))
    minus = float(np.prod(p[v == -1]))
    return (1.0 - plus) * minus, (1.0 - minus) * plus


def decode_weighted(readouts: Sequence[ChainReadout], profile: FaultProfile,
                    clamp: float = CLAMP) -> tuple[int, ...]:
    """Weighted vote; rates are clipped to ``[clamp, 1 - clamp]`` first (``clamp=0`` disables)."""
    out = []
    for r in readouts:
        if not r.broken:
            out.append(r.values[0])
            continue
        if profile.empty:
            raise DataError("weighted decoding of a broken chain needs a non-empty fault profile")
        if r.index >= len(profile.values) or len(profile.values[r.index]) != len(r):
            raise DataError(f"profile does not cover chain {r.index}")
        rates = np.clip(profile.values[r.index], clamp, 1.0 - clamp)
        w_plus, w_minus = weighted_scores(r.values, rates)
        if w_plus > w_minus:
            out.append(1)
        elif w_minus > w_plus:
            out.append(-1)
        else:
            out.append(_tie_value(r.values, profile.values[r.index]))
    return tuple(out)


def chain_values(samples: np.ndarray, columns: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Per chain, an ``(S, |T_i|)`` array of physical spins in chain order."""
    samples = np.asarray(samples)
    return [samples[:, cols] for cols in columns]


def _tie_column(vals: np.ndarray, rates: np.ndarray | None) -> np.ndarray:
    if rates is None:
        return vals[:, 0]
    low = np.flatnonzero(rates == rates.min())
    sub = vals[:, low]
    agree = np.all(sub == sub[:, :1], axis=1)
    return np.where(agree, sub[:, 0], vals[:, 0])


def decode_batch(samples: np.ndarray, embedding: Embedding | EmbeddedModel, strategy: str,
                 profile: FaultProfile | None = None, clamp: float = CLAMP) -> DecodedSampleSet:
    """Vectorized decoding of ``samples`` (rows over qubits in id order).

    Row for row this agrees with :func:`decode_discard`,
    :func:`decode_majority` (``profile`` as tie-breaker) and
    :func:`decode_weighted`.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    samples = np.asarray(samples, dtype=np.int8)
    columns = _columns(embedding)
    chains = chain_values(samples, columns)
    S, n = samples.shape[0], len(columns)
    broken = np.zeros((S, n), dtype=bool)
    states = np.zeros((S, n), dtype=np.int8)
    for i, vals in enumerate(chains):
        broken[:, i] = vals.min(axis=1) != vals.max(axis=1)
        first = vals[:, 0]
        if strategy == "discard":
            states[:, i] = first
        elif strategy == "majority":
            total = vals.sum(axis=1, dtype=np.int64)
            tie = _tie_column(vals, _rates(profile, i))
            states[:, i] = np.where(total > 0, 1, np.where(total < 0, -1, tie))
        else:
            if broken[:, i].any():
                if profile is None or profile.empty:
                    raise DataError("weighted decoding of a broken chain needs a non-empty fault profile")
                raw = profile.values[i]
                if len(raw) != vals.shape[1]:
                    raise DataError(f"profile does not cover chain {i}")
                p = np.clip(raw, clamp, 1.0 - clamp)
                plus = np.prod(np.where(vals == 1, p, 1.0), axis=1)
                minus = np.prod(np.where(vals == -1, p, 1.0), axis=1)
                w_plus = (1.0 - plus) * minus
                w_minus = (1.0 - minus) * plus
                tie = _tie_column(vals, raw)
                choice = np.where(w_plus > w_minus, 1, np.where(w_minus > w_plus, -1, tie))
                states[:, i] = np.where(broken[:, i], choice, first)
            else:
                states[:, i] = first
    discarded = broken.any(axis=1) if strategy == "discard" else np.zeros(S, dtype=bool)
    states[discarded] = 0
    return DecodedSampleSet(states, discarded, broken, strategy)


def nearest_ground(logical: np.ndarray, ground: GroundStateReport) -> np.ndarray:
    """For each logical row, the ground state at minimum Hamming distance (first on ties)."""
    logical = np.atleast_2d(logical)
    dist = (logical[:, None, :] != ground.states[None, :, :]).sum(axis=2)
    return ground.states[np.argmin(dist, axis=1)]


def estimate_fault_profile(samples: np.ndarray, embedding: Embedding | EmbeddedModel,
                           ground: GroundStateReport) -> FaultProfile:
    """Fraction of broken samples in which each chain position disagrees with the ground state.

    Only samples with at least one broken chain are counted.  With several
    ground states, each sample is compared with the ground state nearest to
    its majority-vote decoding.
    """
    samples = np.asarray(samples, dtype=np.int8)
    columns = _columns(embedding)
    lengths = [len(c) for c in columns]
    if ground.states.shape[1] != len(columns):
        raise DataError(f"ground state has {ground.states.shape[1]} spins, embedding has {len(columns)} chains")
    chains = chain_values(samples, columns)
    broken = np.zeros(samples.shape[0], dtype=bool)
    for vals in chains:
        broken |= vals.min(axis=1) != vals.max(axis=1)
    n_b = int(broken.sum())
    if n_b == 0:
        return FaultProfile.empty_for(lengths)
    if ground.degeneracy == 1:
        target = np.broadcast_to(ground.states[0], (n_b, len(columns)))
    else:
        majority = decode_batch(samples[broken], embedding, "majority").states
        target = nearest_ground(majority, ground)
    values = []
    for i, vals in enumerate(chains):
        wrong = vals[broken] != target[:, [i]]
        values.append(wrong.sum(axis=0) / n_b)
    return FaultProfile(tuple(values), n_b)
