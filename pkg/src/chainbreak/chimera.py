"""Chimera hardware graph, clique embedding and the embedded physical model.

Qubit numbering follows the usual linear Chimera convention::

    qubit = ((row * cols + col) * 2 + shore) * L + index

``shore == 0`` qubits are *vertical*: they couple to the same
``(shore, index)`` qubit in the cell below.  ``shore == 1`` qubits are
*horizontal* and couple to the cell on the right.  Within a cell every
vertical qubit couples to every horizontal qubit (a K_{L,L} block).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, DimensionError, EmbeddingError
from .ising import IsingModel

VERTICAL, HORIZONTAL = 0, 1


@dataclass(frozen=True)
class ChimeraGraph:
    """An ``rows x cols`` grid of K_{L,L} unit cells."""

    rows: int
    cols: int
    shore: int = 4

    def __post_init__(self):
        if min(self.rows, self.cols, self.shore) < 1:
            raise ValueError(f"Chimera dimensions must be >= 1, got {self.rows}x{self.cols}x{self.shore}")

    @property
    def num_qubits(self) -> int:
        return 2 * self.shore * self.rows * self.cols

    def qubit(self, row: int, col: int, shore: int, index: int) -> int:
        L = self.shore
        if not (0 <= row < self.rows and 0 <= col < self.cols and shore in (0, 1) and 0 <= index < L):
            raise IndexError(f"no qubit at ({row}, {col}, {shore}, {index})")
        return ((row * self.cols + col) * 2 + shore) * L + index

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        """Inverse of :meth:`qubit`."""
        if not 0 <= q < self.num_qubits:
            raise IndexError(f"qubit {q} outside graph of {self.num_qubits}")
        L = self.shore
        index = q % L
        q //= L
        shore = q % 2
        q //= 2
        return q // self.cols, q % self.cols, shore, index

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        """All couplers as ``(u, v)`` with ``u < v``."""
        out = set()
        L = self.shore
        for r in range(self.rows):
            for c in range(self.cols):
                for a in range(L):
                    va = self.qubit(r, c, VERTICAL, a)
                    for b in range(L):
                        hb = self.qubit(r, c, HORIZONTAL, b)
                        out.add((min(va, hb), max(va, hb)))
                    if r + 1 < self.rows:
                        out.add((va, self.qubit(r + 1, c, VERTICAL, a)))
                    ha = self.qubit(r, c, HORIZONTAL, a)
                    if c + 1 < self.cols:
                        out.add((ha, self.qubit(r, c + 1, HORIZONTAL, a)))
        return frozenset(out)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {q: set() for q in range(self.num_qubits)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {q: frozenset(nb) for q, nb in adj.items()}

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, q: int) -> int:
        return len(self.adjacency[q])

    @classmethod
    def parse(cls, text: str) -> ChimeraGraph:
        """Parse ``"16x16x4"`` (or ``"16x16"``, shore 4)."""
        parts = [int(p) for p in text.lower().split("x")]
        if len(parts) == 2:
            parts.append(4)
        if len(parts) != 3:
            raise ValueError(f"cannot parse Chimera shape {text!r}")
        return cls(*parts)


def build_chimera(rows: int, cols: int, shore: int = 4) -> ChimeraGraph:
    return ChimeraGraph(rows, cols, shore)


@dataclass(frozen=True)
class Embedding:
    """Chains ``chains[i]`` of physical qubits, one per logical spin ``i``.

    Chain order matters: positions within a chain index the fault profile,
    and consecutive qubits are the chain's coupling path.
    """

    chains: tuple[tuple[int, ...], ...]
    graph: ChimeraGraph

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(tuple(int(q) for q in c) for c in self.chains))

    @property
    def n(self) -> int:
        return len(self.chains)

    @property
    def chain_lengths(self) -> list[int]:
        return [len(c) for c in self.chains]

    @cached_property
    def qubits(self) -> tuple[int, ...]:
        """All embedded qubits in increasing id order."""
        return tuple(sorted(q for c in self.chains for q in c))

    @cached_property
    def owner(self) -> dict[int, int]:
        return {q: i for i, c in enumerate(self.chains) for q in c}

    def chain_tree(self, i: int) -> list[tuple[int, int]]:
        """Hardware edges carrying the chain coupling for chain ``i``.

        When consecutive chain qubits are adjacent the chain is a path and
        that path is returned; otherwise a BFS spanning tree rooted at the
        first qubit (neighbours visited in chain order).
        """
        chain = self.chains[i]
        g = self.graph
        if all(g.has_edge(a, b) for a, b in zip(chain, chain[1:])):
            return [(min(a, b), max(a, b)) for a, b in zip(chain, chain[1:])]
        members = set(chain)
        order = {q: p for p, q in enumerate(chain)}
        seen = {chain[0]}
        queue = deque([chain[0]])
        tree = []
        while queue:
            u = queue.popleft()
            for v in sorted(g.adjacency[u] & members, key=order.__getitem__):
                if v not in seen:
                    seen.add(v)
                    tree.append((min(u, v), max(u, v)))
                    queue.append(v)
        if len(seen) != len(chain):
            raise EmbeddingError(f"chain {i} is not connected in the hardware graph")
        return tree

    def cross_edges(self, i: int, j: int) -> list[tuple[int, int]]:
        """Hardware edges joining chains ``i`` and ``j``."""
        g = self.graph
        out = []
        for a in self.chains[i]:
            for b in g.adjacency[a]:
                if self.owner.get(b) == j:
                    out.append((min(a, b), max(a, b)))
        return sorted(out)


def clique_embed(n: int, graph: ChimeraGraph, origin: tuple[int, int] = (0, 0)) -> Embedding:
    """Deterministic embedding of K_n with every chain of length ``n/L + 1``.

    Logical spin ``i`` belongs to block ``b = i // L`` and uses index
    ``t = i % L`` inside each cell.  Its chain runs along row ``b`` on the
    horizontal shore through cells ``(b, 0) .. (b, b)``, turns inside the
    diagonal cell ``(b, b)`` and continues down column ``b`` on the vertical
    shore through ``(b, b) .. (c-1, b)``, with ``c = n / L``.  Two chains in
    the same block meet inside their diagonal cell; chains in blocks
    ``b1 < b2`` meet in cell ``(b2, b1)``.  The construction occupies a
    ``c x c`` block of cells whose top-left corner is ``origin``.
    """
    L = graph.shore
    if n < 1 or n % L:
        raise EmbeddingError(f"clique embedding needs n to be a positive multiple of L={L}, got n={n}")
    c = n // L
    r0, c0 = origin
    if r0 < 0 or c0 < 0 or r0 + c > graph.rows or c0 + c > graph.cols:
        raise CapacityError(
            f"K_{n} clique embedding needs a {c}x{c} block of cells ({c * c} cells) starting at {origin}; "
            f"graph is {graph.rows}x{graph.cols}"
        )
    chains = []
    for i in range(n):
        b, t = divmod(i, L)
        chain = [graph.qubit(r0 + b, c0 + col, HORIZONTAL, t) for col in range(b + 1)]
        chain += [graph.qubit(r0 + row, c0 + b, VERTICAL, t) for row in range(b, c)]
        chains.append(tuple(chain))
    return Embedding(tuple(chains), graph)


@dataclass(frozen=True)
class Violation:
    kind: str  # "disjointness" | "connectivity" | "coverage" | "range"
    detail: str
    chains: tuple[int, ...] = ()


def _connected(chain, adjacency) -> bool:
    members = set(chain)
    if not members:
        return False
    start = next(iter(members))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adjacency[u] & members:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == members


def validate_embedding(e: Embedding, logical: IsingModel | None = None,
                       require_complete: bool = False) -> list[Violation]:
    """Check an embedding; an empty list means valid.

    Coverage is checked against the couplings of ``logical`` or, with
    ``require_complete``, against every pair (K_n).
    """
    out: list[Violation] = []
    g = e.graph
    seen: dict[int, int] = {}
    for i, chain in enumerate(e.chains):
        bad = [q for q in chain if not 0 <= q < g.num_qubits]
        if bad:
            out.append(Violation("range", f"chain {i} uses qubits outside the graph: {bad}", (i,)))
            continue
        for q in chain:
            if q in seen and seen[q] != i:
                out.append(Violation("disjointness", f"qubit {q} shared by chains {seen[q]} and {i}", (seen[q], i)))
            seen.setdefault(q, i)
        if not _connected(chain, g.adjacency):
            out.append(Violation("connectivity", f"chain {i} is not connected", (i,)))
    if logical is not None and logical.n != e.n:
        out.append(Violation("coverage", f"embedding has {e.n} chains, logical model has {logical.n} spins"))
        return out
    if require_complete:
        pairs = [(i, j) for i in range(e.n) for j in range(i + 1, e.n)]
    elif logical is not None:
        pairs = logical.edges
    else:
        pairs = []
    if any(v.kind == "range" for v in out):
        return out
    for i, j in pairs:
        if not e.cross_edges(i, j):
            out.append(Violation("coverage", f"no hardware edge joins chains {i} and {j}", (i, j)))
    return out


@dataclass(frozen=True, eq=False)
class EmbeddedModel:
    """Physical Ising model produced from a logical model and an embedding.

    Physical coefficients use the same plus-sign energy convention as the
    logical model.  ``beta`` is carried over from the logical model so that
    an unbroken configuration has energy ``E_logical + k * len(intra)``.
    """

    logical: IsingModel
    embedding: Embedding
    k: float
    physical_h: dict[int, float]
    inter: dict[tuple[int, int], float]
    intra: dict[tuple[int, int], float]

    @property
    def beta(self) -> float:
        return self.logical.beta

    @cached_property
    def qubits(self) -> tuple[int, ...]:
        return self.embedding.qubits

    @cached_property
    def physical_j(self) -> dict[tuple[int, int], float]:
        out = dict(self.inter)
        out.update(self.intra)
        return out

    @cached_property
    def index(self) -> dict[int, int]:
        """Qubit id -> dense column position (qubit-id order)."""
        return {q: p for p, q in enumerate(self.qubits)}

    @cached_property
    def chain_columns(self) -> tuple[np.ndarray, ...]:
        """For each chain, dense column positions of its qubits in chain order."""
        return tuple(np.array([self.index[q] for q in c], dtype=np.int64) for c in self.embedding.chains)

    def dense(self) -> tuple[np.ndarray, np.ndarray, float]:
        """``(h, J_upper, beta)`` over qubits in qubit-id order."""
        nq = len(self.qubits)
        h = np.array([self.physical_h[q] for q in self.qubits])
        jm = np.zeros((nq, nq))
        for (u, v), w in self.physical_j.items():
            a, b = self.index[u], self.index[v]
            jm[min(a, b), max(a, b)] += w
        return h, jm, self.beta

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(h, indptr, neighbors, weights)`` adjacency in dense qubit order."""
        nq = len(self.qubits)
        h = np.array([self.physical_h[q] for q in self.qubits])
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(nq)]
        for (u, v), w in sorted(self.physical_j.items()):
            a, b = self.index[u], self.index[v]
            nbrs[a].append((b, w))
            nbrs[b].append((a, w))
        indptr = np.zeros(nq + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        neighbors = np.array([b for x in nbrs for b, _ in x], dtype=np.int64)
        weights = np.array([w for x in nbrs for _, w in x], dtype=np.float64)
        return h, indptr, neighbors, weights

    def as_ising(self) -> IsingModel:
        """The physical model as a plain :class:`IsingModel` over dense columns."""
        h, jm, beta = self.dense()
        J = {(int(a), int(b)): float(jm[a, b]) for a, b in zip(*np.nonzero(jm))}
        return IsingModel(len(self.qubits), h, J, beta)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Physical energies of spin rows over qubits in qubit-id order."""
        spins = np.asarray(spins, dtype=np.float64)
        if spins.ndim != 2 or spins.shape[1] != len(self.qubits):
            raise DimensionError(f"expected shape (S, {len(self.qubits)}), got {spins.shape}")
        h, jm, beta = self.dense()
        return spins @ h + np.einsum("si,si->s", spins @ jm, spins) + beta

    def unembed_unanimous(self, logical_spins: np.ndarray) -> np.ndarray:
        """Physical rows in which every chain copies its logical value."""
        logical_spins = np.atleast_2d(np.asarray(logical_spins, dtype=np.int8))
        out = np.empty((logical_spins.shape[0], len(self.qubits)), dtype=np.int8)
        for i, cols in enumerate(self.chain_columns):
            out[:, cols] = logical_spins[:, [i]]
        return out


def embed_model(logical: IsingModel, e: Embedding, k: float) -> EmbeddedModel:
    """Split logical biases and couplings over chains and add chain coupling ``k``.

    Each qubit of chain ``i`` gets ``h_i / |T_i|``; each hardware edge between
    chains ``i`` and ``j`` gets ``J_ij / edges(T_i, T_j)``; each edge of the
    chain's coupling tree (see :meth:`Embedding.chain_tree`) gets ``k``.
    """
    if logical.n != e.n:
        raise EmbeddingError(f"embedding has {e.n} chains, logical model has {logical.n} spins")
    physical_h: dict[int, float] = {}
    for i, chain in enumerate(e.chains):
        if not chain:
            raise EmbeddingError(f"chain {i} is empty")
        share = float(logical.h[i]) / len(chain)
        for q in chain:
            physical_h[q] = share
    inter: dict[tuple[int, int], float] = {}
    for (i, j), value in logical.J.items():
        edges = e.cross_edges(i, j)
        if not edges:
            raise EmbeddingError(f"logical coupling ({i}, {j}) has no hardware edge between its chains")
        share = value / len(edges)
        for edge in edges:
            inter[edge] = share
    intra: dict[tuple[int, int], float] = {}
    for i in range(e.n):
        for edge in e.chain_tree(i):
            intra[edge] = float(k)
    return EmbeddedModel(logical, e, float(k), physical_h, inter, intra)
