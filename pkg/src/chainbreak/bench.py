"""Chain-break metrics and the chain-strength sweep harness.

Per problem, over ``N_s`` samples:

* ``p_s`` - fraction of samples whose decoded state reaches the ground energy
  (discarded samples count as failures),
* ``p_b`` - fraction of samples with at least one broken chain,
* ``r_b`` - mean fraction of broken chains per sample.

Suite figures are unweighted means over problems.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from . import io
from .chimera import ChimeraGraph, clique_embed, embed_model
from .decode import STRATEGIES, FaultProfile, decode_batch, estimate_fault_profile
from .errors import ChainbreakError, DataError
from .ising import brute_force_solve
from .sampler import AnnealSchedule, NoiseConfig, sample
from .seeding import hash64

DEFAULT_K_VALUES = (0.0, -0.25, -0.5, -1.0, -1.5, -2.0)
HEATMAP_K = -0.5
SUCCESS_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProblemResult:
    problem_id: str
    success: np.ndarray  # delta_i
    broken: np.ndarray  # epsilon_i
    n_broken: np.ndarray  # c_b per sample
    n_chains: int

    def __post_init__(self):
        s = len(self.success)
        if len(self.broken) != s or len(self.n_broken) != s:
            raise DataError("flag vectors must all have length N_s")
        if np.any((self.n_broken < 0) | (self.n_broken > self.n_chains)):
            raise DataError("broken-chain counts must lie in [0, n_chains]")

    @property
    def n_samples(self) -> int:
        return len(self.success)


def _need_samples(result: ProblemResult) -> None:
    if result.n_samples < 1:
        raise DataError(f"problem {result.problem_id!r} has no samples")


def prob_success(result: ProblemResult) -> float:
    _need_samples(result)
    return float(np.mean(result.success))


def prob_broken(result: ProblemResult) -> float:
    _need_samples(result)
    return float(np.mean(result.broken))


def ratio_broken(result: ProblemResult) -> float:
    _need_samples(result)
    return float(np.mean(np.asarray(result.n_broken) / result.n_chains))


def aggregate(results: Sequence[ProblemResult]) -> tuple[float, float, float]:
    """Suite means ``(p_s, p_b, r_b)``, each problem weighted equally."""
    if not results:
        raise DataError("cannot aggregate an empty problem set")
    return (
        float(np.mean([prob_success(r) for r in results])),
        float(np.mean([prob_broken(r) for r in results])),
        float(np.mean([ratio_broken(r) for r in results])),
    )


def significantly_greater(p1: float, n1: int, p2: float, n2: int, confidence: float = 0.99) -> bool:
    """One-sided pooled two-proportion z-test of ``p1 > p2``."""
    pooled = (p1 * n1 + p2 * n2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    if var <= 0:
        return False
    z = (p1 - p2) / math.sqrt(var)
    return z > NormalDist().inv_cdf(confidence)


def score(decoded, model, ground, problem_id: str = "") -> ProblemResult:
    """Turn decoded samples into success and break flags."""
    energies = model.energies(decoded.states)
    success = (~decoded.discarded) & (np.abs(energies - ground.energy) <= SUCCESS_ATOL)
    return ProblemResult(problem_id, success, decoded.any_broken, decoded.n_broken, decoded.states.shape[1])


@dataclass
class SweepCell:
    n: int
    k: float
    strategy: str
    p_s: float
    p_b: float
    r_b: float
    n_problems: int
    n_samples: int
    n_errors: int = 0

    @property
    def complete(self) -> bool:
        return self.n_errors == 0 and self.n_problems > 0


@dataclass
class SweepResult:
    k_values: tuple[float, ...]
    sizes: tuple[int, ...]
    strategies: tuple[str, ...]
    cells: list[SweepCell] = field(default_factory=list)
    profiles: dict[tuple[int, float], FaultProfile] = field(default_factory=dict)
    problem_results: dict[tuple[int, float, str], list[ProblemResult]] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    def cell(self, n: int, k: float, strategy: str) -> SweepCell:
        for c in self.cells:
            if c.n == n and c.k == k and c.strategy == strategy:
                return c
        raise KeyError((n, k, strategy))

    @property
    def complete(self) -> bool:
        expected = len(self.k_values) * len(self.sizes) * len(self.strategies)
        return len(self.cells) == expected and all(c.complete for c in self.cells)


def cell_seed(seed: int, n: int, index: int, k: float) -> int:
    """Sampling seed of problem ``index`` (within size ``n``) at chain strength ``k``."""
    return hash64(seed, n, index, int(np.float64(k).view(np.int64)))


def k_label(k: float) -> str:
    return f"{k:g}"


def _fingerprint(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _run_cell(problems, n, k, graph, n_samples, schedule, noise, strategies, seed, workers):
    embedding = clique_embed(n, graph)
    rows: dict[str, list[ProblemResult]] = {s: [] for s in strategies}
    samples, profiles, errors = [], [], []
    for index, prob in enumerate(problems):
        ground = prob.ground
        if ground is None:
            try:
                ground = brute_force_solve(prob.model)
            except ChainbreakError as exc:
                errors.append(f"{prob.id}: {exc}")
                continue
        em = embed_model(prob.model, embedding, k)
        ss = sample(em, n_samples, schedule, noise, cell_seed(seed, n, index, k), workers=workers)
        profiles.append(estimate_fault_profile(ss.samples, em, ground))
        samples.append((prob, em, ground, ss.samples))
    profile = FaultProfile.pool(profiles) if profiles else FaultProfile.empty_for(embedding.chain_lengths)
    for prob, em, ground, phys in samples:
        for strategy in strategies:
            decoded = decode_batch(phys, em, strategy, profile)
            rows[strategy].append(score(decoded, prob.model, ground, prob.id))
    return rows, profile, errors


def run_sweep(problems: Sequence[io.Problem], k_values: Sequence[float] = DEFAULT_K_VALUES,
              schedule: AnnealSchedule | None = None, noise: NoiseConfig | None = None,
              strategies: Sequence[str] = STRATEGIES, seed: int = 0, *, n_samples: int = 500,
              graph: ChimeraGraph | None = None, workers: int | None = None, out_dir=None,
              progress: Callable[[str], None] | None = None) -> SweepResult:
    """Embed, sample, decode and score every problem at every chain strength.

    Problems are grouped by size; one cell is one ``(n, k)`` pair and holds a
    row per strategy.  All strategies of a cell decode the same samples, and
    the weighted strategy uses the fault profile pooled over that cell.
    With ``out_dir`` each finished cell is checkpointed under
    ``out_dir/cells`` and reused by a later call with identical inputs.
    """
    schedule = schedule or AnnealSchedule()
    noise = noise or NoiseConfig()
    graph = graph or ChimeraGraph(16, 16, 4)
    strategies = tuple(strategies)
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}")
    if not problems:
        raise DataError("the suite is empty")
    by_size: dict[int, list[io.Problem]] = {}
    for p in problems:
        by_size.setdefault(p.n, []).append(p)
    sizes = tuple(sorted(by_size))
    k_values = tuple(float(k) for k in k_values)
    result = SweepResult(k_values, sizes, strategies)
    cell_dir = Path(out_dir) / "cells" if out_dir is not None else None
    if cell_dir is not None:
        cell_dir.mkdir(parents=True, exist_ok=True)
    for n in sizes:
        group = by_size[n]
        for k in k_values:
            key = {
                "n": n, "k": k, "seed": seed, "n_samples": n_samples, "strategies": list(strategies),
                "schedule": asdict(schedule), "noise": asdict(noise),
                "graph": [graph.rows, graph.cols, graph.shore],
                "problems": [p.id for p in group],
                "models": _fingerprint([io.problem_to_dict(p.model) for p in group]),
            }
            fp = _fingerprint(key)
            path = cell_dir / f"n{n}_k{k_label(k)}.json" if cell_dir is not None else None
            if path is not None and path.exists():
                saved = json.loads(path.read_text())
                if saved.get("fingerprint") == fp:
                    result.cells.extend(SweepCell(**c) for c in saved["cells"])
                    result.profiles[(n, k)] = FaultProfile(tuple(np.array(v) for v in saved["profile"]),
                                                           saved["n_b"])
                    result.errors.extend(saved["errors"])
                    if progress:
                        progress(f"n={n} k={k_label(k)}: reused checkpoint")
                    continue
            rows, profile, errors = _run_cell(group, n, k, graph, n_samples, schedule, noise,
                                              strategies, seed, workers)
            cells = []
            for strategy in strategies:
                res = rows[strategy]
                if res:
                    p_s, p_b, r_b = aggregate(res)
                else:
                    p_s = p_b = r_b = float("nan")
                cells.append(SweepCell(n, k, strategy, p_s, p_b, r_b, len(res), n_samples, len(errors)))
                result.problem_results[(n, k, strategy)] = res
            result.cells.extend(cells)
            result.profiles[(n, k)] = profile
            result.errors.extend(errors)
            if path is not None:
                path.write_text(json.dumps({
                    "fingerprint": fp, "cells": [asdict(c) for c in cells],
                    "profile": [v.tolist() for v in profile.values], "n_b": profile.n_b, "errors": errors,
                }))
            if progress:
                summary = " ".join(f"{c.strategy}:p_s={c.p_s:.3f}" for c in cells)
                progress(f"n={n} k={k_label(k)}: p_b={cells[0].p_b:.3f} r_b={cells[0].r_b:.3f} {summary}")
    return result


SWEEP_COLUMNS = ("n", "k", "strategy", "p_s", "p_b", "r_b", "n_problems", "n_samples")


def write_sweep(out_dir, result: SweepResult, manifest: dict | None = None) -> list[Path]:
    """Write ``sweep.csv``, one heatmap CSV per ``(n, k)`` and ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "sweep.csv"]
    with written[0].open("w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(SWEEP_COLUMNS)
        for c in sorted(result.cells, key=lambda c: (c.n, -c.k, result.strategies.index(c.strategy))):
            wr.writerow([c.n, io.fmt(c.k), c.strategy, io.fmt(c.p_s), io.fmt(c.p_b), io.fmt(c.r_b),
                         c.n_problems, c.n_samples])
    for (n, k), profile in sorted(result.profiles.items(), key=lambda t: (t[0][0], -t[0][1])):
        path = out / f"heatmap_n{n}_k{k_label(k)}.csv"
        io.write_profile(path, profile, value_name="p_q")
        written.append(path)
    man = {
        "format_version": io.FORMAT_VERSION,
        "k_values": list(result.k_values),
        "sizes": list(result.sizes),
        "strategies": list(result.strategies),
        "complete": result.complete,
        "errors": result.errors,
    }
    man.update(manifest or {})
    io.write_json(out / "manifest.json", man)
    written.append(out / "manifest.json")
    return written
