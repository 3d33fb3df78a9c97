"""JSON and CSV file formats shared by the CLI subcommands.

Problem file::

    {"n": 8, "h": [...], "j": [[i, j, value], ...], "beta": 0.0,
     "ground": {"energy": -1.0, "states": [[1, -1, ...], ...]}}   # ground optional

Embedding file::

    {"n": 8, "graph": {"m": 16, "n": 16, "l": 4}, "chains": [[qubit, ...], ...]}

Embedded-model file: the logical problem, its embedding, ``k`` and the
physical terms, with each coupler tagged ``"inter"`` or ``"intra"``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chimera import ChimeraGraph, EmbeddedModel, Embedding
from .decode import DecodedSampleSet, FaultProfile
from .errors import DataError
from .ising import GroundStateReport, IsingModel
from .sampler import AnnealSchedule, NoiseConfig, PhysicalSampleSet

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Problem:
    id: str
    model: IsingModel
    ground: GroundStateReport | None = None

    @property
    def n(self) -> int:
        return self.model.n


def fmt(x: float) -> str:
    """Shortest round-trip text for a float (stable across runs)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def problem_to_dict(model: IsingModel, ground: GroundStateReport | None = None, **extra) -> dict:
    d = {
        "n": model.n,
        "h": [float(v) for v in model.h],
        "j": [[i, j, float(v)] for (i, j), v in sorted(model.J.items())],
        "beta": model.beta,
    }
    if ground is not None:
        d["ground"] = {"energy": ground.energy, "states": ground.states.astype(int).tolist()}
    d.update(extra)
    return d


def problem_from_dict(d: dict, default_id: str = "") -> Problem:
    try:
        model = IsingModel(int(d["n"]), d["h"], [tuple(t) for t in d.get("j", [])], float(d.get("beta", 0.0)))
    except KeyError as exc:
        raise DataError(f"problem is missing field {exc}") from None
    ground = None
    if d.get("ground"):
        g = d["ground"]
        ground = GroundStateReport(g["energy"], np.array(g["states"], dtype=np.int8).reshape(-1, model.n))
    return Problem(str(d.get("id", default_id)), model, ground)


def save_problem(path, model: IsingModel, ground: GroundStateReport | None = None, **extra) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(model, ground, **extra), indent=1))


def load_problem(path) -> Problem:
    path = Path(path)
    return problem_from_dict(json.loads(path.read_text()), default_id=path.stem)


def load_suite(directory) -> list[Problem]:
    """Every ``*.json`` problem file in ``directory`` (manifest excluded), sorted by name."""
    directory = Path(directory)
    out = []
    for p in sorted(directory.glob("*.json")):
        d = json.loads(p.read_text())
        if "h" in d and "n" in d:
            out.append(problem_from_dict(d, default_id=p.stem))
    return out


def embedding_to_dict(e: Embedding) -> dict:
    g = e.graph
    return {"n": e.n, "graph": {"m": g.rows, "n": g.cols, "l": g.shore}, "chains": [list(c) for c in e.chains]}


def embedding_from_dict(d: dict) -> Embedding:
    g = d["graph"]
    e = Embedding(tuple(tuple(c) for c in d["chains"]), ChimeraGraph(int(g["m"]), int(g["n"]), int(g.get("l", 4))))
    if "n" in d and int(d["n"]) != e.n:
        raise DataError(f"embedding declares n={d['n']} but has {e.n} chains")
    return e


def embedded_to_dict(em: EmbeddedModel) -> dict:
    j = [[u, v, w, "inter"] for (u, v), w in sorted(em.inter.items())]
    j += [[u, v, w, "intra"] for (u, v), w in sorted(em.intra.items())]
    j.sort(key=lambda t: (t[0], t[1]))
    return {
        "format_version": FORMAT_VERSION,
        "k": em.k,
        "qubits": list(em.qubits),
        "h": [[q, em.physical_h[q]] for q in em.qubits],
        "j": j,
        "beta": em.beta,
        "embedding": embedding_to_dict(em.embedding),
        "logical": problem_to_dict(em.logical),
    }


def embedded_from_dict(d: dict) -> EmbeddedModel:
    logical = problem_from_dict(d["logical"]).model
    emb = embedding_from_dict(d["embedding"])
    h = {int(q): float(v) for q, v in d["h"]}
    inter, intra = {}, {}
    for u, v, w, tag in d["j"]:
        key = (min(int(u), int(v)), max(int(u), int(v)))
        if tag == "inter":
            inter[key] = float(w)
        elif tag == "intra":
            intra[key] = float(w)
        else:
            raise DataError(f"unknown coupler tag {tag!r}")
    return EmbeddedModel(logical, emb, float(d["k"]), h, inter, intra)


def load_embedding(path) -> Embedding:
    """Read an embedding file, or pull the embedding out of an embedded-model file."""
    d = json.loads(Path(path).read_text())
    if "embedding" in d:
        d = d["embedding"]
    return embedding_from_dict(d)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True))


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_samples(path, ss: PhysicalSampleSet) -> None:
    """CSV rows ``sample, q<id>..., energy`` plus a JSON sidecar with the configs."""
    path = Path(path)
    with path.open("w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["sample", *(f"q{q}" for q in ss.qubits), "energy"])
        for s in range(len(ss)):
            wr.writerow([s, *ss.samples[s].tolist(), fmt(ss.energies[s])])
    write_json(sidecar_path(path), {"format_version": FORMAT_VERSION, **ss.config()})


def read_samples(path) -> PhysicalSampleSet:
    path = Path(path)
    with path.open(newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0][0] != "sample" or rows[0][-1] != "energy":
        raise DataError(f"{path} is not a sample file")
    qubits = tuple(int(c[1:]) for c in rows[0][1:-1])
    body = rows[1:]
    samples = np.array([[int(v) for v in r[1:-1]] for r in body], dtype=np.int8).reshape(len(body), len(qubits))
    energies = np.array([float(r[-1]) for r in body])
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    schedule = AnnealSchedule(**meta["schedule"]) if "schedule" in meta else AnnealSchedule()
    noise = NoiseConfig(**meta["noise"]) if "noise" in meta else NoiseConfig()
    return PhysicalSampleSet(samples, energies, qubits, int(meta.get("seed", 0)), schedule, noise,
                             sweeps=int(meta.get("sweeps", 0)))


def align_samples(ss: PhysicalSampleSet, embedding: Embedding) -> np.ndarray:
    """Sample columns reordered to the embedding's qubit order."""
    col = {q: c for c, q in enumerate(ss.qubits)}
    missing = [q for q in embedding.qubits if q not in col]
    if missing:
        raise DataError(f"samples have no values for embedded qubits {missing[:8]}")
    return ss.samples[:, [col[q] for q in embedding.qubits]]


def write_decoded(path, decoded: DecodedSampleSet) -> None:
    n = decoded.states.shape[1]
    with Path(path).open("w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["sample", *(f"s{i}" for i in range(n)), "discarded", "n_broken"])
        nb = decoded.n_broken
        for s in range(len(decoded)):
            spins = [""] * n if decoded.discarded[s] else decoded.states[s].tolist()
            wr.writerow([s, *spins, int(decoded.discarded[s]), int(nb[s])])


def write_profile(path, profile: FaultProfile, value_name: str = "p_hat") -> None:
    with Path(path).open("w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["chain", "position", value_name, "n_b"])
        for i, vals in enumerate(profile.values):
            for p, v in enumerate(vals):
                wr.writerow([i, p, fmt(v), profile.n_b])


def read_profile(path) -> FaultProfile:
    with Path(path).open(newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise DataError(f"{path} holds no profile rows")
    key = "p_hat" if "p_hat" in rows[0] else "p_q"
    chains: dict[int, dict[int, float]] = {}
    n_b = set()
    for r in rows:
        chains.setdefault(int(r["chain"]), {})[int(r["position"])] = float(r[key])
        n_b.add(int(r["n_b"]))
    if len(n_b) != 1:
        raise DataError("profile rows disagree on n_b")
    if sorted(chains) != list(range(len(chains))):
        raise DataError("profile chains are not numbered 0..N-1")
    values = []
    for i in range(len(chains)):
        pos = chains[i]
        if sorted(pos) != list(range(len(pos))):
            raise DataError(f"profile chain {i} has gaps in its positions")
        values.append(np.array([pos[p] for p in range(len(pos))]))
    return FaultProfile(tuple(values), n_b.pop())
