"""Command-line entry point: ``chainbreak <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import io
from .bench import DEFAULT_K_VALUES, run_sweep, write_sweep
from .chimera import ChimeraGraph, clique_embed, embed_model, validate_embedding
from .decode import STRATEGIES, decode_batch, estimate_fault_profile
from .errors import ChainbreakError
from .ising import brute_force_solve
from .portfolio import SuiteConfig, generate_suite
from .sampler import AnnealSchedule, NoiseConfig, sample

log = logging.getLogger("chainbreak")

WEIGHTED_NOTE = (
    "The weighted strategy needs a fault profile, and profiles are estimated "
    "against the known ground state (see the 'profile' command).  It is a "
    "benchmarking diagnostic, not a blind decoder."
)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _beta_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi or lo)


def _schedule(args) -> AnnealSchedule:
    b0, b1 = _beta_range(args.beta)
    return AnnealSchedule(sweeps=args.sweeps, beta_start=b0, beta_end=b1, restarts=args.restarts)


def cmd_generate(args) -> int:
    theta = tuple(_floats(args.theta))
    cfg = SuiteConfig(m=args.m, w=args.w, b=args.b, n_f=args.n_f, theta=theta, seed=args.seed,
                      volatility=args.volatility)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    models = generate_suite(cfg, args.count)
    files = []
    with (out / "couplers.csv").open("w") as f:
        f.write("problem,i,j,J\n")
        for idx, model in enumerate(models):
            pid = f"n{model.n}_{idx:04d}"
            ground = brute_force_solve(model) if args.ground else None
            io.save_problem(out / f"{pid}.json", model, ground, id=pid)
            files.append(f"{pid}.json")
            for (i, j), v in sorted(model.J.items()):
                f.write(f"{pid},{i},{j},{io.fmt(v)}\n")
    io.write_json(out / "manifest.json", {
        "format_version": io.FORMAT_VERSION,
        "config": asdict(cfg),
        "count": args.count,
        "n": cfg.n,
        "files": files,
        "seed_rule": "instance i uses seed hash64(config.seed, i)",
    })
    log.info("wrote %d problems (n=%d) to %s", args.count, cfg.n, out)
    return 0


def cmd_solve(args) -> int:
    prob = io.load_problem(args.problem)
    ground = brute_force_solve(prob.model)
    if args.write:
        d = json.loads(Path(args.problem).read_text())
        d["ground"] = {"energy": ground.energy, "states": ground.states.astype(int).tolist()}
        Path(args.problem).write_text(json.dumps(d, indent=1))
    print(json.dumps({"energy": ground.energy, "states": ground.states.astype(int).tolist()}))
    return 0


def cmd_embed(args) -> int:
    prob = io.load_problem(args.problem)
    graph = ChimeraGraph.parse(args.chimera)
    origin = tuple(int(v) for v in args.origin.split(","))
    emb = clique_embed(prob.n, graph, origin=origin)
    bad = validate_embedding(emb, prob.model)
    if bad:
        for v in bad:
            log.error("%s: %s", v.kind, v.detail)
        return 1
    em = embed_model(prob.model, emb, args.k)
    io.write_json(args.out, io.embedded_to_dict(em))
    if args.embedding_out:
        io.write_json(args.embedding_out, io.embedding_to_dict(emb))
    log.info("embedded n=%d into %d qubits, chain length %d", prob.n, len(em.qubits), emb.chain_lengths[0])
    return 0


def cmd_sample(args) -> int:
    em = io.embedded_from_dict(json.loads(Path(args.embedded).read_text()))
    ss = sample(em, args.n, _schedule(args), NoiseConfig(args.flip_p), args.seed, workers=args.workers)
    io.write_samples(args.out, ss)
    log.info("wrote %d samples over %d qubits to %s", len(ss), len(ss.qubits), args.out)
    return 0


def cmd_profile(args) -> int:
    emb = io.load_embedding(args.embedding)
    ss = io.read_samples(args.samples)
    prob = io.load_problem(args.problem)
    ground = prob.ground or brute_force_solve(prob.model)
    profile = estimate_fault_profile(io.align_samples(ss, emb), emb, ground)
    if profile.empty:
        log.warning("no broken samples: the profile is empty (n_b = 0)")
    io.write_profile(args.out, profile)
    return 0


def cmd_decode(args) -> int:
    emb = io.load_embedding(args.embedding)
    ss = io.read_samples(args.samples)
    profile = io.read_profile(args.profile) if args.profile else None
    if args.strategy == "weighted" and profile is None:
        log.error("--strategy weighted requires --profile")
        return 2
    decoded = decode_batch(io.align_samples(ss, emb), emb, args.strategy, profile)
    out = args.out or "/dev/stdout"
    io.write_decoded(out, decoded)
    return 0


def cmd_bench_sweep(args) -> int:
    problems = io.load_suite(args.suite)
    if not problems:
        log.error("no problem files in %s", args.suite)
        return 2
    per_size: dict[int, list] = {}
    for p in problems:
        per_size.setdefault(p.n, []).append(p)
    if args.sizes:
        wanted = {int(v) for v in args.sizes.split(",")}
        per_size = {n: ps for n, ps in per_size.items() if n in wanted}
    n_problems = 1000 if args.full else args.problems
    n_samples = 1000 if args.full else args.samples
    chosen = [p for n in sorted(per_size) for p in per_size[n][:n_problems]]
    strategies = [s.strip() for s in args.strategies.split(",")]
    schedule = _schedule(args)
    noise = NoiseConfig(args.flip_p)
    graph = ChimeraGraph.parse(args.chimera)
    result = run_sweep(chosen, _floats(args.k), schedule, noise, strategies, args.seed,
                       n_samples=n_samples, graph=graph, workers=args.workers, out_dir=args.out,
                       progress=log.info)
    write_sweep(args.out, result, manifest={
        "seed": args.seed,
        "n_samples": n_samples,
        "problems_per_size": n_problems,
        "problem_ids": [p.id for p in chosen],
        "schedule": asdict(schedule),
        "noise": asdict(noise),
        "chimera": [graph.rows, graph.cols, graph.shore],
        "suite": str(args.suite),
    })
    for e in result.errors:
        log.error(e)
    return 0 if result.complete else 1


def _add_anneal(p) -> None:
    p.add_argument("--sweeps", type=int, default=None, help="sweeps per sample (default 100 x qubits)")
    p.add_argument("--beta", default="0.1:10", help="inverse temperature range START:END (geometric)")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--flip-p", type=float, default=0.0, help="readout flip probability per qubit")
    p.add_argument("--workers", type=int, default=None, help="sampling threads (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chainbreak", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a portfolio problem suite")
    p.add_argument("--m", type=int, default=2, help="assets (n = m * w)")
    p.add_argument("--w", type=int, default=4, help="bits per asset")
    p.add_argument("--b", type=float, default=1.0, help="budget")
    p.add_argument("--theta", default="1,10,1", help="t1,t2,t3 weights")
    p.add_argument("--n-f", type=int, default=20, help="price points per asset")
    p.add_argument("--volatility", type=float, default=0.25)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-ground", dest="ground", action="store_false", help="skip brute-force ground states")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="brute-force ground states of a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--write", action="store_true", help="store the result in the problem file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("embed", help="clique-embed a problem and write the physical model")
    p.add_argument("--problem", required=True)
    p.add_argument("--chimera", default="16x16x4")
    p.add_argument("--k", type=float, required=True, help="chain strength (negative = ferromagnetic)")
    p.add_argument("--origin", default="0,0", help="top-left cell row,col")
    p.add_argument("--embedding-out", default=None, help="also write the bare embedding JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sample", help="anneal an embedded model")
    p.add_argument("--embedded", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_anneal(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("profile", help="estimate per-position fault rates from samples",
                       description=WEIGHTED_NOTE)
    p.add_argument("--samples", required=True)
    p.add_argument("--embedding", required=True, help="embedding or embedded-model JSON")
    p.add_argument("--problem", required=True, help="logical problem (ground state used or computed)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("decode", help="decode physical samples to logical states", description=WEIGHTED_NOTE)
    p.add_argument("--samples", required=True)
    p.add_argument("--embedding", required=True, help="embedding or embedded-model JSON")
    p.add_argument("--strategy", choices=STRATEGIES, default="majority")
    p.add_argument("--profile", default=None, help="fault profile CSV (weighted; majority tie-breaks)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_decode)

    bench = sub.add_parser("bench", help="benchmark harness")
    bsub = bench.add_subparsers(dest="bench_command", required=True)
    p = bsub.add_parser("sweep", help="chain-strength sweep over a suite", description=WEIGHTED_NOTE)
    p.add_argument("--suite", required=True, help="directory of problem JSON files")
    p.add_argument("--k", default=",".join(f"{k:g}" for k in DEFAULT_K_VALUES))
    p.add_argument("--strategies", default=",".join(STRATEGIES))
    p.add_argument("--problems", type=int, default=50, help="problems per size")
    p.add_argument("--samples", type=int, default=500, help="samples per problem and k")
    p.add_argument("--sizes", default=None, help="restrict to these n values")
    p.add_argument("--full", action="store_true", help="1000 problems x 1000 samples")
    p.add_argument("--chimera", default="16x16x4")
    p.add_argument("--seed", type=int, default=0)
    _add_anneal(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ChainbreakError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
