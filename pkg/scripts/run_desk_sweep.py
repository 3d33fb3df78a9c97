"""Desk-scale chain-strength sweep on n=8 portfolio problems.

Runs 50 problems x 500 samples at k in {0, -0.25, -0.5, -1, -1.5, -2} with
the default annealing schedule, writes sweep.csv and heatmaps to --out, and
prints the p_b / p_s trends with 99% one-sided z-tests.
"""

import argparse
import time

from chainbreak import io
from chainbreak.bench import HEATMAP_K, DEFAULT_K_VALUES, run_sweep, significantly_greater, write_sweep
from chainbreak.ising import brute_force_solve
from chainbreak.portfolio import SuiteConfig, generate_suite
from chainbreak.sampler import AnnealSchedule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/desk")
    ap.add_argument("--m", type=int, default=2, help="assets; n = 4m")
    ap.add_argument("--problems", type=int, default=50)
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    cfg = SuiteConfig(m=args.m, seed=args.seed)
    suite = [io.Problem(f"n{cfg.n}_{i:04d}", m, brute_force_solve(m))
             for i, m in enumerate(generate_suite(cfg, args.problems))]
    t0 = time.perf_counter()
    res = run_sweep(suite, DEFAULT_K_VALUES, AnnealSchedule(), seed=args.seed, n_samples=args.samples,
                    workers=args.workers, out_dir=args.out, progress=print)
    write_sweep(args.out, res, {"seed": args.seed, "problems": args.problems, "samples": args.samples})
    print(f"\nsweep finished in {time.perf_counter() - t0:.0f}s\n")

    n = cfg.n
    print(f"{'k':>6} {'p_b':>8} {'r_b':>8} " + " ".join(f"{s:>9}" for s in res.strategies))
    for k in DEFAULT_K_VALUES:
        c = res.cell(n, k, "discard")
        ps = " ".join(f"{res.cell(n, k, s).p_s:9.4f}" for s in res.strategies)
        print(f"{k:6g} {c.p_b:8.4f} {c.r_b:8.4f} {ps}")

    total = args.problems * args.samples
    d = {k: res.cell(n, k, "discard") for k in DEFAULT_K_VALUES}
    print()
    print("p_b(0) > p_b(-0.5):", significantly_greater(d[0.0].p_b, total, d[-0.5].p_b, total))
    print("p_b(-0.5) > p_b(-1):", significantly_greater(d[-0.5].p_b, total, d[-1.0].p_b, total))
    print("p_s(-1) > p_s(0), discard:", significantly_greater(d[-1.0].p_s, total, d[0.0].p_s, total))

    prof = res.profiles[(n, HEATMAP_K)]
    print(f"\nfault profile at k={HEATMAP_K:g} (n_b={prof.n_b}); rows = chain, columns = position")
    for i, row in enumerate(prof.matrix()):
        print(f"{i:3d} " + " ".join(f"{v:6.3f}" for v in row))


if __name__ == "__main__":
    main()
