"""p_b and p_s against problem size at a few chain strengths.

Needs a suite directory from make_suite.py.  Small defaults keep the run
to a few minutes; raise --problems/--samples for smoother curves.
"""

import argparse

from chainbreak import io
from chainbreak.bench import run_sweep, write_sweep
from chainbreak.sampler import AnnealSchedule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suite", default="suites")
    ap.add_argument("--out", default="runs/sizes")
    ap.add_argument("--k", default="-0.5,-1,-2")
    ap.add_argument("--problems", type=int, default=10)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    by_n: dict[int, list] = {}
    for p in io.load_suite(args.suite):
        by_n.setdefault(p.n, []).append(p)
    chosen = [p for n in sorted(by_n) for p in by_n[n][: args.problems]]
    ks = [float(v) for v in args.k.split(",")]
    res = run_sweep(chosen, ks, AnnealSchedule(), strategies=("discard", "majority"), seed=args.seed,
                    n_samples=args.samples, out_dir=args.out, progress=print)
    write_sweep(args.out, res)
    print(f"\n{'n':>3} {'k':>6} {'p_b':>7} {'r_b':>7} {'p_s/disc':>9} {'p_s/maj':>8}")
    for n in res.sizes:
        for k in ks:
            d, m = res.cell(n, k, "discard"), res.cell(n, k, "majority")
            print(f"{n:3d} {k:6g} {d.p_b:7.3f} {d.r_b:7.3f} {d.p_s:9.3f} {m.p_s:8.3f}")


if __name__ == "__main__":
    main()
