"""Write portfolio problem suites with brute-force ground states.

    python scripts/make_suite.py --out suites --sizes 8,12,16,20 --count 50
"""

import argparse
import time
from pathlib import Path

from chainbreak import io
from chainbreak.ising import brute_force_solve
from chainbreak.portfolio import SuiteConfig, generate_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="suites")
    ap.add_argument("--sizes", default="8,12,16,20")
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    for n in (int(v) for v in args.sizes.split(",")):
        cfg = SuiteConfig(m=n // 4, w=4, seed=args.seed + n)
        t0 = time.perf_counter()
        files = []
        for i, model in enumerate(generate_suite(cfg, args.count)):
            pid = f"n{n}_{i:04d}"
            io.save_problem(root / f"{pid}.json", model, brute_force_solve(model), id=pid)
            files.append(f"{pid}.json")
        print(f"n={n:2d}: {args.count} problems in {time.perf_counter() - t0:.1f}s")
    io.write_json(root / "manifest.json", {"sizes": args.sizes, "count": args.count, "seed": args.seed})


if __name__ == "__main__":
    main()
