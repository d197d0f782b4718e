"""Seed statistics of |x - x*| on the counterexample system, next to the published single runs.

    python scripts/reproduce_table1.py --p 10 20 50 --seeds 20 --out results/
"""

import argparse
import sys
import time
from pathlib import Path

from rpd.harness import run_table1

PUBLISHED = {
    10: (2.0608, 1.1416, 0.2674, 0.0396),
    20: (4.2308, 1.1438, 1.6588, 0.4711),
    50: (7.0277, 6.6469, 2.2886, 2.1143),
}
CHECKPOINTS = (100, 1000, 10000, 100000)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, nargs="+", default=[10])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument("--metric", choices=["average", "last"], default="average")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    tab = run_table1(args.p, CHECKPOINTS, args.seeds, args.seed_base, args.metric)
    print(f"{'p':>4} " + " ".join(f"{c:>18}" for c in CHECKPOINTS))
    for p, (means, stds) in tab.rows.items():
        print(f"{p:>4} " + " ".join(f"{m:>9.4f} +-{s:<6.3f}" for m, s in zip(means, stds)))
        if p in PUBLISHED:
            print(f"{'ref':>4} " + " ".join(f"{v:>18.4f}" for v in PUBLISHED[p]))
    print(f"# {args.seeds} seeds, metric={args.metric}, {time.perf_counter() - t0:.1f}s")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "table1.csv").write_text(tab.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
