"""Vanilla multi-block ADMM against its randomized proximal variant on the counterexample.

    python scripts/admm_contrast.py --p 3 --iters 10000 --seeds 20
"""

import argparse
import sys

import numpy as np

from rpd.admm import (counterexample_lcp, norm_of_counterexample, randomized_proximal_admm_run,
                      table_checkpoints, vanilla_admm_run)
from rpd.schedules import unbounded_schedule


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args(argv)

    lcp = counterexample_lcp(args.p)
    cps = table_checkpoints(args.iters) or [args.iters]
    van = vanilla_admm_run(lcp, args.rho, args.iters, checkpoints=cps)
    sched = unbounded_schedule(args.p, norm_of_counterexample(args.p), args.iters)
    rand = [randomized_proximal_admm_run(lcp, sched, s, checkpoints=cps) for s in range(args.seeds)]
    print("t,vanilla,randomized_mean,randomized_std")
    for t in cps:
        vals = [tr.checkpoints[t] for tr in rand]
        print(f"{t},{van.checkpoints[t]:.6g},{np.mean(vals):.6g},{np.std(vals, ddof=1):.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
