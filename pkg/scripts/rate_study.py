"""Empirical gap against the closed-form bound, with log-log slopes.

    python scripts/rate_study.py general --seeds 50
    python scripts/rate_study.py smooth --seeds 50
    python scripts/rate_study.py entropy --seeds 20
"""

import argparse
import sys

import numpy as np

from rpd.harness import estimate_expected_gap, make_setup, rate_fit, rows_to_csv
from rpd.linops import BlockLinearOperator
from rpd.problems import ENTROPY, build_matrix_game, build_regularized_loss_toy

GAMES = {"identity": np.eye(8), "random": np.random.default_rng(0).uniform(-1, 1, (8, 6))}


def cases(kind):
    if kind == "smooth":
        rng = np.random.default_rng(0)
        M, b = rng.uniform(-1, 1, (4, 3)), rng.uniform(-0.5, 0.5, 4)
        for p in (1, 2):
            inst = build_regularized_loss_toy(BlockLinearOperator(M, [4 // p] * p), b=b, radius=1.0)
            yield f"toy p={p}", make_setup(inst, "smooth"), [25, 50, 100, 200, 400]
        return
    for name, M in GAMES.items():
        for p in (1, 2, 4):
            inst = build_matrix_game(M, p=p)
            if kind == "entropy":
                inst = inst.with_dgfs(ENTROPY, ENTROPY)
            yield f"{name} p={p}", make_setup(inst, "general_bounded", kind == "entropy"), [32, 64, 128, 256, 512]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=["general", "smooth", "entropy"])
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args(argv)
    for label, setup, N_list in cases(args.kind):
        rows = estimate_expected_gap(setup=setup, N_list=N_list, seeds=range(args.seeds))
        fit = rate_fit([(r.N, r.mean) for r in rows])
        print(f"## {label}: slope {fit.slope:.3f}, R^2 {fit.r2:.4f}")
        print(rows_to_csv(rows), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
