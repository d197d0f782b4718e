"""Command-line entry point: ``rpd <subcommand> [options]``.

Exit status: 0 success, 2 invalid input or failed schedule validation,
3 a ``--check`` threshold was not met.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .admm import (counterexample_lcp, norm_of_counterexample, proximal_admm_run,
                   randomized_proximal_admm_run, rpd_lcp_run, table_checkpoints, vanilla_admm_run)
from .harness import (ExperimentConfig, estimate_expected_gap, make_setup, manifest, rate_fit,
                      rows_to_csv, run_table1)
from .problems import instance_from_json
from .quality import gap_report
from .schedules import (general_bounded_schedule, smooth_schedule, unbounded_schedule, validate)
from .solver import TraceOptions, run, run_bregman, summary_json

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 2, 3


class Invalid(Exception):
    pass


def _load_config(path) -> dict:
    if path is None:
        raise Invalid("--config is required for this subcommand")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise Invalid(f"cannot read config {path}: {exc}") from exc


def _emit(args, name: str, csv_text: str, config_json: str, t0: float, extra=None):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(csv_text)
        man = manifest(config_json, time.perf_counter() - t0, extra)
        (out / f"{name}.manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True))
    if not args.quiet:
        sys.stdout.write(csv_text)


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    cfg = ExperimentConfig.from_json(_load_config(args.config))
    inst = instance_from_json(cfg.instance)
    setup = make_setup(inst, cfg.regime, cfg.bregman)
    N = args.iters or cfg.N[-1]
    sched = setup.schedule(N)
    solver = run_bregman if cfg.bregman else run
    seed = cfg.seed_base if args.seed_base is None else args.seed_base
    z, trace = solver(inst, sched, seed, TraceOptions(stride=args.stride or cfg.stride))
    rep = gap_report(inst, sched, z, trace, setup.normA)
    summary = summary_json(z, trace, {"gap_report": json.loads(rep.to_json())})
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "solve.json").write_text(summary)
    _emit(args, "solve", trace.to_csv(), cfg.to_json(), t0)
    if args.check:
        gap = rep.g0 if rep.g0 is not None else rep.perturbed_gap
        if gap is not None and rep.theory_bound is not None and gap > rep.theory_bound:
            return EXIT_CHECK
    return EXIT_OK


def cmd_validate_schedule(args) -> int:
    p, N, nA = args.p, args.iters, args.norm
    if args.regime == "general_bounded":
        s = general_bounded_schedule(p, nA, args.omega_x, args.omega_y, N)
    elif args.regime == "smooth":
        s = smooth_schedule(p, nA, N)
    else:
        s = unbounded_schedule(p, nA, N)
    rep = validate(s, p, nA)
    if not args.quiet:
        print("\n".join(rep.lines()))
    return EXIT_OK if rep.passed else EXIT_INVALID


def cmd_rate_study(args) -> int:
    t0 = time.perf_counter()
    d = _load_config(args.config)
    if args.seeds:
        d["R"] = args.seeds
    if args.seed_base is not None:
        d["seed_base"] = args.seed_base
    cfg = ExperimentConfig.from_json(d)
    rows = estimate_expected_gap(cfg)
    text = rows_to_csv(rows)
    extra = {}
    if len(rows) >= 3:
        try:
            fit = rate_fit([(r.N, r.mean) for r in rows])
            extra = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}
        except ValueError:
            pass
    _emit(args, "rate_study", text, cfg.to_json(), t0, extra)
    if extra and not args.quiet:
        print(f"# slope {extra['slope']:.4f}  R^2 {extra['r2']:.4f}")
    if args.check:
        ok = all(r.within for r in rows)
        max_slope = cfg.tolerances.get("max_slope")
        if max_slope is not None and extra:
            ok = ok and extra["slope"] <= max_slope
        if not ok:
            return EXIT_CHECK
    return EXIT_OK


def cmd_admm_demo(args) -> int:
    t0 = time.perf_counter()
    p, N = args.p, args.iters
    lcp = counterexample_lcp(p)
    cps = table_checkpoints(N) or [N]
    if args.method == "vanilla":
        tr = vanilla_admm_run(lcp, args.rho, N, checkpoints=cps)
    elif args.method == "proximal":
        tr = proximal_admm_run(lcp, args.rho, args.eta, N, checkpoints=cps)
    else:
        sched = unbounded_schedule(p, norm_of_counterexample(p), N)
        fn = randomized_proximal_admm_run if args.method == "randomized" else rpd_lcp_run
        tr = fn(lcp, sched, args.seed_base or 0, checkpoints=cps)
    text = "t,dist_to_opt\n" + "".join(f"{t},{v!r}\n" for t, v in tr.rows())
    cfg = json.dumps(vars(args), sort_keys=True, default=str)
    _emit(args, f"admm_{args.method}", text, cfg, t0)
    return EXIT_OK


def cmd_equivalence(args) -> int:
    t0 = time.perf_counter()
    base = args.seed_base or 0
    worst = 0.0
    lines = ["p,seed,max_deviation"]
    for p in args.p:
        lcp = counterexample_lcp(p)
        sched = unbounded_schedule(p, norm_of_counterexample(p), args.iters)
        for seed in range(base, base + (args.seeds or 5)):
            a = rpd_lcp_run(lcp, sched, seed, keep_iterates=True)
            b = randomized_proximal_admm_run(lcp, sched, seed, keep_iterates=True)
            dev = max(max(np.abs(u[0] - v[0]).max(), np.abs(u[1] - v[1]).max())
                      for u, v in zip(a.iterates, b.iterates))
            worst = max(worst, float(dev))
            lines.append(f"{p},{seed},{dev!r}")
    cfg = json.dumps(vars(args), sort_keys=True, default=str)
    _emit(args, "equivalence", "\n".join(lines) + "\n", cfg, t0, {"max_deviation": worst})
    if args.check and worst > args.tol:
        return EXIT_CHECK
    return EXIT_OK


def cmd_table1(args) -> int:
    t0 = time.perf_counter()
    cps = args.checkpoints or [100, 1000, 10000, 100000]
    tab = run_table1(args.p, cps, args.seeds or 20, args.seed_base or 0, args.metric)
    cfg = json.dumps(vars(args), sort_keys=True, default=str)
    _emit(args, "table1", tab.to_csv(), cfg, t0)
    if args.check:
        for means, _ in tab.rows.values():
            if any(b >= a for a, b in zip(means, means[1:])):
                return EXIT_CHECK
    return EXIT_OK


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    # Subcommand copies must not overwrite values given before the subcommand.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", default=d(None), help="experiment JSON document")
    common.add_argument("--seed-base", type=int, default=d(None))
    common.add_argument("--seeds", type=int, default=d(None), help="number of seeds R")
    common.add_argument("--out", default=d(None), help="output directory for CSV and manifest")
    common.add_argument("--quiet", action="store_true", default=d(False))
    common.add_argument("--check", action="store_true", default=d(False),
                        help="exit 3 when a threshold fails")
    return common


def build_parser() -> argparse.ArgumentParser:
    top = _common_flags(suppress=False)
    common = _common_flags(suppress=True)

    ap = argparse.ArgumentParser(prog="rpd", parents=[top], allow_abbrev=False)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", parents=[common])
    s.add_argument("--iters", type=int)
    s.add_argument("--stride", type=int, default=0)
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("validate-schedule", parents=[common])
    s.add_argument("--regime", choices=["general_bounded", "smooth", "unbounded"], required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--iters", type=int, required=True, help="horizon N")
    s.add_argument("--norm", type=float, default=1.0)
    s.add_argument("--omega-x", type=float, default=1.0)
    s.add_argument("--omega-y", type=float, default=1.0)
    s.set_defaults(fn=cmd_validate_schedule)

    s = sub.add_parser("rate-study", parents=[common])
    s.set_defaults(fn=cmd_rate_study)

    s = sub.add_parser("admm-demo", parents=[common])
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--iters", type=int, default=10000)
    s.add_argument("--method", choices=["vanilla", "proximal", "randomized", "rpd"], default="vanilla")
    s.add_argument("--seed", dest="seed_base", type=int)
    s.set_defaults(fn=cmd_admm_demo)

    s = sub.add_parser("equivalence", parents=[common])
    s.add_argument("--p", type=int, nargs="+", default=[2, 3, 5])
    s.add_argument("--iters", type=int, default=1000)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(fn=cmd_equivalence)

    s = sub.add_parser("table1", parents=[common])
    s.add_argument("--p", type=int, nargs="+", default=[10, 20, 50])
    s.add_argument("--checkpoints", type=int, nargs="+")
    s.add_argument("--metric", choices=["average", "last"], default="average")
    s.set_defaults(fn=cmd_table1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (Invalid, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
