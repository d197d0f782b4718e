"""Seeded experiments: expected-gap estimates, rate fits and the LCP table.

Every experiment is a list of independent seed runs. They may execute in a
process pool (size from ``RPD_THREADS``), but results are always reduced in
seed order, so reports do not depend on scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from .admm import counterexample_lcp, norm_of_counterexample, rpd_lcp_run
from .linops import spectral_norm
from .problems import SaddleInstance, instance_from_json
from .quality import (bregman_diameters, distance_D, induced_norm, perturbation_vector,
                      perturbed_gap_at, sup_gap_g0)
from .schedules import (bound_from_schedule, bound_general, bound_smooth, bound_unbounded,
                        general_bounded_schedule, smooth_schedule, unbounded_schedule)
from .solver import run, run_bregman

REGIMES = ("general_bounded", "smooth", "unbounded")


@dataclass
class ExperimentConfig:
    instance: dict
    regime: str = "general_bounded"
    N: list = field(default_factory=lambda: [10, 100, 1000])
    R: int = 50
    seed_base: int = 0
    out: str | None = None
    stride: int = 0
    bregman: bool = False
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.R < 1:
            raise ValueError("R must be >= 1")
        self.N = [int(n) for n in self.N]
        if any(n < 2 for n in self.N):
            raise ValueError("every N must be >= 2")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed_base, self.seed_base + self.R))

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def worker_count() -> int:
    env = os.environ.get("RPD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_seeds(fn, tasks: list, workers: int | None = None) -> list:
    """``[fn(t) for t in tasks]``, possibly in parallel, always in task order."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ---------------------------------------------------------------------------
# expected gap


@dataclass
class Setup:
    """Instance plus the schedule/bound recipe for one regime."""

    inst: SaddleInstance
    regime: str
    normA: float
    bregman: bool = False

    def schedule(self, N: int):
        inst, p, nA = self.inst, self.inst.p, self.normA
        if self.regime == "smooth":
            return smooth_schedule(p, nA, N)
        if self.regime == "unbounded":
            return unbounded_schedule(p, nA, N)
        if self.bregman:
            DX, DY = bregman_diameters(inst)
            return general_bounded_schedule(p, nA, math.sqrt(2 * DX), math.sqrt(2 * DY), N)
        return general_bounded_schedule(p, nA, inst.omega_x, inst.omega_y, N)

    def bound(self, sched) -> float:
        inst, p, nA, N = self.inst, self.inst.p, self.normA, sched.N
        if self.regime == "smooth":
            return bound_smooth(p, nA, inst.omega_x, inst.omega_y, N)
        if self.regime == "unbounded":
            return bound_unbounded(p, nA, distance_D(inst, sched), N)[0]
        if self.bregman:
            return bound_from_schedule(sched, *bregman_diameters(inst))
        return bound_general(p, nA, inst.omega_x, inst.omega_y, N)


def make_setup(inst: SaddleInstance, regime: str, bregman: bool = False) -> Setup:
    """Pick the operator norm matching the geometry.

    A zero operator satisfies every step-size condition for any positive
    norm value; 1 is used so the schedule and the bound stay defined.
    """
    nA = induced_norm(inst) if bregman else spectral_norm(inst.A)
    return Setup(inst, regime, nA if nA > 0 else 1.0, bregman)


def observe(setup: Setup, sched, seed: int) -> dict:
    """Run one seed and evaluate the regime's observable certificate."""
    solver = run_bregman if setup.bregman else run
    z, trace = solver(setup.inst, sched, seed)
    if setup.regime == "unbounded":
        v, nv = perturbation_vector(setup.inst, sched, trace)
        return {"gap": perturbed_gap_at(setup.inst, z, v, setup.inst.saddle), "v_norm": nv}
    return {"gap": sup_gap_g0(setup.inst, z)}


def _observe_task(args):
    setup, N, seed = args
    return observe(setup, setup.schedule(N), seed)


@dataclass
class GapRow:
    N: int
    mean: float
    std: float
    se: float
    bound: float
    v_mean: float | None = None
    v_bound: float | None = None

    @property
    def within(self) -> bool:
        ok = self.mean + self.se <= self.bound
        if self.v_bound is not None:
            ok = ok and self.v_mean <= self.v_bound
        return ok


def _summary(vals):
    a = np.asarray(vals, dtype=float)
    std = float(a.std(ddof=1)) if a.size > 1 else 0.0
    return float(a.mean()), std, std / math.sqrt(a.size)


def estimate_expected_gap(config: ExperimentConfig | None = None, *, setup: Setup | None = None,
                          N_list=None, seeds=None, workers: int | None = None) -> list[GapRow]:
    """Seed-mean of the regime's gap at each horizon, next to its bound."""
    if setup is None:
        inst = instance_from_json(config.instance)
        setup = make_setup(inst, config.regime, config.bregman)
    N_list = config.N if N_list is None else N_list
    seeds = config.seeds if seeds is None else list(seeds)
    rows = []
    for N in N_list:
        res = map_seeds(_observe_task, [(setup, N, s) for s in seeds], workers)
        mean, std, se = _summary([r["gap"] for r in res])
        sched = setup.schedule(N)
        row = GapRow(N, mean, std, se, setup.bound(sched))
        if setup.regime == "unbounded":
            row.v_mean = float(np.mean([r["v_norm"] for r in res]))
            row.v_bound = bound_unbounded(setup.inst.p, setup.normA,
                                          distance_D(setup.inst, sched), N)[1]
        rows.append(row)
    return rows


def rows_to_csv(rows: list[GapRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "mean_gap", "std", "se", "bound", "mean_v_norm", "v_bound", "within"])
    for r in rows:
        w.writerow([r.N, repr(r.mean), repr(r.std), repr(r.se), repr(r.bound),
                    "" if r.v_mean is None else repr(r.v_mean),
                    "" if r.v_bound is None else repr(r.v_bound), int(r.within)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# rate fit


@dataclass
class RateFit:
    points: list
    slope: float
    intercept: float
    r2: float


def rate_fit(points) -> RateFit:
    """OLS fit of ``ln gap`` against ``ln N``.

    Nonpositive gaps (converged to machine zero) cannot be logged; they are
    dropped with a warning. Fewer than three remaining points is an error.
    """
    pts = [(float(n), float(g)) for n, g in points]
    kept = [(n, g) for n, g in pts if g > 0]
    if len(kept) < len(pts):
        warnings.warn(f"dropped {len(pts) - len(kept)} nonpositive gap value(s) from the rate fit")
    if len(kept) < 3:
        raise ValueError(f"rate fit needs >= 3 positive points, have {len(kept)}")
    lx = np.log([n for n, _ in kept])
    ly = np.log([g for _, g in kept])
    res = stats.linregress(lx, ly)
    return RateFit(kept, float(res.slope), float(res.intercept), float(res.rvalue ** 2))


# ---------------------------------------------------------------------------
# LCP table


@dataclass
class Table:
    checkpoints: list
    rows: dict            # p -> (means, stds)
    R: int
    metric: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p"] + [f"mean_{c}" for c in self.checkpoints]
                   + [f"std_{c}" for c in self.checkpoints])
        for p, (means, stds) in self.rows.items():
            w.writerow([p] + [repr(v) for v in means] + [repr(v) for v in stds])
        return buf.getvalue()


def _table_task(args):
    p, N, seed, metric = args
    lcp = counterexample_lcp(p)
    tr = rpd_lcp_run(lcp, unbounded_schedule(p, norm_of_counterexample(p), N), seed)
    x = tr.x_hat if metric == "average" else tr.x
    return float(np.linalg.norm(x - lcp.x_star))


def run_table1(p_list=(10, 20, 50), checkpoints=(100, 1000, 10000, 100000), R: int = 20,
               seed_base: int = 0, metric: str = "average", workers: int | None = None) -> Table:
    """Distance to the solution of the counterexample system after N iterations.

    Each checkpoint N is a separate run of horizon N (the schedule's final
    weights depend on N). ``metric='average'`` measures the weighted-average
    output; ``'last'`` the final iterate.
    """
    cps = [int(c) for c in checkpoints]
    if cps != sorted(cps):
        raise ValueError("checkpoints must be ascending")
    if metric not in ("average", "last"):
        raise ValueError("metric is 'average' or 'last'")
    rows = {}
    for p in p_list:
        means, stds = [], []
        for N in cps:
            vals = map_seeds(_table_task, [(p, N, seed_base + r, metric) for r in range(R)], workers)
            m, s, _ = _summary(vals)
            means.append(m)
            stds.append(s)
        rows[int(p)] = (means, stds)
    return Table(cps, rows, R, metric)


def manifest(config_json: str, wall_time: float, extra: dict | None = None) -> dict:
    d = {
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "version": __version__,
        "wall_time": wall_time,
    }
    if extra:
        d.update(extra)
    return d
