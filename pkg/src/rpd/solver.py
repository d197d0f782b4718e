"""Randomized primal-dual iteration and its Bregman variant.

Each iteration draws one dual block ``i_t`` uniformly, takes a prox step on
that block only, takes a full primal prox step against ``A^T y``, and
extrapolates the primal point. The output is the gamma-weighted average of
the iterates ``z^2, ..., z^N``.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .problems import EUCLIDEAN, SaddleInstance, initial_dual, prox
from .rng import SplitMix64
from .schedules import Schedule


class RegimeMismatch(ValueError):
    """Schedule regime is not applicable to the instance."""


@dataclass
class TraceOptions:
    stride: int = 0            # record distance/snapshot every `stride` iterates (0: never)
    snapshots: bool = False    # keep full iterates at stride points
    keep_iterates: bool = False
    gap_at_stride: bool = False
    check_feasible: bool = False
    checkpoints: tuple = ()    # extra iterate indices t at which to record distances


@dataclass
class RunTrace:
    seed: int
    blocks: np.ndarray
    gammas: np.ndarray
    x_start: np.ndarray
    y_start: np.ndarray
    x_last: np.ndarray          # x^N
    x_prev: np.ndarray          # x^{N-1}
    y_last: np.ndarray          # y^N
    rows: list = field(default_factory=list)       # (t, i_t, dist, dist_x, dist_y, gap)
    snapshots: list = field(default_factory=list)  # (t, x^t, y^t)
    iterates: list = field(default_factory=list)   # z^{t+1}, t = 1..N-1
    wall_time: float = 0.0

    def distances(self) -> dict:
        """Map iterate index t -> (||z^t - z*||, ||x^t - x*||, ||y^t - y*||)."""
        return {r[0]: (r[2], r[3], r[4]) for r in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "i_t", "dist_to_opt", "dist_x", "dist_y", "gap_checkpoint"])
        for row in self.rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                        for v in row])
        return buf.getvalue()


@dataclass
class SolverState:
    t: int
    x_prev: np.ndarray
    x_cur: np.ndarray
    x_bar: np.ndarray
    y_cur: np.ndarray
    weighted_sum_x: np.ndarray
    weighted_sum_y: np.ndarray
    weight_total: float
    rng: SplitMix64
    comp_x: np.ndarray = None
    comp_y: np.ndarray = None
    last_block: int = 0

    def __post_init__(self):
        if self.comp_x is None:
            self.comp_x = np.zeros_like(self.weighted_sum_x)
        if self.comp_y is None:
            self.comp_y = np.zeros_like(self.weighted_sum_y)

    def average(self) -> tuple[np.ndarray, np.ndarray]:
        return self.weighted_sum_x / self.weight_total, self.weighted_sum_y / self.weight_total


def check_regime(inst: SaddleInstance, sched: Schedule) -> None:
    if sched.regime == "smooth" and not inst.smooth:
        raise RegimeMismatch(
            "smooth schedule needs every J_i strongly convex with modulus >= 1; "
            "rescale J and A explicitly (this changes |A|)"
        )
    if sched.regime in ("general_bounded", "smooth") and not inst.bounded:
        raise RegimeMismatch(f"{sched.regime} schedule needs bounded X and Y; use the unbounded schedule")


def _kahan_add(s: np.ndarray, c: np.ndarray, v: np.ndarray) -> None:
    yk = v - c
    tk = s + yk
    c[...] = (tk - s) - yk
    s[...] = tk


def _step(inst, sched, k, i, x, x_bar, y, dgf_x, dgf_y):
    """One iteration with 0-based parameter index ``k`` and 1-based block ``i``."""
    A = inst.A
    sl = A.block_slice(i - 1)
    y_new = y.copy()
    y_new[sl] = prox(inst.J[i - 1], inst.Y[i - 1], dgf_y[i - 1],
                     -A.apply_block(i, x_bar), y[sl], sched.tau[k])
    x_new = prox(inst.h, inst.X, dgf_x, A.adjoint_apply(y_new), x, sched.eta[k])
    x_bar_new = sched.q[k] * (x_new - x) + x_new
    return x_new, x_bar_new, y_new


def start_point(inst: SaddleInstance, x1=None, bregman: bool = False):
    """``x^1`` (canonical unless given) and ``y^1`` maximizing ``<A x^1, y> - J(y)``.

    With ``bregman``, entropy blocks start at the minimizer of their distance
    generating function (the uniform vector) instead, since a vertex start
    would freeze the multiplicative update.
    """
    x1 = inst.default_start() if x1 is None else np.asarray(x1, dtype=float)
    y1 = initial_dual(inst, x1)
    if bregman:
        parts = inst.A.split(y1)
        for k, (g, Yk) in enumerate(zip(inst.dgf_y, inst.Y)):
            if g.kind == "entropy":
                parts[k][:] = g.start(Yk)
    return x1, y1


def init_state(inst: SaddleInstance, seed: int, x1=None, y1=None, bregman=False) -> SolverState:
    if y1 is None:
        x1, y1 = start_point(inst, x1, bregman)
    x1 = np.asarray(x1, dtype=float)
    return SolverState(1, x1.copy(), x1.copy(), x1.copy(), np.array(y1, dtype=float),
                       np.zeros(inst.A.n), np.zeros(inst.A.m), 0.0, SplitMix64(seed))


def rpd_step(inst: SaddleInstance, sched: Schedule, state: SolverState,
             bregman: bool = False) -> SolverState:
    """Advance ``state`` by one iteration; the input state is left untouched."""
    t = state.t
    if not 1 <= t <= sched.N - 1:
        raise ValueError(f"iteration {t} outside 1..{sched.N - 1}")
    rng = SplitMix64(0)
    rng.state = state.rng.state
    i = rng.draw_block(inst.p)
    dgf_x, dgf_y = (inst.dgf_x, inst.dgf_y) if bregman else (EUCLIDEAN, (EUCLIDEAN,) * inst.p)
    x_new, x_bar_new, y_new = _step(inst, sched, t - 1, i, state.x_cur, state.x_bar,
                                    state.y_cur, dgf_x, dgf_y)
    g = sched.gamma[t - 1]
    sx, cx = state.weighted_sum_x.copy(), state.comp_x.copy()
    sy, cy = state.weighted_sum_y.copy(), state.comp_y.copy()
    _kahan_add(sx, cx, g * x_new)
    _kahan_add(sy, cy, g * y_new)
    return SolverState(t + 1, state.x_cur, x_new, x_bar_new, y_new, sx, sy,
                       state.weight_total + g, rng, cx, cy, i)


def _run(inst, sched, seed, options, bregman, x1):
    check_regime(inst, sched)
    opts = options or TraceOptions()
    t0 = time.perf_counter()
    x, y = start_point(inst, x1, bregman)
    x_start, y_start = x.copy(), y.copy()
    x_prev = x.copy()
    x_bar = x.copy()
    dgf_x, dgf_y = (inst.dgf_x, inst.dgf_y) if bregman else (EUCLIDEAN, (EUCLIDEAN,) * inst.p)
    rng = SplitMix64(seed)
    p, n, m = inst.p, inst.A.n, inst.A.m
    sx, cx = np.zeros(n), np.zeros(n)
    sy, cy = np.zeros(m), np.zeros(m)
    wsum = 0.0
    T = sched.N - 1
    blocks = np.empty(T, dtype=np.int64)
    trace = RunTrace(seed, blocks, np.asarray(sched.gamma), x_start, y_start, x, x, y)
    star = inst.saddle
    want = set(opts.checkpoints)
    stride = opts.stride

    def record(t, i_t):
        gap = None
        if opts.gap_at_stride and wsum > 0:
            from .quality import sup_gap_g0
            gap = sup_gap_g0(inst, (sx / wsum, sy / wsum))
        if star is not None:
            dx = float(np.linalg.norm(x - star[0]))
            dy = float(np.linalg.norm(y - star[1]))
            dist = float(np.hypot(dx, dy))
        else:
            dx = dy = dist = None
        trace.rows.append((t, i_t, dist, dx, dy, gap))
        if opts.snapshots:
            trace.snapshots.append((t, x.copy(), y.copy()))

    if stride and 1 % stride == 0 or 1 in want:
        record(1, 0)
    for k in range(T):
        i = rng.draw_block(p)
        blocks[k] = i
        x_new, x_bar, y = _step(inst, sched, k, i, x, x_bar, y, dgf_x, dgf_y)
        x_prev, x = x, x_new
        g = sched.gamma[k]
        _kahan_add(sx, cx, g * x)
        _kahan_add(sy, cy, g * y)
        wsum += g
        if opts.check_feasible:
            assert inst.X.contains(x), f"x^{k + 2} left X"
            assert all(Yi.contains(yi) for Yi, yi in zip(inst.Y, inst.A.split(y))), f"y^{k + 2} left Y"
        if opts.keep_iterates:
            trace.iterates.append((x.copy(), y.copy()))
        t = k + 2
        if (stride and t % stride == 0) or t in want or (stride and t == sched.N):
            record(t, i)
    trace.x_last, trace.x_prev, trace.y_last = x, x_prev, y
    trace.wall_time = time.perf_counter() - t0
    return (sx / wsum, sy / wsum), trace


def run(inst: SaddleInstance, sched: Schedule, seed: int = 0,
        options: TraceOptions | None = None, x1=None):
    """Run ``N-1`` Euclidean iterations; returns ``((x_hat, y_hat), trace)``."""
    return _run(inst, sched, seed, options, False, x1)


def run_bregman(inst: SaddleInstance, sched: Schedule, seed: int = 0,
                options: TraceOptions | None = None, x1=None):
    """Same iteration with the instance's distance-generating functions."""
    return _run(inst, sched, seed, options, True, x1)


def summary_json(z_hat, trace: RunTrace, extra: dict | None = None) -> str:
    d = {
        "seed": trace.seed,
        "iterations": int(trace.blocks.size),
        "x_hat": z_hat[0].tolist(),
        "y_hat": z_hat[1].tolist(),
        "wall_time": trace.wall_time,
    }
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True)


def clone_state(state: SolverState) -> SolverState:
    return copy.deepcopy(state)
