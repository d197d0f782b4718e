"""Linearly constrained separable problems and ADMM-type solvers.

Problem: ``min sum_i f_i(x_i)  s.t.  sum_i A_i x_i = b``, ``x_i in X_i``.

Four solvers share one trace format:

* :func:`rpd_lcp_run` -- the randomized primal-dual method on the Lagrangian
  saddle form (one random block per iteration, exact multiplier step).
* :func:`randomized_proximal_admm_run` -- one random block of a linearized
  proximal ADMM sweep; coincides with the previous one when the penalty is
  tied to the schedule.
* :func:`proximal_admm_run` -- deterministic Gauss-Seidel sweep.
* :func:`vanilla_admm_run` -- classical multi-block ADMM (exact block
  minimization of the augmented Lagrangian).

Schedules are passed in the roles of the generic saddle solver: ``tau`` is
the step of the block (``x_i``) update and ``eta`` the step of the
multiplier update.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .problems import (FeasibleSet, NoClosedFormProx, SeparableFunction, EUCLIDEAN,
                       counterexample_matrix, lcp_saddle_instance, prox)
from .rng import SplitMix64
from .schedules import Schedule
from .solver import RegimeMismatch


@dataclass
class LcpInstance:
    blocks: list
    b: np.ndarray
    f: list
    X: list
    x_star: np.ndarray | None = None
    x_start: np.ndarray | None = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        m = self.b.size
        blocks = []
        for k, Ai in enumerate(self.blocks):
            Ai = np.asarray(Ai, dtype=float)
            Ai = Ai.reshape(-1, 1) if Ai.ndim == 1 else Ai
            if Ai.shape[0] != m:
                raise ValueError(f"block {k + 1} has {Ai.shape[0]} rows, b has {m}")
            blocks.append(Ai)
        self.blocks = blocks
        if not len(self.f) == len(self.X) == len(self.blocks):
            raise ValueError("need one f_i and X_i per block")
        for k, (Ai, Xi) in enumerate(zip(self.blocks, self.X)):
            if Xi.dim != Ai.shape[1]:
                raise ValueError(f"X_{k + 1} has dimension {Xi.dim}, A_{k + 1} has {Ai.shape[1]} columns")
        self.dims = [Ai.shape[1] for Ai in self.blocks]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.matrix = np.hstack(self.blocks)
        if self.x_star is not None:
            self.x_star = np.asarray(self.x_star, dtype=float)
        if self.x_start is None:
            self.x_start = np.ones(self.n)
        self.x_start = np.asarray(self.x_start, dtype=float)

    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return int(self.offsets[-1])

    @property
    def m(self) -> int:
        return self.b.size

    def sl(self, i: int) -> slice:
        """Slice of 1-based block ``i`` in the stacked vector."""
        return slice(self.offsets[i - 1], self.offsets[i])

    def residual(self, x) -> np.ndarray:
        return self.matrix @ x - self.b

    def to_saddle(self):
        return lcp_saddle_instance(self.blocks, self.b, self.f, self.X,
                                   x_start=self.x_start, x_star=self.x_star)


def counterexample_lcp(p: int) -> LcpInstance:
    """Homogeneous system with columns ``(1;..;1), (1;..;1;2), ..., (1;2;..;2)``."""
    M = counterexample_matrix(p)
    return LcpInstance([M[:, [i]] for i in range(p)], np.zeros(p),
                       [SeparableFunction.zero()] * p, [FeasibleSet.free(1)] * p,
                       x_star=np.zeros(p), x_start=np.ones(p))


@dataclass
class LcpTrace:
    method: str
    x: np.ndarray
    y: np.ndarray
    checkpoints: dict = field(default_factory=dict)    # t -> ||x^t - x*||
    residuals: dict = field(default_factory=dict)      # t -> ||sum A_i x_i^t - b||
    blocks: np.ndarray | None = None
    iterates: list = field(default_factory=list)       # (x^t, y^t), t = 2..N
    x_hat: np.ndarray | None = None
    y_hat: np.ndarray | None = None
    seed: int | None = None
    wall_time: float = 0.0

    def rows(self):
        return [(t, self.checkpoints[t]) for t in sorted(self.checkpoints)]


class _Recorder:
    def __init__(self, lcp: LcpInstance, trace: LcpTrace, checkpoints, keep_iterates):
        self.lcp = lcp
        self.trace = trace
        self.want = set(int(c) for c in checkpoints)
        self.keep = keep_iterates

    def __call__(self, t, x, y, r=None):
        if t in self.want:
            if self.lcp.x_star is not None:
                self.trace.checkpoints[t] = float(np.linalg.norm(x - self.lcp.x_star))
            r = self.lcp.residual(x) if r is None else r
            self.trace.residuals[t] = float(np.linalg.norm(r))
        if self.keep:
            self.trace.iterates.append((x.copy(), y.copy()))


def _horizon(sched: Schedule, N):
    if N is None:
        return sched.N
    if N > sched.N:
        raise ValueError(f"N={N} exceeds schedule length {sched.N}")
    return int(N)


def rpd_lcp_run(lcp: LcpInstance, sched: Schedule, seed: int = 0, N: int | None = None,
                checkpoints: Sequence[int] = (), keep_iterates: bool = False) -> LcpTrace:
    """Randomized primal-dual iterations on the Lagrangian saddle form.

    Starts from ``x = lcp.x_start``, ``y = 0``, ``y_bar = y``. Returns the
    final iterate and the gamma-weighted averages.
    """
    if sched.regime != "unbounded":
        raise RegimeMismatch("the multiplier space is unbounded: use unbounded_schedule")
    N = _horizon(sched, N)
    t0 = time.perf_counter()
    p, A, b = lcp.p, lcp.matrix, lcp.b
    x = lcp.x_start.copy()
    y = np.zeros(lcp.m)
    y_bar = y.copy()
    rng = SplitMix64(seed)
    blocks = np.empty(N - 1, dtype=np.int64)
    trace = LcpTrace("rpd", x, y, blocks=blocks, seed=seed)
    rec = _Recorder(lcp, trace, checkpoints, keep_iterates)
    if 1 in rec.want:
        rec(1, x, y)
        trace.iterates.clear()
    sx, sy, wsum = np.zeros(lcp.n), np.zeros(lcp.m), 0.0
    tau, eta, q, gamma = sched.tau, sched.eta, sched.q, sched.gamma
    for k in range(N - 1):
        i = rng.draw_block(p)
        blocks[k] = i
        sl = lcp.sl(i)
        x = x.copy()
        x[sl] = prox(lcp.f[i - 1], lcp.X[i - 1], EUCLIDEAN,
                     lcp.blocks[i - 1].T @ y_bar, x[sl], tau[k])
        r = A @ x - b
        y_new = y + r / eta[k]
        y_bar = q[k] * (y_new - y) + y_new
        y = y_new
        sx += gamma[k] * x
        sy += gamma[k] * y
        wsum += gamma[k]
        rec(k + 2, x, y, r)
    trace.x, trace.y = x, y
    trace.x_hat, trace.y_hat = sx / wsum, sy / wsum
    trace.wall_time = time.perf_counter() - t0
    return trace


def randomized_proximal_admm_run(lcp: LcpInstance, sched: Schedule, seed: int = 0,
                                 N: int | None = None, checkpoints: Sequence[int] = (),
                                 keep_iterates: bool = False) -> LcpTrace:
    """Linearized proximal ADMM updating one random block per iteration.

    The penalty follows the schedule, ``rho_t = q_{t-1} * (1/eta_{t-1})``,
    with ``rho_1 = 0`` (no multiplier history at the first step). The
    multiplier step is ``1/eta_t``. Block draws use the same stream as
    :func:`rpd_lcp_run`.
    """
    N = _horizon(sched, N)
    t0 = time.perf_counter()
    p, A, b = lcp.p, lcp.matrix, lcp.b
    x = lcp.x_start.copy()
    y = np.zeros(lcp.m)
    rng = SplitMix64(seed)
    blocks = np.empty(N - 1, dtype=np.int64)
    trace = LcpTrace("randomized", x, y, blocks=blocks, seed=seed)
    rec = _Recorder(lcp, trace, checkpoints, keep_iterates)
    if 1 in rec.want:
        rec(1, x, y)
        trace.iterates.clear()
    r = A @ x - b
    for k in range(N - 1):
        i = rng.draw_block(p)
        blocks[k] = i
        rho = 0.0 if k == 0 else sched.q[k - 1] / sched.eta[k - 1]
        sl = lcp.sl(i)
        x = x.copy()
        x[sl] = prox(lcp.f[i - 1], lcp.X[i - 1], EUCLIDEAN,
                     lcp.blocks[i - 1].T @ (y + rho * r), x[sl], sched.tau[k])
        r = A @ x - b
        y = y + r / sched.eta[k]
        rec(k + 2, x, y, r)
    trace.x, trace.y = x, y
    trace.wall_time = time.perf_counter() - t0
    return trace


def _exact_block(lcp: LcpInstance, i: int, y, rho: float, partial, x_old, eta: float):
    """Minimize ``f_i + <y, A_i u> + rho/2 ||partial + A_i u||^2 + eta/2 ||u - x_old||^2``.

    ``partial`` is the contribution of all other blocks minus ``b``. Exact
    on free sets and on one-dimensional intervals.
    """
    Ai, fi, Xi = lcp.blocks[i - 1], lcp.f[i - 1], lcp.X[i - 1]
    d = Ai.shape[1]
    if Xi.kind != "free" and d > 1:
        raise NoClosedFormProx(fi, Xi, EUCLIDEAN)
    H = rho * Ai.T @ Ai + (fi.mu + eta) * np.eye(d)
    rhs = -(Ai.T @ y) - fi.linear_part(d) - rho * Ai.T @ partial + eta * x_old
    try:
        u = np.linalg.solve(H, rhs)
    except np.linalg.LinAlgError:
        u = np.linalg.lstsq(H, rhs, rcond=None)[0]
    return Xi.project(u)


def proximal_admm_run(lcp: LcpInstance, rho=1.0, eta=1.0, N: int = 1000,
                      linearized: bool = True, checkpoints: Sequence[int] = (),
                      keep_iterates: bool = False) -> LcpTrace:
    """Deterministic Gauss-Seidel proximal ADMM.

    ``rho`` and ``eta`` are scalars or sequences indexed by iteration. With
    ``linearized`` the coupling enters only through its gradient at the
    current sweep point (a prox step of size ``eta``); otherwise each block
    minimizes the augmented Lagrangian exactly plus the proximal term, and
    ``eta = 0`` gives vanilla ADMM.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rhos = np.broadcast_to(np.asarray(rho, dtype=float), (N,)) if np.ndim(rho) == 0 else np.asarray(rho, dtype=float)
    etas = np.broadcast_to(np.asarray(eta, dtype=float), (N,)) if np.ndim(eta) == 0 else np.asarray(eta, dtype=float)
    if np.any(rhos[:N - 1] <= 0):
        raise ValueError("rho must be positive")
    t0 = time.perf_counter()
    p, b = lcp.p, lcp.b
    x = lcp.x_start.copy()
    y = np.zeros(lcp.m)
    trace = LcpTrace("proximal" if linearized else "exact", x, y)
    rec = _Recorder(lcp, trace, checkpoints, keep_iterates)
    if 1 in rec.want:
        rec(1, x, y)
        trace.iterates.clear()
    contrib = [Ai @ x[lcp.sl(i + 1)] for i, Ai in enumerate(lcp.blocks)]
    for k in range(N - 1):
        x = x.copy()
        rh, et = rhos[k], etas[k]
        for i in range(1, p + 1):
            sl = lcp.sl(i)
            s = sum(contrib) - b
            if linearized:
                g = lcp.blocks[i - 1].T @ (y + rh * s)
                x[sl] = prox(lcp.f[i - 1], lcp.X[i - 1], EUCLIDEAN, g, x[sl], et)
            else:
                x[sl] = _exact_block(lcp, i, y, rh, s - contrib[i - 1], x[sl], et)
            contrib[i - 1] = lcp.blocks[i - 1] @ x[sl]
        r = sum(contrib) - b
        y = y + rh * r
        rec(k + 2, x, y, r)
    trace.x, trace.y = x, y
    trace.wall_time = time.perf_counter() - t0
    return trace


def vanilla_admm_run(lcp: LcpInstance, rho: float = 1.0, N: int = 1000,
                     checkpoints: Sequence[int] = (), keep_iterates: bool = False) -> LcpTrace:
    """Classical multi-block ADMM: exact Gauss-Seidel block minimization."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    tr = proximal_admm_run(lcp, rho, 0.0, N, linearized=False,
                           checkpoints=checkpoints, keep_iterates=keep_iterates)
    tr.method = "vanilla"
    return tr


def table_checkpoints(N: int) -> list[int]:
    """Powers of ten from 100 up to ``N``."""
    out, c = [], 100
    while c <= N:
        out.append(c)
        c *= 10
    return out


def norm_of_counterexample(p: int) -> float:
    from .linops import spectral_norm
    return spectral_norm(counterexample_matrix(p))


__all__ = [
    "LcpInstance", "LcpTrace", "counterexample_lcp", "rpd_lcp_run",
    "randomized_proximal_admm_run", "proximal_admm_run", "vanilla_admm_run",
    "table_checkpoints", "norm_of_counterexample",
]
