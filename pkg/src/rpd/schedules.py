"""Parameter schedules (tau_t, eta_t, q_t, gamma_t, theta_t) and rate bounds.

Indexing: the iteration counter ``t`` runs over 1..N-1 as in the method's
description; arrays are stored 0-based, so the value for ``t`` lives at
index ``t - 1``. ``theta`` (smooth regime only) carries one extra entry,
``theta[N-1]`` = theta_N, which the coupling condition at ``t = N-1`` needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REGIMES = ("general_bounded", "smooth", "unbounded")
SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Schedule:
    N: int
    regime: str
    tau: np.ndarray
    eta: np.ndarray
    q: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.N < 2:
            raise ValueError("N must be >= 2")
        for name in ("tau", "eta", "q", "gamma"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.N - 1,):
                raise ValueError(f"{name} must have length N-1 = {self.N - 1}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.theta is not None:
            th = np.array(self.theta, dtype=float)
            th.setflags(write=False)
            object.__setattr__(self, "theta", th)

    def __len__(self) -> int:
        return self.N - 1

    def at(self, t: int) -> dict:
        """Parameters of iteration ``t`` (1-based)."""
        k = t - 1
        out = {"tau": self.tau[k], "eta": self.eta[k], "q": self.q[k], "gamma": self.gamma[k]}
        if self.theta is not None:
            out["theta"] = self.theta[k]
        return out

    @property
    def gamma_sum(self) -> float:
        return math.fsum(self.gamma)

    def replace(self, **arrays) -> "Schedule":
        """Copy with some arrays replaced (used to inject perturbations)."""
        kw = dict(N=self.N, regime=self.regime, tau=self.tau, eta=self.eta, q=self.q,
                  gamma=self.gamma, theta=self.theta)
        kw.update(arrays)
        return Schedule(**kw)

    def to_json_dict(self) -> dict:
        d = {"N": self.N, "regime": self.regime}
        for name in ("tau", "eta", "q", "gamma", "theta"):
            arr = getattr(self, name)
            if arr is not None:
                d[name] = arr.tolist()
        return d


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    condition: str
    t: int
    lhs: float
    rhs: float

    def __str__(self) -> str:
        return f"{self.condition} violated at t={self.t}: lhs={self.lhs:.6g} rhs={self.rhs:.6g}"


@dataclass
class ConditionCheck:
    condition: str
    t_range: tuple[int, int]
    worst_slack: float  # min over t of (lhs - rhs)/scale; < -SLACK is a violation
    violations: list = field(default_factory=list)


@dataclass
class ScheduleReport:
    regime: str
    checks: list

    @property
    def violations(self) -> list:
        return [v for c in self.checks for v in c.violations]

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def violated(self) -> set:
        return {v.condition for v in self.violations}

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            lo, hi = c.t_range
            rng = f"t={lo}..{hi}" if lo <= hi else "t=(empty)"
            status = "ok" if not c.violations else f"FAIL({len(c.violations)})"
            slack = "n/a" if math.isinf(c.worst_slack) else f"{c.worst_slack:+.3e}"
            out.append(f"{c.condition:<40s} {rng:<14s} worst_slack={slack:<11s} {status}")
        return out


class _Checker:
    def __init__(self):
        self.checks = []

    def _check(self, name, ts, lhs_fn, rhs_fn, equality):
        ts = list(ts)
        worst = math.inf
        bad = []
        for t in ts:
            lhs, rhs = float(lhs_fn(t)), float(rhs_fn(t))
            scale = max(abs(lhs), abs(rhs), 1.0)
            slack = (-abs(lhs - rhs) if equality else lhs - rhs) / scale
            worst = min(worst, slack)
            if slack < -SLACK:
                bad.append(Violation(name, t, lhs, rhs))
        rng = (ts[0], ts[-1]) if ts else (1, 0)
        self.checks.append(ConditionCheck(name, rng, worst, bad))

    def ge(self, name, ts, lhs, rhs):
        self._check(name, ts, lhs, rhs, equality=False)

    def eq(self, name, ts, lhs, rhs):
        self._check(name, ts, lhs, rhs, equality=True)


def validate_general(s: Schedule, p: int, normA: float) -> ScheduleReport:
    """Check the bounded-case conditions on (q, gamma, tau, eta)."""
    N = s.N
    tau = lambda t: s.tau[t - 1]  # noqa: E731
    eta = lambda t: s.eta[t - 1]  # noqa: E731
    q = lambda t: s.q[t - 1]  # noqa: E731
    g = lambda t: s.gamma[t - 1]  # noqa: E731
    A2 = normA ** 2
    c = _Checker()
    c.eq("q_t = p", range(1, N), q, lambda t: p)
    c.eq("gamma_t = q_t/p - (p-1)/p", range(1, N - 1), g, lambda t: q(t) / p - (p - 1) / p)
    c.eq("gamma_{N-1} = 1", [N - 1], g, lambda t: 1.0)
    c.ge("tau_{t-1} >= tau_t", range(2, N), lambda t: tau(t - 1), tau)
    c.ge("gamma_{t-1}eta_{t-1} >= gamma_t eta_t", range(2, N),
         lambda t: g(t - 1) * eta(t - 1), lambda t: g(t) * eta(t))
    c.ge("p gamma_t eta_t tau_{t+1} >= q_t^2 |A|^2", range(1, N - 1),
         lambda t: p * g(t) * eta(t) * tau(t + 1), lambda t: q(t) ** 2 * A2)
    c.ge("gamma_{N-1}eta_{N-1}tau_{N-1} >= |A|^2", [N - 1],
         lambda t: g(t) * eta(t) * tau(t), lambda t: A2)
    return ScheduleReport("general_bounded", c.checks)


def validate_unbounded(s: Schedule, p: int, normA: float) -> ScheduleReport:
    """Bounded-case conditions plus the constant-sequence conditions."""
    rep = validate_general(s, p, normA)
    N = s.N
    c = _Checker()
    c.eq("tau_{t-1} = tau_t", range(2, N), lambda t: s.tau[t - 2], lambda t: s.tau[t - 1])
    c.eq("gamma_{t-1}eta_{t-1} = gamma_t eta_t", range(2, N),
         lambda t: s.gamma[t - 2] * s.eta[t - 2], lambda t: s.gamma[t - 1] * s.eta[t - 1])
    c.eq("gamma_{t-1} = gamma_t", range(2, N - 1),
         lambda t: s.gamma[t - 2], lambda t: s.gamma[t - 1])
    return ScheduleReport("unbounded", rep.checks + c.checks)


def validate_smooth(s: Schedule, p: int, normA: float) -> ScheduleReport:
    """Check the strongly convex (smooth) regime conditions.

    Conditions reaching past the stored horizon use ``theta_N`` (stored) and
    otherwise are checked on the largest t-range the arrays define.
    """
    if s.theta is None or s.theta.shape != (s.N,):
        raise ValueError("smooth schedules carry theta_1..theta_N")
    N = s.N
    tau = lambda t: s.tau[t - 1]  # noqa: E731
    eta = lambda t: s.eta[t - 1]  # noqa: E731
    q = lambda t: s.q[t - 1]  # noqa: E731
    g = lambda t: s.gamma[t - 1]  # noqa: E731
    th = lambda t: s.theta[t - 1]  # noqa: E731
    A2 = normA ** 2
    c = _Checker()
    c.eq("theta_t = q_t theta_{t+1}/p", range(1, N), th, lambda t: q(t) * th(t + 1) / p)
    c.eq("gamma_t = (q_t/p - (p-1)/p) theta_{t+1}", range(1, N - 1), g,
         lambda t: (q(t) / p - (p - 1) / p) * th(t + 1))
    c.eq("gamma_{N-1} = theta_{N-1}", [N - 1], g, th)
    c.ge("theta_t(1+tau_t) >= theta_{t+1}((p-1)/p+tau_{t+1})", range(1, N - 1),
         lambda t: th(t) * (1 + tau(t)), lambda t: th(t + 1) * ((p - 1) / p + tau(t + 1)))
    c.ge("gamma_t eta_t >= gamma_{t+1}eta_{t+1}", range(1, N - 1),
         lambda t: g(t) * eta(t), lambda t: g(t + 1) * eta(t + 1))
    c.ge("p gamma_{t-1}eta_{t-1}tau_t >= q_{t-1}^2 theta_t |A|^2", range(2, N),
         lambda t: p * g(t - 1) * eta(t - 1) * tau(t), lambda t: q(t - 1) ** 2 * th(t) * A2)
    c.ge("eta_{N-1}tau_{N-1} >= |A|^2", [N - 1], lambda t: eta(t) * tau(t), lambda t: A2)
    return ScheduleReport("smooth", c.checks)


VALIDATORS = {
    "general_bounded": validate_general,
    "smooth": validate_smooth,
    "unbounded": validate_unbounded,
}


def validate(s: Schedule, p: int, normA: float) -> ScheduleReport:
    return VALIDATORS[s.regime](s, p, normA)


# ---------------------------------------------------------------------------
# constructors


def _check_common(p, N, normA=None):
    if p < 1:
        raise ValueError("p must be >= 1")
    if N < 2:
        raise ValueError("N must be >= 2")
    if normA is not None and not normA > 0:
        raise ValueError("operator norm must be positive")


def general_bounded_schedule(p: int, normA: float, omega_x: float, omega_y: float,
                             N: int) -> Schedule:
    """Constant-stepsize schedule for bounded X and Y without strong convexity."""
    _check_common(p, N, normA)
    if math.isinf(omega_x) or math.isinf(omega_y):
        raise ValueError("infinite diameter: use unbounded_schedule for unbounded X or Y")
    if not (omega_x > 0 and omega_y > 0):
        raise ValueError("diameters must be positive")
    sp = math.sqrt(p)
    T = N - 1
    gamma = np.full(T, 1.0 / p)
    gamma[-1] = 1.0
    tau = np.full(T, sp * normA * omega_x / omega_y)
    eta = np.full(T, p * sp * normA * omega_y / omega_x)
    eta[-1] = sp * normA * omega_y / omega_x
    return Schedule(N, "general_bounded", tau, eta, np.full(T, float(p)), gamma)


def smooth_schedule(p: int, normA: float, N: int) -> Schedule:
    """Increasing-weight schedule for strongly convex J_i (modulus 1)."""
    _check_common(p, N, normA)
    t = np.arange(1, N, dtype=float)
    q = p * (t + 3 * p) / (t + 3 * p + 1)
    gamma = (t + 2 * p + 1) / p
    gamma[-1] = N + 3 * p - 1
    theta = np.arange(1, N + 1, dtype=float) + 3 * p
    tau = (t + p) / (2 * p)
    eta = 2 * p ** 3 * normA ** 2 / (t + 2 * p + 1)
    return Schedule(N, "smooth", tau, eta, q, gamma, theta)


def unbounded_schedule(p: int, normA: float, N: int) -> Schedule:
    """Constant schedule whose guarantees do not need bounded sets."""
    _check_common(p, N, normA)
    T = N - 1
    gamma = np.full(T, 1.0 / p)
    gamma[-1] = 1.0
    step = normA * p ** 1.5
    eta = np.full(T, step)
    eta[-1] = normA * math.sqrt(p)
    return Schedule(N, "unbounded", np.full(T, step), eta, np.full(T, float(p)), gamma)


# ---------------------------------------------------------------------------
# bounds


def bound_general(p, normA, omega_x, omega_y, N) -> float:
    return p ** 1.5 * normA * omega_x * omega_y / (N + p - 2)


def bound_smooth(p, normA, omega_x, omega_y, N) -> float:
    return 2.0 / (N * (N + p)) * (p ** 3 * normA ** 2 * omega_x ** 2 + 4.5 * p ** 2 * omega_y ** 2)


def bound_unbounded(p, normA, D, N) -> tuple[float, float]:
    """(perturbed-gap bound, bound on the mean norm of the perturbation vector)."""
    gap = 5 * p ** 1.5 * normA * D ** 2 / (N + p - 2)
    vnorm = p / (N + p - 2) * (4 * math.sqrt(p) + 1 + math.sqrt(2)) * normA * D
    return gap, vnorm


def bound_from_schedule(s: Schedule, dist_x: float, dist_y: float) -> float:
    """``(sum gamma)^{-1} [gamma_1 eta_1 dist_x / 2 + tau_1 dist_y / 2]``.

    With squared Euclidean diameters this is the generic bounded-case bound;
    with Bregman diameters D_X, D_Y it is the non-Euclidean one.
    """
    return (s.gamma[0] * s.eta[0] * dist_x / 2 + s.tau[0] * dist_y / 2) / s.gamma_sum
