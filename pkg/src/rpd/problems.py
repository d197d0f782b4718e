"""Saddle-point problem model.

An instance is

    min_{x in X} max_{y in Y}  h(x) + <A x, y> - J(y),
    Y = Y_1 x ... x Y_p,  J(y) = sum_i J_i(y_i),

with every function of the form ``(mu/2)||u||^2 + <c, u>`` and every set a
box, a probability simplex or the whole space. That family is closed under
the prox and exact-maximizer operations the solvers need, so all oracles
below are closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linops import BlockLinearOperator, DimensionMismatch


class NoClosedFormProx(ValueError):
    """The requested (function, set, distance) combination has no closed form."""

    SUPPORTED = (
        "(zero|linear|quadratic, box|simplex|free, euclidean)",
        "(zero|linear, simplex, entropy)",
    )

    def __init__(self, fn: "SeparableFunction", S: "FeasibleSet", dgf: "DistanceGenerating"):
        self.triple = (fn.variant, S.kind, dgf.kind)
        super().__init__(
            f"no closed-form prox for {self.triple}; supported triples: "
            + ", ".join(self.SUPPORTED)
        )


class UnboundedMaximizer(ValueError):
    """max <g, u> - f(u) over a free set is +inf (f has no strong convexity)."""


# ---------------------------------------------------------------------------
# sets


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    d = v.size
    # stable sort keeps index order among ties
    u = v[np.argsort(-v, kind="stable")]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, d + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """A box, the probability simplex, or all of R^dim."""

    kind: str
    dim: int
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @classmethod
    def box(cls, lower, upper, dim: int | None = None) -> "FeasibleSet":
        if dim is not None:
            lower = np.broadcast_to(np.asarray(lower, dtype=float), (dim,))
            upper = np.broadcast_to(np.asarray(upper, dtype=float), (dim,))
        lo = np.array(lower, dtype=float).ravel()
        hi = np.array(upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise DimensionMismatch("box upper bounds", lo.size, hi.size)
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper coordinatewise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        return cls("box", lo.size, lo, hi)

    @classmethod
    def simplex(cls, dim: int) -> "FeasibleSet":
        if dim < 1:
            raise ValueError("simplex dimension must be >= 1")
        return cls("simplex", int(dim))

    @classmethod
    def free(cls, dim: int) -> "FeasibleSet":
        return cls("free", int(dim))

    @property
    def bounded(self) -> bool:
        return self.kind != "free"

    @property
    def diameter(self) -> float:
        """Euclidean diameter (inf for the free set)."""
        if self.kind == "box":
            return float(np.linalg.norm(self.upper - self.lower))
        if self.kind == "simplex":
            return math.sqrt(2.0) if self.dim >= 2 else 0.0
        return math.inf

    def project(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind == "box":
            return np.clip(v, self.lower, self.upper)
        if self.kind == "simplex":
            return project_simplex(v)
        return v.copy()

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,) or not np.all(np.isfinite(v)):
            return False
        if self.kind == "box":
            return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))
        if self.kind == "simplex":
            return bool(np.all(v >= -tol) and abs(v.sum() - 1.0) <= tol * max(1, self.dim))
        return True

    def center(self) -> np.ndarray:
        """Canonical start point: box midpoint, simplex barycenter, origin."""
        if self.kind == "box":
            return 0.5 * (self.lower + self.upper)
        if self.kind == "simplex":
            return np.full(self.dim, 1.0 / self.dim)
        return np.zeros(self.dim)

    def linear_argmax(self, d: np.ndarray) -> np.ndarray:
        """A maximizer of ``<d, u>``; ties go to the lowest index / lower bound."""
        if self.kind == "simplex":
            u = np.zeros(self.dim)
            u[int(np.argmax(d))] = 1.0  # argmax returns the first maximal index
            return u
        if self.kind == "box":
            return np.where(d > 0, self.upper, self.lower)
        if np.any(d != 0):
            raise UnboundedMaximizer(
                "linear objective over a free set is unbounded; use a bounded "
                "or strongly convex dual block"
            )
        return np.zeros(self.dim)

    def to_json_dict(self) -> dict:
        if self.kind == "box":
            return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        return {"type": self.kind, "dim": self.dim}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FeasibleSet":
        kind = d["type"]
        if kind == "box":
            return cls.box(d["lower"], d["upper"], d.get("dim"))
        if kind == "simplex":
            return cls.simplex(d["dim"])
        if kind == "free":
            return cls.free(d["dim"])
        raise ValueError(f"unknown set type {kind!r}")


# ---------------------------------------------------------------------------
# functions


@dataclass(frozen=True, eq=False)
class SeparableFunction:
    """``f(u) = (mu/2)||u||^2 + <c, u>``; ``c=None`` means no linear part."""

    mu: float = 0.0
    c: np.ndarray | None = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("strong convexity modulus must be nonnegative")
        if self.c is not None:
            c = np.array(self.c, dtype=float).ravel()
            c.setflags(write=False)
            object.__setattr__(self, "c", c)

    @classmethod
    def zero(cls) -> "SeparableFunction":
        return cls()

    @classmethod
    def linear(cls, c) -> "SeparableFunction":
        return cls(0.0, c)

    @classmethod
    def quadratic(cls, mu: float = 1.0, c=None) -> "SeparableFunction":
        return cls(float(mu), c)

    @property
    def modulus(self) -> float:
        return self.mu

    @property
    def variant(self) -> str:
        if self.mu > 0:
            return "quadratic"
        return "linear" if self.c is not None else "zero"

    def linear_part(self, dim: int) -> np.ndarray:
        if self.c is None:
            return np.zeros(dim)
        if self.c.size != dim:
            raise DimensionMismatch("linear coefficient", dim, self.c.size)
        return self.c

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=float)
        val = 0.5 * self.mu * float(u @ u) if self.mu else 0.0
        if self.c is not None:
            val += float(self.c @ u)
        return val

    def to_json_dict(self) -> dict:
        d: dict = {"mu": self.mu}
        if self.c is not None:
            d["c"] = self.c.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d) -> "SeparableFunction":
        if d in (None, "zero"):
            return cls()
        return cls(float(d.get("mu", 0.0)), d.get("c"))


def concave_argmax(f: SeparableFunction, S: FeasibleSet, g, hint=None) -> np.ndarray:
    """Exact maximizer of ``<g, u> - f(u)`` over ``S``.

    For ``mu > 0`` this is the projection of ``(g - c)/mu``. For ``mu = 0`` the
    problem is linear; ties follow :meth:`FeasibleSet.linear_argmax`. On a
    free set with a vanishing linear coefficient every point maximizes and
    ``hint`` (default: origin) is returned.
    """
    g = np.asarray(g, dtype=float)
    d = g - f.linear_part(S.dim)
    if f.mu > 0:
        return S.project(d / f.mu)
    if S.kind == "free" and not np.any(d) and hint is not None:
        return np.array(hint, dtype=float)
    return S.linear_argmax(d)


def concave_max(f: SeparableFunction, S: FeasibleSet, g) -> float:
    """``max_{u in S} <g, u> - f(u)``."""
    u = concave_argmax(f, S, g)
    return float(np.asarray(g, dtype=float) @ u) - f(u)


# ---------------------------------------------------------------------------
# distance-generating functions


@dataclass(frozen=True)
class DistanceGenerating:
    """Distance-generating function ``omega`` and its Bregman distance.

    ``euclidean``: omega = ||u||^2/2, modulus 1 w.r.t. the l2 norm.
    ``entropy``: omega = sum u_j ln u_j on the simplex, modulus 1 w.r.t. l1.
    """

    kind: str = "euclidean"

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropy"):
            raise ValueError(f"unknown distance-generating function {self.kind!r}")

    @property
    def norm(self) -> str:
        return "l2" if self.kind == "euclidean" else "l1"

    def bregman(self, z, y) -> float:
        """``V(z, y) = omega(y) - omega(z) - <grad omega(z), y - z>``."""
        z = np.asarray(z, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "euclidean":
            return 0.5 * float((y - z) @ (y - z))
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(y > 0, y * (np.log(y) - np.log(z)), 0.0)
        return float(terms.sum() - y.sum() + z.sum())

    def diameter(self, S: FeasibleSet) -> float:
        """Bregman diameter of ``S`` used in the rate bounds."""
        if self.kind == "euclidean":
            return 0.5 * S.diameter ** 2
        if S.kind != "simplex":
            raise ValueError("entropy distance is only defined on a simplex")
        return math.log(S.dim)

    def start(self, S: FeasibleSet) -> np.ndarray:
        """Minimizer of omega over ``S`` (the prox center)."""
        return S.center()


EUCLIDEAN = DistanceGenerating("euclidean")
ENTROPY = DistanceGenerating("entropy")


def prox(f: SeparableFunction, S: FeasibleSet, dgf: DistanceGenerating,
         g, center, step: float) -> np.ndarray:
    """Minimizer over ``S`` of ``<g, u> + f(u) + step * V(center, u)``."""
    if not step > 0:
        raise ValueError(f"prox step must be positive, got {step}")
    lin = np.asarray(g, dtype=float) + f.linear_part(S.dim) if f.c is not None else np.asarray(g, dtype=float)
    if dgf.kind == "euclidean":
        # isotropic quadratic => projecting its unconstrained minimizer is exact
        if f.mu > 0:
            w = (step * center - lin) / (f.mu + step)
        else:
            w = center - lin / step
        return S.project(w)
    if S.kind != "simplex" or f.mu > 0:
        raise NoClosedFormProx(f, S, dgf)
    with np.errstate(divide="ignore"):
        logits = np.log(center) - lin / step
    logits -= logits.max()
    u = np.exp(logits)
    return u / u.sum()


# ---------------------------------------------------------------------------
# instances


def lagrangian(inst: "SaddleInstance", x, y) -> float:
    """``h(x) + <A x, y> - J(y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = inst.h(x) + float(inst.A.apply(x) @ y)
    for Ji, yi in zip(inst.J, inst.A.split(y)):
        val -= Ji(yi)
    return val


@dataclass(frozen=True, eq=False)
class SaddleInstance:
    """A bilinear saddle-point problem with block-separable dual.

    ``saddle`` is an optional certified saddle point ``(x*, y*)``.
    ``dual_start`` is consulted only where the initial dual maximizer is
    not unique on a free block (see :func:`initial_dual`).
    """

    A: BlockLinearOperator
    h: SeparableFunction
    X: FeasibleSet
    J: tuple
    Y: tuple
    dgf_x: DistanceGenerating = EUCLIDEAN
    dgf_y: tuple | None = None
    saddle: tuple | None = None
    dual_start: np.ndarray | None = None
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = self.A
        object.__setattr__(self, "J", tuple(self.J))
        object.__setattr__(self, "Y", tuple(self.Y))
        if self.dgf_y is None:
            object.__setattr__(self, "dgf_y", (EUCLIDEAN,) * A.p)
        else:
            object.__setattr__(self, "dgf_y", tuple(self.dgf_y))
        if self.X.dim != A.n:
            raise DimensionMismatch("primal set dimension", A.n, self.X.dim)
        if not len(self.J) == len(self.Y) == len(self.dgf_y) == A.p:
            raise ValueError(
                f"need one J_i, Y_i and distance per block: p={A.p}, got "
                f"{len(self.J)}, {len(self.Y)}, {len(self.dgf_y)}"
            )
        for i, (Yi, mi) in enumerate(zip(self.Y, A.block_dims)):
            if Yi.dim != mi:
                raise DimensionMismatch(f"dual block {i + 1} dimension", mi, Yi.dim)
        if self.saddle is not None:
            xs, ys = (np.asarray(v, dtype=float) for v in self.saddle)
            object.__setattr__(self, "saddle", (xs, ys))
            worst = max(lagrangian(self, xs, y) - lagrangian(self, x, ys)
                        for x, y in _probe_points(self))
            if worst > 1e-9:
                raise ValueError(f"supplied saddle point fails certificate: Q0 = {worst:.3e}")

    @property
    def p(self) -> int:
        return self.A.p

    @property
    def smooth(self) -> bool:
        """True iff every J_i is strongly convex with modulus >= 1."""
        return min(Ji.modulus for Ji in self.J) >= 1.0

    @property
    def bounded(self) -> bool:
        return self.X.bounded and all(Yi.bounded for Yi in self.Y)

    @property
    def omega_x(self) -> float:
        return self.X.diameter

    @property
    def omega_y(self) -> float:
        return math.sqrt(sum(Yi.diameter ** 2 for Yi in self.Y))

    def with_dgfs(self, dgf_x: DistanceGenerating, dgf_y) -> "SaddleInstance":
        if isinstance(dgf_y, DistanceGenerating):
            dgf_y = (dgf_y,) * self.p
        return SaddleInstance(self.A, self.h, self.X, self.J, self.Y, dgf_x, tuple(dgf_y),
                              self.saddle, self.dual_start, self.name, dict(self.meta))

    def euclidean(self) -> "SaddleInstance":
        if self.dgf_x == EUCLIDEAN and all(d == EUCLIDEAN for d in self.dgf_y):
            return self
        return self.with_dgfs(EUCLIDEAN, EUCLIDEAN)

    def default_start(self) -> np.ndarray:
        return self.X.center()


def _probe_points(inst: SaddleInstance):
    """A fixed set of feasible comparators used for saddle certificates."""
    def probes(S: FeasibleSet):
        pts = [S.center()]
        for d in (np.eye(S.dim)[0], -np.eye(S.dim)[0], np.ones(S.dim),
                  -np.ones(S.dim), (-1.0) ** np.arange(S.dim)):
            if S.bounded:
                pts.append(S.linear_argmax(d))
            else:
                pts.append(S.center() + d)
        return pts

    xs = probes(inst.X)
    per_block = [probes(Yi) for Yi in inst.Y]
    ys = [np.concatenate([blk[k] for blk in per_block]) for k in range(len(per_block[0]))]
    return [(x, y) for x in xs for y in ys]


def prox_dual_block(inst: SaddleInstance, i: int, linear_term, center, tau: float,
                    dgf: DistanceGenerating | None = None) -> np.ndarray:
    """Dual block update for 1-based block ``i``.

    Minimizes ``<linear_term, u> + J_i(u) + tau * V_i(center, u)`` over ``Y_i``.
    """
    k = i - 1
    return prox(inst.J[k], inst.Y[k], dgf or inst.dgf_y[k], linear_term, center, tau)


def prox_primal(inst: SaddleInstance, linear_term, center, eta: float,
                dgf: DistanceGenerating | None = None) -> np.ndarray:
    """Minimizes ``h(u) + <linear_term, u> + eta * V(center, u)`` over ``X``."""
    return prox(inst.h, inst.X, dgf or inst.dgf_x, linear_term, center, eta)


def initial_dual(inst: SaddleInstance, x1) -> np.ndarray:
    """Per-block maximizer of ``<A_i x1, y_i> - J_i(y_i)`` over ``Y_i``."""
    Ax = inst.A.apply(x1)
    hints = inst.A.split(inst.dual_start) if inst.dual_start is not None else [None] * inst.p
    blocks = [concave_argmax(Ji, Yi, gi, hint)
              for Ji, Yi, gi, hint in zip(inst.J, inst.Y, inst.A.split(Ax), hints)]
    return np.concatenate(blocks)


# ---------------------------------------------------------------------------
# builders


def _split_rows(m: int, p: int) -> list[int]:
    if p < 1 or m % p:
        raise ValueError(f"cannot split {m} rows into {p} equal contiguous blocks")
    return [m // p] * p


def solve_block_game_lp(M, block_dims) -> tuple[np.ndarray, np.ndarray, float]:
    """Saddle point of min_{x in simplex} max_{y in prod of simplices} <Mx, y> by LP.

    Solves ``min sum_i t_i  s.t.  M_i x <= t_i 1, x in simplex`` and reads the
    dual block strategies from the inequality marginals.
    """
    from scipy.optimize import linprog

    M = np.asarray(M, dtype=float)
    m, n = M.shape
    p = len(block_dims)
    owner = np.repeat(np.arange(p), block_dims)
    # variables: x (n), t (p)
    c = np.concatenate([np.zeros(n), np.ones(p)])
    A_ub = np.hstack([M, -np.eye(p)[owner]])
    b_ub = np.zeros(m)
    A_eq = np.concatenate([np.ones(n), np.zeros(p)])[None, :]
    bounds = [(0, None)] * n + [(None, None)] * p
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    x = np.clip(res.x[:n], 0, None)
    x /= x.sum()
    y = np.clip(-res.ineqlin.marginals, 0, None)
    for i in range(p):
        sl = owner == i
        y[sl] /= y[sl].sum()
    return x, y, float(res.fun)


def _two_by_two_saddle(M: np.ndarray, p: int):
    a, b = M[0]
    c, d = M[1]
    if p == 2:
        # each dual block is a single row, so y = (1, 1) and x minimizes column sums
        s = M.sum(axis=0)
        x = (s == s.min()).astype(float)
        return x / x.sum(), np.ones(2)
    # pure saddle: entry that is max in its column (dual maximizes) and min in its row
    for r in range(2):
        for k in range(2):
            if M[r, k] >= M[:, k].max() and M[r, k] <= M[r].min():
                return np.eye(2)[k], np.eye(2)[r]
    den = a + d - b - c
    x1 = (d - b) / den
    y1 = (d - c) / den
    return np.array([x1, 1 - x1]), np.array([y1, 1 - y1])


def build_matrix_game(M, p: int = 1, lp_oracle=None, name: str = "matrix_game") -> SaddleInstance:
    """Bilinear game: x on the column simplex, y_i on the simplex of block-i rows.

    A saddle point is attached for 2x2 payoffs (closed form) or when an
    ``lp_oracle(M, block_dims) -> (x, y, value)`` is given.
    """
    M = np.asarray(M, dtype=float)
    m, n = M.shape
    dims = _split_rows(m, p)
    A = BlockLinearOperator(M, dims)
    saddle = None
    if M.shape == (2, 2):
        saddle = _two_by_two_saddle(M, p)
    elif lp_oracle is not None:
        xs, ys, _ = lp_oracle(M, dims)
        saddle = (xs, ys)
    return SaddleInstance(
        A, SeparableFunction.zero(), FeasibleSet.simplex(n),
        [SeparableFunction.zero()] * p, [FeasibleSet.simplex(d) for d in dims],
        saddle=saddle, name=name,
    )


def counterexample_matrix(p: int) -> np.ndarray:
    """Columns A_1 = (1;...;1), A_2 = (1;...;1;2), ..., A_p = (1;2;...;2)."""
    if p < 2:
        raise ValueError("counterexample needs p >= 2")
    r = np.arange(1, p + 1)[:, None]
    i = np.arange(1, p + 1)[None, :]
    return np.where(r + i <= p + 1, 1.0, 2.0)


def lcp_saddle_instance(blocks, b, f, X, x_start=None, x_star=None,
                        name: str = "lcp") -> SaddleInstance:
    """Saddle form of ``min sum f_i(x_i) s.t. sum A_i x_i = b``.

    The multiplier ``y`` in R^m plays the minimizing role with ``h(y) = <b, y>``;
    the blocks ``x_i`` are the maximizing dual blocks with ``J_i = f_i``, so
    the coupling rows are ``-A_i^T``.
    """
    blocks = [np.asarray(Ai, dtype=float).reshape(len(b), -1) for Ai in blocks]
    b = np.asarray(b, dtype=float)
    A = BlockLinearOperator.from_blocks([-Ai.T for Ai in blocks])
    saddle = None
    if x_star is not None:
        saddle = (np.zeros(b.size), np.asarray(x_star, dtype=float))
    return SaddleInstance(
        A, SeparableFunction.linear(b) if np.any(b) else SeparableFunction.zero(),
        FeasibleSet.free(b.size), list(f), list(X), saddle=saddle,
        dual_start=None if x_start is None else np.asarray(x_start, dtype=float),
        name=name,
    )


def build_counterexample_lcp(p: int) -> SaddleInstance:
    """Saddle form of the homogeneous system ``sum_i A_i x_i = 0``.

    Scalar free blocks, ``f_i = 0``, ``b = 0``; the unique solution is 0 and
    the canonical start is ``x = (1, ..., 1)``, ``y = 0``.
    """
    M = counterexample_matrix(p)
    inst = lcp_saddle_instance(
        [M[:, [i]] for i in range(p)], np.zeros(p),
        [SeparableFunction.zero()] * p, [FeasibleSet.free(1)] * p,
        x_start=np.ones(p), x_star=np.zeros(p), name="counterexample_lcp",
    )
    inst.meta["p"] = p
    return inst


def build_regularized_loss_toy(A, smooth: bool = True, b=None, mu_h: float = 0.0,
                               radius: float = 10.0, block_dims=None) -> SaddleInstance:
    """Regularized least squares ``min (mu_h/2)||x||^2 + sum_i f_i(A_i x)``.

    With ``smooth`` the losses are ``f_i(u) = ||u - b_i||^2/2`` restricted by
    the dual box, i.e. ``J_i(y) = ||y||^2/2 + <b_i, y>`` (modulus 1). Without
    it ``J_i = <b_i, y>`` (modulus 0). All sets are boxes ``[-radius, radius]``.
    """
    if isinstance(A, BlockLinearOperator):
        op = A
    else:
        A = np.asarray(A, dtype=float)
        op = BlockLinearOperator(A, block_dims or [1] * A.shape[0])
    if b is None:
        b = np.ones(op.m)
    b = np.asarray(b, dtype=float)
    Js = [SeparableFunction.quadratic(1.0, bi) if smooth else SeparableFunction.linear(bi)
          for bi in op.split(b)]
    X = FeasibleSet.box(-radius, radius, op.n)
    Ys = [FeasibleSet.box(-radius, radius, d) for d in op.block_dims]
    h = SeparableFunction.quadratic(mu_h) if mu_h > 0 else SeparableFunction.zero()
    saddle = None
    if smooth:
        # stationarity: mu x + A^T y = 0 and y = A x - b; valid if interior
        Am = op.matrix
        try:
            xs = np.linalg.solve(mu_h * np.eye(op.n) + Am.T @ Am, Am.T @ b)
        except np.linalg.LinAlgError:
            xs = None
        if xs is not None:
            ys = Am @ xs - b
            if np.all(np.abs(xs) < radius) and np.all(np.abs(ys) < radius):
                saddle = (xs, ys)
    return SaddleInstance(op, h, X, Js, Ys, saddle=saddle,
                          name="regularized_loss" + ("_smooth" if smooth else ""))


# ---------------------------------------------------------------------------
# JSON


def _matrix_from(d: dict) -> np.ndarray:
    mat = np.asarray(d["matrix"], dtype=float)
    if mat.ndim == 1:
        n = int(d["n"])
        mat = mat.reshape(-1, n)
    return mat


def instance_from_json(d: dict) -> SaddleInstance:
    """Build an instance from the JSON schema keyed by ``kind``."""
    kind = d["kind"]
    if kind == "matrix_game":
        p = int(d.get("p", 1))
        oracle = solve_block_game_lp if d.get("solve_lp") else None
        return build_matrix_game(_matrix_from(d), p, lp_oracle=oracle)
    if kind == "counterexample_lcp":
        return build_counterexample_lcp(int(d["p"]))
    if kind == "regularized_loss":
        mat = _matrix_from(d)
        dims = d.get("block_dims")
        if dims is None and "p" in d:
            dims = _split_rows(mat.shape[0], int(d["p"]))
        return build_regularized_loss_toy(
            BlockLinearOperator(mat, dims or [1] * mat.shape[0]),
            smooth=bool(d.get("smooth", True)), b=d.get("b"),
            mu_h=float(d.get("mu_h", 0.0)), radius=float(d.get("radius", 10.0)),
        )
    if kind == "custom":
        A = BlockLinearOperator.from_json_dict(d)
        p = A.p
        J = [SeparableFunction.from_json_dict(j) for j in d.get("J", [None] * p)]
        Y = [FeasibleSet.from_json_dict(s) for s in d["Y"]]
        dgf_y = [DistanceGenerating(k) for k in d.get("dgf_y", ["euclidean"] * p)]
        saddle = None
        if "saddle" in d:
            saddle = (np.asarray(d["saddle"]["x"]), np.asarray(d["saddle"]["y"]))
        return SaddleInstance(
            A, SeparableFunction.from_json_dict(d.get("h")), FeasibleSet.from_json_dict(d["X"]),
            J, Y, DistanceGenerating(d.get("dgf_x", "euclidean")), dgf_y, saddle=saddle,
        )
    raise ValueError(f"unknown instance kind {kind!r}")


def instance_to_json(inst: SaddleInstance) -> dict:
    """Serialize any instance in the ``custom`` schema."""
    d = {"kind": "custom", "p": inst.p}
    d.update(inst.A.to_json_dict())
    d["h"] = inst.h.to_json_dict()
    d["X"] = inst.X.to_json_dict()
    d["J"] = [Ji.to_json_dict() for Ji in inst.J]
    d["Y"] = [Yi.to_json_dict() for Yi in inst.Y]
    d["dgf_x"] = inst.dgf_x.kind
    d["dgf_y"] = [g.kind for g in inst.dgf_y]
    if inst.saddle is not None:
        d["saddle"] = {"x": inst.saddle[0].tolist(), "y": inst.saddle[1].tolist()}
    return d
