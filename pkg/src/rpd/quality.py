"""Optimality certificates for approximate saddle points.

``gap_Q0`` compares a candidate with one comparator, ``sup_gap_g0`` maximizes
that comparison over the whole (bounded) domain, and the perturbation vector
makes the comparison meaningful when the domain is unbounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .linops import spectral_norm
from .problems import SaddleInstance, concave_max, lagrangian
from .schedules import Schedule


class UnboundedGap(ValueError):
    """The sup-gap is not finite on an unbounded domain."""

    def __init__(self):
        super().__init__(
            "sup_gap_g0 needs bounded X and Y; on unbounded instances use "
            "perturbation_vector with perturbed_gap_at instead"
        )


class MissingSnapshot(ValueError):
    pass


def gap_Q0(inst: SaddleInstance, z_hat, z) -> float:
    """``L(x_hat, y) - L(x, y_hat)`` for ``L(x, y) = h(x) + <Ax, y> - J(y)``."""
    (xh, yh), (x, y) = z_hat, z
    return lagrangian(inst, xh, y) - lagrangian(inst, x, yh)


def sup_gap_g0(inst: SaddleInstance, z_hat) -> float:
    """Maximum of ``gap_Q0(z_hat, z)`` over all feasible ``z``.

    Both inner problems separate: over ``y`` blockwise, over ``x`` as one
    concave maximization, each solved in closed form.
    """
    if not inst.bounded:
        raise UnboundedGap()
    xh, yh = (np.asarray(v, dtype=float) for v in z_hat)
    A = inst.A
    dual = sum(concave_max(Ji, Yi, gi)
               for Ji, Yi, gi in zip(inst.J, inst.Y, A.split(A.apply(xh))))
    primal = concave_max(inst.h, inst.X, -A.adjoint_apply(yh))
    const = inst.h(xh) + sum(Ji(yi) for Ji, yi in zip(inst.J, A.split(yh)))
    return dual + primal + const


def perturbation_vector(inst: SaddleInstance, sched: Schedule, trace) -> tuple[np.ndarray, float]:
    """Concatenated primal/dual perturbation vector and its Euclidean norm.

    Built from the start pair and the last two primal iterates kept in the
    trace, with the final-step parameters of ``sched``.
    """
    for attr in ("x_start", "y_start", "x_prev", "x_last", "y_last"):
        if getattr(trace, attr, None) is None:
            raise MissingSnapshot(f"trace lacks {attr}")
    k = sched.N - 2
    g, eta, tau = sched.gamma[k], sched.eta[k], sched.tau[k]
    vx = 0.5 * g * eta * (trace.x_last - trace.x_start)
    vy = (inst.A.apply(trace.x_last) - inst.A.apply(trace.x_prev)
          + 0.5 * tau * (trace.y_last - trace.y_start))
    v = np.concatenate([vx, vy]) / sched.gamma_sum
    return v, float(np.linalg.norm(v))


def perturbed_gap_at(inst: SaddleInstance, z_hat, v, z_ref) -> float:
    """``Q0(z_hat, z_ref) + <v, z_hat - z_ref>``.

    At ``z_ref = z*`` this is a lower bound on the perturbed sup-gap.
    """
    xh, yh = (np.asarray(u, dtype=float) for u in z_hat)
    xr, yr = (np.asarray(u, dtype=float) for u in z_ref)
    diff = np.concatenate([xh - xr, yh - yr])
    return gap_Q0(inst, (xh, yh), (xr, yr)) + float(np.asarray(v) @ diff)


def distance_D(inst: SaddleInstance, sched: Schedule, x1=None, y1=None) -> float:
    """Weighted start-to-solution distance used by the unbounded-regime bounds."""
    if inst.saddle is None:
        raise ValueError("distance_D needs a known saddle point")
    if y1 is None:
        from .solver import start_point
        x1, y1 = start_point(inst, x1)
    xs, ys = inst.saddle
    w = sched.tau[0] / (sched.eta[0] * sched.gamma[0])
    return math.sqrt(float(np.sum((xs - x1) ** 2)) + w * float(np.sum((ys - y1) ** 2)))


def constant_K(sched: Schedule, normA: float) -> float:
    """Constant with ``E||v_N|| <= K D / sum(gamma)``."""
    k = sched.N - 2
    g, eta, tau = sched.gamma[k], sched.eta[k], sched.tau[k]
    return 2 * g * eta + 2 * math.sqrt(g * tau * eta) + normA * (1 + math.sqrt(2))


def induced_norm(inst: SaddleInstance) -> float:
    """Norm of ``A`` from the primal norm to the dual of the block norm.

    Block ``i`` uses l2 (Euclidean) or l1 (entropy), whose duals are l2 and
    linf. With an l1 primal the maximum sits at a signed coordinate vector
    and is computed exactly; otherwise the spectral norm is returned, which
    dominates the true value because linf <= l2.
    """
    A = inst.A
    if inst.dgf_x.kind == "entropy":
        cols = np.zeros(A.n)
        for k, g in enumerate(inst.dgf_y):
            Bk = np.abs(A.block(k))
            cols += (Bk.max(axis=0) if g.kind == "entropy" else np.sqrt((Bk ** 2).sum(axis=0))) ** 2
        return float(np.sqrt(cols.max()))
    return spectral_norm(A)


def bregman_diameters(inst: SaddleInstance) -> tuple[float, float]:
    """``(D_X, D_Y)`` with ``D_Y`` summed over blocks."""
    DX = inst.dgf_x.diameter(inst.X)
    DY = sum(g.diameter(Yi) for g, Yi in zip(inst.dgf_y, inst.Y))
    return DX, DY


@dataclass
class GapReport:
    N: int
    seed: int | None = None
    Q0_at_star: float | None = None
    g0: float | None = None
    v_N: list | None = None
    v_N_norm: float | None = None
    perturbed_gap: float | None = None
    theory_bound: float | None = None
    theory_bound_v: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def gap_report(inst: SaddleInstance, sched: Schedule, z_hat, trace=None,
               normA: float | None = None) -> GapReport:
    """Every certificate that applies to ``inst``, plus the matching bound."""
    from .schedules import bound_general, bound_smooth, bound_unbounded

    rep = GapReport(N=sched.N, seed=getattr(trace, "seed", None))
    if inst.saddle is not None:
        rep.Q0_at_star = gap_Q0(inst, z_hat, inst.saddle)
    normA = spectral_norm(inst.A) if normA is None else normA
    p = inst.p
    if inst.bounded:
        rep.g0 = sup_gap_g0(inst, z_hat)
        bound = bound_smooth if sched.regime == "smooth" else bound_general
        rep.theory_bound = bound(p, normA, inst.omega_x, inst.omega_y, sched.N)
    elif trace is not None:
        v, nv = perturbation_vector(inst, sched, trace)
        rep.v_N, rep.v_N_norm = v.tolist(), nv
        if inst.saddle is not None:
            rep.perturbed_gap = perturbed_gap_at(inst, z_hat, v, inst.saddle)
            D = distance_D(inst, sched, trace.x_start, trace.y_start)
            rep.theory_bound, rep.theory_bound_v = bound_unbounded(p, normA, D, sched.N)
    return rep
