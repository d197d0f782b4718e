"""Independent reference implementations shared by several test modules."""

import numpy as np


def michelot(v):
    """Simplex projection by iterated active-set averaging (no sorting)."""
    active = np.ones(v.size, bool)
    while True:
        theta = (v[active].sum() - 1.0) / active.sum()
        w = v - theta
        if np.all(w[active] >= 0):
            return np.maximum(w, 0.0)
        active &= w > 0


def reference_pdhg(M, tau, eta, q, gamma):
    """Deterministic primal-dual iteration on min_x max_y <Mx, y> over simplices."""
    m, n = M.shape
    x = np.full(n, 1.0 / n)
    y = np.eye(m)[np.argmax(M @ x)]
    xbar = x.copy()
    xs, ys = [], []
    for k in range(len(tau)):
        y = michelot(y + (M @ xbar) / tau[k])
        x_new = michelot(x - (M.T @ y) / eta[k])
        xbar = q[k] * (x_new - x) + x_new
        x = x_new
        xs.append(x)
        ys.append(y)
    w = np.asarray(gamma)
    return xs, ys, (w @ np.array(xs) / w.sum(), w @ np.array(ys) / w.sum())
