"""Block-row linear operators A = (A_1; ...; A_p).

The operator is stored as one dense row-major matrix together with the row
offsets of each block, so that ``A @ x`` and the per-block products
``A_i @ x`` read the same memory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DimensionMismatch(ValueError):
    """Raised when a vector does not have the size an operator expects."""

    def __init__(self, what: str, expected: int, actual: int):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected length {expected}, got {actual}")


class SpectralNormNotConverged(RuntimeError):
    """Power iteration hit ``max_iters`` before reaching ``rel_tol``."""

    def __init__(self, estimate: float, iters: int):
        self.estimate = estimate
        self.iters = iters
        super().__init__(
            f"power iteration did not converge in {iters} iterations "
            f"(last estimate {estimate!r})"
        )


@dataclass(frozen=True)
class BlockLinearOperator:
    """Dense operator whose rows are partitioned into ``p`` contiguous blocks.

    Parameters
    ----------
    matrix : array_like, shape (m, n)
        The stacked blocks.
    block_dims : sequence of int
        Row counts ``m_1, ..., m_p``; must sum to ``m``.
    """

    matrix: np.ndarray
    block_dims: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False, repr=False)

    def __init__(self, matrix, block_dims: Sequence[int] | None = None):
        mat = np.array(matrix, dtype=float, order="C")
        if mat.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {mat.shape}")
        if block_dims is None:
            block_dims = (mat.shape[0],)
        dims = tuple(int(d) for d in block_dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"block dimensions must be positive, got {dims}")
        if sum(dims) != mat.shape[0]:
            raise DimensionMismatch("sum of block_dims", mat.shape[0], sum(dims))
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "offsets", tuple(np.concatenate([[0], np.cumsum(dims)]).tolist()))

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray]) -> "BlockLinearOperator":
        blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
        return cls(np.vstack(blocks), [b.shape[0] for b in blocks])

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return len(self.block_dims)

    def block_slice(self, i: int) -> slice:
        """Row slice of block ``i`` (0-based)."""
        if not 0 <= i < self.p:
            raise IndexError(f"block index {i} out of range for p={self.p}")
        return slice(self.offsets[i], self.offsets[i + 1])

    def block(self, i: int) -> np.ndarray:
        return self.matrix[self.block_slice(i)]

    def split(self, y: np.ndarray) -> list[np.ndarray]:
        """Split a dual vector into its per-block views."""
        return [y[self.offsets[i]:self.offsets[i + 1]] for i in range(self.p)]

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch("primal vector", self.n, x.size)
        if self.p == 1:
            return self.matrix @ x
        # Per-block products so that slices agree bit-for-bit with apply_block.
        return np.concatenate([self._block_rows(i) @ x for i in range(self.p)])

    def apply_block(self, i: int, x) -> np.ndarray:
        """``A_i x`` for a 1-based block index ``i``."""
        if not 1 <= i <= self.p:
            raise IndexError(f"block index {i} out of range 1..{self.p}")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch("primal vector", self.n, x.size)
        return self._block_rows(i - 1) @ x

    def _block_rows(self, i: int) -> np.ndarray:
        return self.matrix[self.offsets[i]:self.offsets[i + 1]]

    def adjoint_apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise DimensionMismatch("dual vector", self.m, y.size)
        return self.matrix.T @ y

    def transpose(self) -> "BlockLinearOperator":
        return BlockLinearOperator(self.matrix.T, (self.n,))

    def scaled(self, c: float) -> "BlockLinearOperator":
        return BlockLinearOperator(c * self.matrix, self.block_dims)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "block_dims": list(self.block_dims),
            "matrix": self.matrix.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "BlockLinearOperator":
        n = int(d["n"])
        dims = [int(b) for b in d["block_dims"]]
        flat = np.asarray(d["matrix"], dtype=float).ravel()
        m = sum(dims)
        if flat.size != m * n:
            raise DimensionMismatch("matrix entries (m*n)", m * n, flat.size)
        return cls(flat.reshape(m, n), dims)


def load_operator(path) -> BlockLinearOperator:
    return BlockLinearOperator.from_json_dict(json.loads(Path(path).read_text()))


def _power_iteration(mat: np.ndarray, v: np.ndarray, rel_tol: float, max_iters: int):
    v = v / np.linalg.norm(v)
    est = np.linalg.norm(mat @ v)
    for k in range(1, max_iters + 1):
        w = mat.T @ (mat @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, k, True
        v = w / nw
        new = np.linalg.norm(mat @ v)
        if abs(new - est) <= rel_tol * new:
            return new, k, True
        est = new
    return est, max_iters, False


def spectral_norm(A, rel_tol: float = 1e-10, max_iters: int = 10000) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    The iteration starts from the normalized all-ones vector. If that start is
    orthogonal to the top singular space of a nonzero ``A`` (the estimate
    collapses to zero), it restarts once from ``(1, 2, ..., n)``.

    Raises
    ------
    SpectralNormNotConverged
        If the relative change of the estimate stays above ``rel_tol`` for
        ``max_iters`` iterations. The exception carries the last estimate.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    mat = A.matrix if isinstance(A, BlockLinearOperator) else np.atleast_2d(np.asarray(A, dtype=float))
    if not np.any(mat):
        return 0.0
    n = mat.shape[1]
    est, iters, ok = _power_iteration(mat, np.ones(n), rel_tol, max_iters)
    if est == 0.0:
        est, iters, ok = _power_iteration(mat, np.arange(1.0, n + 1.0), rel_tol, max_iters)
    if not ok:
        raise SpectralNormNotConverged(float(est), iters)
    return float(est)
