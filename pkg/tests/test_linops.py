import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from rpd.linops import (BlockLinearOperator, DimensionMismatch, SpectralNormNotConverged,
                        load_operator, spectral_norm)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def top_singular_2x2(M):
    """Largest root of the characteristic polynomial of M^T M."""
    G = M.T @ M
    tr, det = np.trace(G), G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    return np.sqrt((tr + np.sqrt(max(tr * tr - 4 * det, 0.0))) / 2)


def test_block_bookkeeping():
    A = BlockLinearOperator(np.arange(12.0).reshape(4, 3), [1, 3])
    assert (A.m, A.n, A.p) == (4, 3, 2)
    assert A.block_slice(1) == slice(1, 4)
    assert [b.shape for b in A.split(np.arange(4.0))] == [(1,), (3,)]


def test_block_dims_must_sum():
    with pytest.raises(DimensionMismatch) as err:
        BlockLinearOperator(np.ones((4, 2)), [1, 2])
    assert err.value.expected == 4 and err.value.actual == 3


def test_wrong_vector_length():
    A = BlockLinearOperator(np.ones((2, 3)))
    with pytest.raises(DimensionMismatch):
        A.apply(np.ones(2))
    with pytest.raises(DimensionMismatch):
        A.adjoint_apply(np.ones(3))


def test_matrix_is_read_only():
    A = BlockLinearOperator(np.ones((2, 2)))
    with pytest.raises(ValueError):
        A.matrix[0, 0] = 5


@settings(max_examples=50)
@given(arrays(float, (6, 4), elements=finite), arrays(float, 4, elements=finite))
def test_block_products_match_full_product_bitwise(M, x):
    A = BlockLinearOperator(M, [1, 2, 3])
    full = A.apply(x)
    for i in range(1, 4):
        assert np.array_equal(full[A.block_slice(i - 1)], A.apply_block(i, x))


@settings(max_examples=50)
@given(arrays(float, (3, 4), elements=finite), arrays(float, 4, elements=finite),
       arrays(float, 3, elements=finite))
def test_adjoint_identity(M, x, y):
    A = BlockLinearOperator(M, [2, 1])
    assert A.apply(x) @ y == pytest.approx(x @ A.adjoint_apply(y), rel=1e-9, abs=1e-9)


def test_json_round_trip(tmp_path):
    A = BlockLinearOperator(np.random.default_rng(0).normal(size=(5, 3)), [2, 3])
    path = tmp_path / "op.json"
    import json
    path.write_text(json.dumps(A.to_json_dict()))
    B = load_operator(path)
    assert np.array_equal(A.matrix, B.matrix) and A.block_dims == B.block_dims


@pytest.mark.parametrize("M", [
    [[1.0, 0.0], [0.0, 1.0]],
    [[1.0, 2.0], [3.0, 4.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
    [[2.0, -1.0], [0.5, 0.25]],
])
def test_spectral_norm_2x2_against_characteristic_polynomial(M):
    M = np.array(M)
    assert spectral_norm(M) == pytest.approx(top_singular_2x2(M), rel=1e-9)


def test_spectral_norm_random_against_svd():
    M = np.random.default_rng(1).normal(size=(7, 5))
    # independent path: eigenvalues of the Gram matrix via LAPACK
    ref = np.sqrt(np.linalg.eigvalsh(M.T @ M).max())
    assert spectral_norm(M) == pytest.approx(ref, rel=1e-8)


def test_zero_operator_has_zero_norm():
    assert spectral_norm(np.zeros((3, 2))) == 0.0


def test_restart_when_ones_is_orthogonal():
    # top right singular vector (1,-1)/sqrt2 is orthogonal to the ones vector
    M = np.array([[1.0, -1.0]])
    assert spectral_norm(M) == pytest.approx(np.sqrt(2), rel=1e-12)


def test_nonconvergence_reports_estimate():
    M = np.diag([1.0, 0.999999])
    M[0, 1] = 1e-3
    with pytest.raises(SpectralNormNotConverged) as err:
        spectral_norm(M, rel_tol=1e-15, max_iters=2)
    assert err.value.iters == 2 and err.value.estimate > 0


@settings(max_examples=50)
@given(arrays(float, (4, 3), elements=finite), arrays(float, 3, elements=finite))
def test_norm_dominates_every_ratio(M, x):
    if not np.any(x) or not np.any(M):
        return
    assert np.linalg.norm(M @ x) <= spectral_norm(M, rel_tol=1e-12, max_iters=100000) * np.linalg.norm(x) * (1 + 1e-6) + 1e-9
