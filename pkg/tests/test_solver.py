import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpd.linops import BlockLinearOperator, spectral_norm
from rpd.problems import (ENTROPY, EUCLIDEAN, FeasibleSet, SaddleInstance, SeparableFunction,
                          build_counterexample_lcp, build_matrix_game, build_regularized_loss_toy)
from rpd.schedules import general_bounded_schedule, smooth_schedule, unbounded_schedule
from oracles import reference_pdhg
from rpd.solver import (RegimeMismatch, TraceOptions, init_state, rpd_step, run, run_bregman,
                        start_point)


ZOO = {
    "identity2": np.eye(2),
    "rotation": np.array([[0.0, 1.0], [-1.0, 0.0]]),
    "rand4x3": np.random.default_rng(0).uniform(-1, 1, (4, 3)),
    "rand6x6": np.random.default_rng(1).normal(size=(6, 6)),
}


def game_schedule(inst, N):
    return general_bounded_schedule(inst.p, spectral_norm(inst.A), inst.omega_x, inst.omega_y, N)


@pytest.mark.parametrize("name", sorted(ZOO))
def test_single_block_matches_deterministic_reference(name):
    inst = build_matrix_game(ZOO[name])
    s = game_schedule(inst, 200)
    z, tr = run(inst, s, seed=3, options=TraceOptions(keep_iterates=True))
    xs, ys, (xh, yh) = reference_pdhg(ZOO[name], s.tau, s.eta, s.q, s.gamma)
    dev = max(max(np.abs(a[0] - b).max(), np.abs(a[1] - c).max())
              for a, b, c in zip(tr.iterates, xs, ys))
    assert dev <= 1e-12
    assert np.abs(z[0] - xh).max() <= 1e-12 and np.abs(z[1] - yh).max() <= 1e-12


def test_single_step_matches_reference():
    inst = build_matrix_game(np.eye(2))
    s = game_schedule(inst, 2)
    z, _ = run(inst, s)
    xs, ys, _ = reference_pdhg(np.eye(2), s.tau, s.eta, s.q, s.gamma)
    assert np.abs(z[0] - xs[0]).max() <= 1e-14 and np.abs(z[1] - ys[0]).max() <= 1e-14


def test_zero_operator_is_a_fixed_point():
    A = BlockLinearOperator(np.zeros((4, 3)), [2, 2])
    inst = SaddleInstance(A, SeparableFunction.zero(), FeasibleSet.simplex(3),
                          [SeparableFunction.zero()] * 2, [FeasibleSet.simplex(2)] * 2)
    s = general_bounded_schedule(2, 1.0, inst.omega_x, inst.omega_y, 50)
    z, tr = run(inst, s, 4)
    x1, y1 = start_point(inst)
    assert np.allclose(z[0], x1, rtol=1e-15, atol=0) and np.allclose(z[1], y1, rtol=1e-15, atol=0)
    assert np.array_equal(tr.x_last, x1) and np.array_equal(tr.y_last, y1)


def random_block_game(seed):
    rng = np.random.default_rng(seed)
    return build_matrix_game(rng.uniform(-1, 1, (6, 3)), p=3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**32))
def test_only_the_drawn_block_moves(inst_seed, seed):
    inst = random_block_game(inst_seed)
    s = game_schedule(inst, 20)
    state = init_state(inst, seed)
    for _ in range(5):
        new = rpd_step(inst, s, state)
        i = new.last_block
        for k in range(inst.p):
            if k != i - 1:
                sl = inst.A.block_slice(k)
                assert np.array_equal(new.y_cur[sl], state.y_cur[sl])
        state = new


def test_block_two_step_leaves_blocks_one_and_three():
    inst = random_block_game(7)
    s = game_schedule(inst, 10)
    seed = next(sd for sd in range(100) if init_state(inst, sd).rng.draw_block(3) == 2)
    st0 = init_state(inst, seed)
    st1 = rpd_step(inst, s, st0)
    assert st1.last_block == 2
    for k in (0, 2):
        sl = inst.A.block_slice(k)
        assert np.array_equal(st1.y_cur[sl], st0.y_cur[sl])


def test_step_function_reproduces_run():
    inst = random_block_game(2)
    s = game_schedule(inst, 40)
    state = init_state(inst, 11)
    for _ in range(39):
        state = rpd_step(inst, s, state)
    z, tr = run(inst, s, 11)
    assert np.array_equal(state.average()[0], z[0]) and np.array_equal(state.average()[1], z[1])
    assert state.weight_total == pytest.approx(s.gamma_sum, rel=1e-15)


def test_step_rejects_out_of_range():
    inst = random_block_game(2)
    s = game_schedule(inst, 3)
    state = init_state(inst, 0)
    state = rpd_step(inst, s, rpd_step(inst, s, state))
    with pytest.raises(ValueError):
        rpd_step(inst, s, state)


def test_extrapolation_invariant():
    inst = random_block_game(3)
    s = game_schedule(inst, 10)
    state = init_state(inst, 1)
    for t in range(1, 9):
        new = rpd_step(inst, s, state)
        assert np.allclose(new.x_bar, s.q[t - 1] * (new.x_cur - new.x_prev) + new.x_cur, rtol=0, atol=0)
        state = new


def test_same_seed_bit_identical():
    inst = random_block_game(4)
    s = game_schedule(inst, 300)
    (za, ta), (zb, tb) = run(inst, s, 99), run(inst, s, 99)
    assert np.array_equal(za[0], zb[0]) and np.array_equal(za[1], zb[1])
    assert np.array_equal(ta.blocks, tb.blocks)


def test_two_point_horizon_returns_the_iterate():
    inst = random_block_game(5)
    s = game_schedule(inst, 2)
    z, tr = run(inst, s, 0, TraceOptions(keep_iterates=True))
    assert np.array_equal(z[0], tr.iterates[0][0]) and np.array_equal(z[1], tr.iterates[0][1])


def test_average_matches_post_hoc_sum():
    inst = build_regularized_loss_toy(np.random.default_rng(3).uniform(-1, 1, (4, 3)),
                                      block_dims=[2, 2], b=np.full(4, 0.3), radius=2)
    s = smooth_schedule(2, spectral_norm(inst.A), 500)
    z, tr = run(inst, s, 8, TraceOptions(keep_iterates=True))
    W = math.fsum(s.gamma)
    for part in (0, 1):
        stacked = np.array([it[part] for it in tr.iterates])
        ref = np.array([math.fsum(s.gamma * stacked[:, j]) for j in range(stacked.shape[1])]) / W
        assert np.allclose(z[part], ref, rtol=1e-13, atol=1e-15)


def test_euclidean_bregman_run_is_bit_identical():
    inst = random_block_game(6)
    s = game_schedule(inst, 200)
    za, ta = run(inst, s, 5)
    zb, tb = run_bregman(inst.with_dgfs(EUCLIDEAN, EUCLIDEAN), s, 5)
    assert np.array_equal(za[0], zb[0]) and np.array_equal(za[1], zb[1])
    assert np.array_equal(ta.y_last, tb.y_last)


def test_entropy_iterates_stay_interior():
    inst = random_block_game(8).with_dgfs(ENTROPY, ENTROPY)
    s = game_schedule(inst, 200)
    _, tr = run_bregman(inst, s, 1, TraceOptions(keep_iterates=True))
    assert all(np.all(y > 0) and np.all(x > 0) for x, y in tr.iterates)


def test_run_ignores_instance_distances():
    inst = random_block_game(8)
    s = game_schedule(inst, 50)
    za, _ = run(inst, s, 1)
    zb, _ = run(inst.with_dgfs(ENTROPY, ENTROPY), s, 1)
    assert np.array_equal(za[0], zb[0])


def test_regime_mismatch():
    game = random_block_game(1)
    with pytest.raises(RegimeMismatch, match="strongly convex"):
        run(game, smooth_schedule(3, 1.0, 10))
    lcp = build_counterexample_lcp(3)
    sched = general_bounded_schedule(3, 1.0, 1.0, 1.0, 10)
    with pytest.raises(RegimeMismatch, match="unbounded"):
        run(lcp, sched)


def test_singleton_dual_blocks_have_no_general_schedule():
    # 2x2 game split into two one-row blocks: the dual set is a single point
    inst = build_matrix_game(np.eye(2), p=2)
    assert inst.omega_y == 0.0
    with pytest.raises(ValueError, match="positive"):
        game_schedule(inst, 10)


def test_feasibility_checked_every_step():
    inst = random_block_game(9)
    run(inst, game_schedule(inst, 100), 2, TraceOptions(check_feasible=True))


def test_trace_records_distances_at_stride():
    inst = build_counterexample_lcp(2)
    s = unbounded_schedule(2, spectral_norm(inst.A), 101)
    _, tr = run(inst, s, 0, TraceOptions(stride=25, snapshots=True))
    assert [r[0] for r in tr.rows] == [25, 50, 75, 100, 101]
    assert len(tr.snapshots) == 5
    csv = tr.to_csv().splitlines()
    assert csv[0] == "t,i_t,dist_to_opt,dist_x,dist_y,gap_checkpoint" and len(csv) == 6


def test_gap_checkpoints_on_bounded_instance():
    inst = random_block_game(9)
    _, tr = run(inst, game_schedule(inst, 60), 2, TraceOptions(stride=20, gap_at_stride=True))
    gaps = [r[5] for r in tr.rows]
    assert all(g is not None and g >= -1e-12 for g in gaps)
