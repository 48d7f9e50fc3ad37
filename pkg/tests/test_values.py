import math

import numpy as np
import pytest

from shared_autonomy.costs import CostParams, cost_at_distance
from shared_autonomy.values import (
    ValueGrid,
    ValueIterationError,
    analytic_target_value,
    analytic_values_at_distance,
    eval_value,
    eval_values,
    finite_horizon_soft_values,
    goal_qvalue,
    goal_soft_value,
    goal_value,
    grid_centers,
    hard_value_iteration,
    interp_table,
    make_analytic_value_fn,
    make_grid_value_fn,
    min_target,
    soft_value_iteration,
    softmin,
    softmin_axis,
)
from shared_autonomy.world import (
    Action,
    Goal,
    RobotState,
    Target,
    UserInput,
    Workspace,
    direct_teleop,
    transition,
)

W = Workspace(2, [0.0, 0.0], [1.0, 1.0])
P = CostParams()


# --- softmin -----------------------------------------------------------------

def test_softmin_single_element_is_identity():
    assert softmin([3.7]) == pytest.approx(3.7)


def test_softmin_two_equal_values():
    assert softmin([2.0, 2.0]) == pytest.approx(2.0 - math.log(2.0))


def test_softmin_below_min():
    vals = [1.0, 2.0, 5.0]
    assert softmin(vals) <= min(vals)


def test_softmin_numerically_stable_for_large_spread():
    # exp(-1000) underflows; the shifted form must still return ~0
    assert softmin([0.0, 1000.0]) == pytest.approx(0.0, abs=1e-12)
    assert softmin([1e6, 1e6 + 1.0]) == pytest.approx(1e6 - math.log(1 + math.exp(-1.0)))


def test_softmin_rejects_empty():
    with pytest.raises(ValueError):
        softmin([])


def test_softmin_axis_matches_scalar():
    rng = np.random.Generator(np.random.PCG64(0))
    arr = rng.random((4, 6)) * 10
    out = softmin_axis(arr, axis=0)
    for j in range(6):
        assert out[j] == pytest.approx(softmin(arr[:, j]))


# --- interpolation -----------------------------------------------------------

def test_interp_weights_sum_to_one_and_indices_in_range(rng):
    pts = rng.random((50, 2)) * 1.4 - 0.2  # includes out-of-box points
    idx, wts = interp_table(W, 16, pts)
    np.testing.assert_allclose(wts.sum(axis=1), 1.0)
    assert idx.min() >= 0 and idx.max() < 16 * 16
    assert np.all(wts >= -1e-15)


def test_interpolation_exact_for_linear_field(rng):
    res = (12, 9)
    centers = grid_centers(W, res)
    vals = (2.0 * centers[:, 0] - 3.0 * centers[:, 1] + 0.5).reshape(res)
    grid = ValueGrid(W, res, "hard", "t", vals)
    # interior points, strictly inside the lattice hull
    pts = 0.2 + rng.random((40, 2)) * 0.6
    expected = 2.0 * pts[:, 0] - 3.0 * pts[:, 1] + 0.5
    np.testing.assert_allclose(eval_values(grid, pts), expected, atol=1e-12)


def test_eval_clamps_outside_workspace():
    res = (4, 4)
    vals = np.arange(16, dtype=float).reshape(res)
    grid = ValueGrid(W, res, "hard", "t", vals)
    inside = eval_value(grid, RobotState([1.0, 1.0]))
    outside = float(eval_values(grid, np.array([[5.0, 5.0]]))[0])
    assert outside == pytest.approx(inside)


def test_grid_centers_layout():
    c = grid_centers(W, (4, 4))
    assert c.shape == (16, 2)
    assert c[0] == pytest.approx([0.125, 0.125])
    assert c[-1] == pytest.approx([0.875, 0.875])


def test_value_grid_validates_shape():
    with pytest.raises(ValueError):
        ValueGrid(W, (4, 4), "hard", "t", np.zeros((3, 4)))
    with pytest.raises(ValueError):
        ValueGrid(W, (4, 4), "squishy", "t", np.zeros((4, 4)))


# --- value iteration on a hand-checkable chain --------------------------------

def chain_setup():
    """1x5 chain where one step at max speed moves exactly one cell."""
    w = Workspace(2, [0.0, 0.0], [0.25, 0.05], dt=0.1, v_max=0.5, capture_radius=0.02)
    params = CostParams(alpha=1.0, delta=0.04)
    target = Target("t0", [0.225, 0.025])  # center of the last cell
    return w, params, target


def test_hard_vi_chain_counts_steps():
    w, params, target = chain_setup()
    grid = hard_value_iteration(target, params, w, resolution=(5, 1))
    np.testing.assert_allclose(grid.values[:, 0], [4.0, 3.0, 2.0, 1.0, 0.0], atol=1e-9)


def test_soft_vi_dominates_hard_vi_on_chain():
    w, params, target = chain_setup()
    hard = hard_value_iteration(target, params, w, resolution=(5, 1))
    soft = soft_value_iteration(target, params, w, resolution=(5, 1))
    assert np.all(soft.values >= hard.values - 1e-9)
    assert soft.values[0, 0] > hard.values[0, 0]  # strictly above away from the target


def test_soft_vi_dominates_hard_vi_on_default_scene(default_cfg):
    target = default_cfg.scene.goals[0].targets[0]
    w = default_cfg.scene.workspace
    hard = hard_value_iteration(target, default_cfg.cost, w, resolution=32)
    soft = soft_value_iteration(target, default_cfg.cost, w, resolution=32)
    assert np.all(soft.values >= hard.values - 1e-9)


def test_value_iteration_error_carries_diagnostics():
    w, params, target = chain_setup()
    with pytest.raises(ValueIterationError) as exc_info:
        hard_value_iteration(target, params, w, resolution=(5, 1), max_sweeps=1)
    err = exc_info.value
    assert err.sweeps == 1
    assert err.residual > err.tol


# --- finite-horizon soft values (path-sum semantics) ---------------------------

def brute_force_path_sum(costs, next_idx, horizon, start):
    """Sum of exp(-path cost) over all input sequences, by enumeration."""
    import itertools

    K, S = costs.shape
    total = 0.0
    for seq in itertools.product(range(K), repeat=horizon):
        s, c = start, 0.0
        for k in seq:
            c += costs[k, s]
            s = next_idx[k, s]
        total += math.exp(-c)
    return total


def test_finite_horizon_soft_values_match_enumeration(rng):
    K, S, horizon = 3, 4, 5
    costs = rng.random((K, S)) * 2.0
    next_idx = rng.integers(0, S, size=(K, S))
    v = finite_horizon_soft_values(costs, next_idx, horizon)
    for s in range(S):
        expected = brute_force_path_sum(costs, next_idx, horizon, s)
        assert math.exp(-v[s]) == pytest.approx(expected, rel=1e-12)


# --- analytic values -----------------------------------------------------------

def straight_walk_cost(d, params, w):
    """Independent oracle: march toward the target at max speed, charging the
    distance cost at every step, until inside the capture radius."""
    total = 0.0
    while d > w.capture_radius:
        total += cost_at_distance(d, params)
        d -= w.step_length
    return total


def test_analytic_values_match_straight_walk(rng):
    ds = rng.random(200) * 1.5
    got = analytic_values_at_distance(ds, P, W)
    for d, v in zip(ds, got):
        assert v == pytest.approx(straight_walk_cost(float(d), P, W), abs=1e-9)


def test_analytic_value_zero_inside_capture_radius():
    assert analytic_values_at_distance(0.0, P, W) == 0.0
    assert analytic_values_at_distance(W.capture_radius, P, W) == 0.0


def test_analytic_values_monotone_in_distance(rng):
    ds = np.sort(rng.random(300) * 1.2)
    vs = analytic_values_at_distance(ds, P, W)
    assert np.all(np.diff(vs) >= -1e-12)


def test_analytic_scalar_and_vector_agree():
    v_scalar = analytic_values_at_distance(0.42, P, W)
    v_vector = analytic_values_at_distance(np.array([0.42]), P, W)
    assert isinstance(v_scalar, float)
    assert v_scalar == pytest.approx(float(v_vector[0]))


# --- per-goal composition -------------------------------------------------------

def two_target_goal():
    return Goal("g", "pair", (Target("t0", [0.2, 0.8]), Target("t1", [0.8, 0.8])))


def test_goal_value_is_min_over_targets():
    goal = two_target_goal()
    fn = make_analytic_value_fn(P, W)
    x = RobotState([0.25, 0.2])  # closer to t0
    t, v = min_target(x, goal, fn)
    assert t.id == "t0"
    assert v == pytest.approx(min(fn(x, tt) for tt in goal.targets))
    assert goal_value(x, goal, fn) == pytest.approx(v)


def test_min_target_tie_breaks_to_first():
    goal = two_target_goal()
    fn = make_analytic_value_fn(P, W)
    x = RobotState([0.5, 0.8])  # equidistant
    t, _ = min_target(x, goal, fn)
    assert t.id == "t0"


def test_goal_qvalue_single_target_decomposition():
    goal = Goal("g", "one", (Target("t0", [0.8, 0.8]),))
    fn = make_analytic_value_fn(P, W)
    x = RobotState([0.2, 0.2])
    u = UserInput([1.0, 0.0])
    a = Action([0.0, 0.5])
    q = goal_qvalue(x, a, goal, fn, P, W, u=u)
    x_next = transition(x, a, W)
    dev = a.vel - direct_teleop(u, W).vel
    expected = (
        cost_at_distance(np.linalg.norm(x.pos - goal.targets[0].pos), P)
        + float(np.dot(dev, dev))
        + fn(x_next, goal.targets[0])
    )
    assert q == pytest.approx(expected)


def test_goal_soft_value_is_softmin_over_targets(default_runtime):
    scene = default_runtime.scene
    goal = next(g for g in scene.goals if len(g.targets) > 1)
    grids = default_runtime.soft_grids[goal.id]
    x = RobotState([0.5, 0.3])
    vals = [eval_value(grids[t.id], x) for t in goal.targets]
    assert goal_soft_value(x, goal, grids) == pytest.approx(softmin(vals))


def test_grid_value_fn_matches_eval(default_runtime):
    scene = default_runtime.scene
    goal = scene.goals[0]
    grids = default_runtime.soft_grids[goal.id]
    fn = make_grid_value_fn(grids)
    x = RobotState([0.4, 0.6])
    t = goal.targets[0]
    assert fn(x, t) == pytest.approx(eval_value(grids[t.id], x))


def test_analytic_target_value_matches_distance_form():
    t = Target("t", [0.7, 0.7])
    x = RobotState([0.1, 0.1])
    d = float(np.linalg.norm(x.pos - t.pos))
    assert analytic_target_value(x, t, P, W) == pytest.approx(
        analytic_values_at_distance(d, P, W)
    )
