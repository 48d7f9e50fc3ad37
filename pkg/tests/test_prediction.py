import inspect
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shared_autonomy.prediction import (
    AllZeroPosteriorWarning,
    Belief,
    GoalPredictor,
    PredictorConfig,
    belief_entropy,
    map_goal,
    snap_index,
    snap_input,
    uniform_belief,
)
from shared_autonomy.world import RobotState, UserInput, Workspace, discretize_inputs

W = Workspace(2, [0.0, 0.0], [1.0, 1.0])
AXIS_INPUTS = discretize_inputs(W)
DIAG_INPUTS = discretize_inputs(W, diag=True)


# --- belief basics -------------------------------------------------------------

def test_uniform_belief():
    b = uniform_belief(["g0", "g1", "g2"])
    assert b["g0"] == pytest.approx(1 / 3)
    assert belief_entropy(b) == pytest.approx(math.log(3))


def test_belief_rejects_non_distribution():
    with pytest.raises(ValueError):
        Belief({"g0": 0.7, "g1": 0.7})
    with pytest.raises(ValueError):
        Belief({"g0": 1.2, "g1": -0.2})
    with pytest.raises(ValueError):
        Belief({})


def test_entropy_zero_for_point_mass():
    assert belief_entropy(Belief({"g0": 1.0, "g1": 0.0})) == 0.0


def test_map_goal_tie_keeps_first():
    assert map_goal(Belief({"g0": 0.5, "g1": 0.5})) == "g0"


def test_predictor_config_validation():
    with pytest.raises(ValueError):
        PredictorConfig(mode="psychic")
    with pytest.raises(ValueError):
        PredictorConfig(likelihood_floor=0.5)


# --- input snapping -------------------------------------------------------------

def test_snap_dead_zone_to_zero():
    u = snap_input(UserInput([0.05, 0.02]), AXIS_INPUTS)
    assert u.norm == 0.0


def test_snap_to_nearest_axis():
    u = snap_input(UserInput([0.9, 0.1]), AXIS_INPUTS)
    np.testing.assert_allclose(u.vec, [1.0, 0.0])


def test_snap_negative_axis():
    u = snap_input(UserInput([0.0, -0.8]), AXIS_INPUTS)
    np.testing.assert_allclose(u.vec, [0.0, -1.0])


def test_snap_prefers_diagonal_when_available():
    raw = UserInput([0.7, 0.7])
    u = snap_input(raw, DIAG_INPUTS)
    np.testing.assert_allclose(u.vec, [1 / math.sqrt(2)] * 2)
    # without diagonals the same input snaps to an axis (first wins on ties)
    u2 = snap_input(raw, AXIS_INPUTS)
    np.testing.assert_allclose(u2.vec, [1.0, 0.0])


def test_snap_index_boundary_of_dead_zone():
    assert snap_index(UserInput([0.099, 0.0]), AXIS_INPUTS) == 0
    assert snap_index(UserInput([0.11, 0.0]), AXIS_INPUTS) == 1


# --- likelihoods ------------------------------------------------------------------

def test_likelihood_columns_normalized_exact_soft(default_runtime, rng):
    predictor = default_runtime.predictor
    for _ in range(20):
        x = RobotState(rng.random(2))
        m = predictor.likelihood_matrix(x)
        np.testing.assert_allclose(m.sum(axis=0), 1.0, atol=1e-9)
        assert np.all(m >= 0.0)


def test_likelihood_columns_normalized_approx_hard(default_cfg, rng):
    predictor = GoalPredictor(
        default_cfg.scene, default_cfg.cost, PredictorConfig(mode="approx_hard")
    )
    for _ in range(20):
        x = RobotState(rng.random(2))
        m = predictor.likelihood_matrix(x)
        np.testing.assert_allclose(m.sum(axis=0), 1.0, atol=1e-9)


def test_progress_input_most_likely_for_its_goal(default_runtime):
    """From below the left goal, pushing up-left is more likely under the left
    goal than pushing up-right, and vice versa."""
    predictor = default_runtime.predictor
    scene = default_runtime.scene
    x = RobotState([0.5, 0.5])
    left = UserInput([-1.0, 0.0])
    right = UserInput([1.0, 0.0])
    g_left = scene.goals[0].id  # target near x=0.2
    g_right = scene.goals[2].id  # target near x=0.8
    assert predictor.input_likelihood(left, x, g_left) > predictor.input_likelihood(
        right, x, g_left
    )
    assert predictor.input_likelihood(right, x, g_right) > predictor.input_likelihood(
        left, x, g_right
    )


def test_belief_update_concentrates_on_pursued_goal(default_runtime):
    predictor = default_runtime.predictor
    scene = default_runtime.scene
    from shared_autonomy.world import direct_teleop, transition

    b = predictor.initial_belief()
    x = RobotState(scene.start_state.pos)
    w = scene.workspace
    target = scene.goals[0].targets[0].pos
    for _ in range(30):
        direction = target - x.pos
        u = UserInput(direction / np.linalg.norm(direction))
        b = predictor.belief_update(b, u, x)
        x = transition(x, direct_teleop(u, w), w)
    assert map_goal(b) == scene.goals[0].id
    assert b[scene.goals[0].id] > 0.5


def test_no_action_in_inference_signatures(default_runtime):
    """Belief updates must depend on the user's input and state only. An
    action or policy parameter here would let assistance confirm itself."""
    for fn in (
        default_runtime.predictor.belief_update,
        default_runtime.predictor.likelihood_matrix,
        default_runtime.predictor.input_likelihood,
    ):
        names = set(inspect.signature(fn).parameters)
        assert not names & {"a", "action", "policy", "method"}, fn


def test_all_zero_posterior_warns_and_keeps_belief(default_cfg):
    predictor = GoalPredictor(
        default_cfg.scene,
        default_cfg.cost,
        PredictorConfig(mode="approx_hard", likelihood_floor=0.0),
    )
    b = predictor.initial_belief()
    zeros = np.zeros(len(default_cfg.scene.goals))
    with pytest.warns(AllZeroPosteriorWarning):
        out = predictor.apply_likelihoods(b, zeros)
    assert out.probs == b.probs


def test_likelihood_floor_prevents_zero_posterior(default_cfg):
    predictor = GoalPredictor(
        default_cfg.scene, default_cfg.cost, PredictorConfig(mode="approx_hard")
    )
    b = predictor.initial_belief()
    likelihoods = np.array([0.0, 0.5, 0.5])
    out = predictor.apply_likelihoods(b, likelihoods)
    assert out["g0"] > 0.0


# --- update-rule properties -------------------------------------------------------

prob_rows = st.lists(
    st.floats(min_value=0.1, max_value=1.0, allow_nan=False), min_size=3, max_size=3
)


@settings(max_examples=50, deadline=None)
@given(l1=prob_rows, l2=prob_rows)
def test_updates_factor_over_likelihood_products(default_runtime, l1, l2):
    predictor = default_runtime.predictor
    b = predictor.initial_belief()
    l1, l2 = np.asarray(l1), np.asarray(l2)
    sequential = predictor.apply_likelihoods(predictor.apply_likelihoods(b, l1), l2)
    joint = predictor.apply_likelihoods(b, l1 * l2)
    for gid in b.probs:
        assert sequential[gid] == pytest.approx(joint[gid], abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(row=prob_rows, scale=st.floats(min_value=0.5, max_value=10.0))
def test_updates_invariant_to_likelihood_scale(default_runtime, row, scale):
    predictor = default_runtime.predictor
    b = Belief({"g0": 0.5, "g1": 0.3, "g2": 0.2})
    row = np.asarray(row)
    a = predictor.apply_likelihoods(b, row)
    c = predictor.apply_likelihoods(b, row * scale)
    for gid in b.probs:
        assert a[gid] == pytest.approx(c[gid], abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(row=prob_rows)
def test_uniform_likelihood_leaves_belief_unchanged(default_runtime, row):
    predictor = default_runtime.predictor
    b = Belief({"g0": 0.6, "g1": 0.3, "g2": 0.1})
    const = np.full(3, float(np.asarray(row)[0]))
    out = predictor.apply_likelihoods(b, const)
    for gid in b.probs:
        assert out[gid] == pytest.approx(b[gid], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    coords=st.lists(
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=2, max_size=2
    ),
    k=st.integers(min_value=0, max_value=4),
)
def test_belief_stays_on_simplex(default_runtime, coords, k):
    predictor = default_runtime.predictor
    b = predictor.initial_belief()
    x = RobotState(coords)
    u = predictor.inputs[k]
    for _ in range(3):
        b = predictor.belief_update(b, u, x)  # Belief validates the simplex
    assert sum(b.probs.values()) == pytest.approx(1.0, abs=1e-9)
