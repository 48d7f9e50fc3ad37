"""Assistance policies.

- policy: belief-weighted action-value minimization (QMDP-style), picking the
  best action from a small candidate set that includes direct teleoperation,
  per-goal greedy moves, and the analytic stationary point of the objective.
- blend: predict the most probable goal, then arbitrate linearly between the
  user command and a greedy autonomous command by a distance confidence.
- direct: user command passed straight through.

All policies are pure functions of (belief, state, input) given a scene, and
never emit actions faster than v_max.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostParams
from .prediction import Belief, map_goal
from .values import (
    goal_qvalue,
    make_analytic_value_fn,
    min_target,
)
from .world import (
    Action,
    Goal,
    RobotState,
    Scene,
    UserInput,
    Workspace,
    clamp_speed,
    direct_teleop,
)

METHODS = ("policy", "blend", "direct")


@dataclass(frozen=True)
class AssistConfig:
    method: str = "policy"
    blend_distance_D: float = 0.3
    blend_cap: float = 0.6
    gradient_step: float = 1.0
    candidate_set_size: int = 8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.blend_distance_D <= 0:
            raise ValueError("blend_distance_D must be positive")
        if not (0.0 <= self.blend_cap <= 1.0):
            raise ValueError("blend_cap must lie in [0, 1]")
        if self.gradient_step <= 0:
            raise ValueError("gradient_step must be positive")


def qmdp_value(
    b: Belief,
    x: RobotState,
    a: Action,
    u: UserInput,
    scene: Scene,
    params: CostParams,
) -> float:
    """Belief-weighted action value: sum of per-goal min-composed Q values.
    Linear in the belief by construction."""
    value_fn = make_analytic_value_fn(params, scene.workspace)
    total = 0.0
    for goal in scene.goals:
        total += b[goal.id] * goal_qvalue(
            x, a, goal, value_fn, params, scene.workspace, u=u
        )
    return total


def greedy_action(x: RobotState, goal: Goal, scene: Scene, params: CostParams) -> Action:
    """Max-speed move straight toward the goal's best target; zero once inside
    the capture radius."""
    w = scene.workspace
    value_fn = make_analytic_value_fn(params, w)
    target, _ = min_target(x, goal, value_fn)
    delta = target.pos - x.pos
    dist = float(np.linalg.norm(delta))
    if dist <= w.capture_radius or dist == 0.0:
        return Action(np.zeros(w.dims))
    return Action(delta / dist * w.v_max)


def _value_slope(dist: float, params: CostParams, w: Workspace) -> float:
    """Directional derivative of the analytic cost-to-go along the radial
    direction, by central differences."""
    from .values import analytic_values_at_distance

    h = 1e-4
    lo = max(dist - h, 0.0)
    hi = dist + h
    v_lo = analytic_values_at_distance(lo, params, w)
    v_hi = analytic_values_at_distance(hi, params, w)
    return (v_hi - v_lo) / (hi - lo)


def policy_action(
    b: Belief,
    x: RobotState,
    u: UserInput,
    scene: Scene,
    params: CostParams,
    cfg: AssistConfig | None = None,
) -> Action:
    """Minimize the belief-weighted action value over a candidate set. The
    direct-teleop action is always a candidate, so assistance is never worse
    than no assistance under the model."""
    cfg = cfg or AssistConfig()
    w = scene.workspace
    value_fn = make_analytic_value_fn(params, w)
    d_u = direct_teleop(u, w)
    candidates: list[Action] = [d_u]

    ranked = sorted(scene.goals, key=lambda g: -b[g.id])[: cfg.candidate_set_size]
    for goal in ranked:
        candidates.append(greedy_action(x, goal, scene, params))

    if params.deviation_weight > 0.0:
        # Stationary point of sum_g b(g) V_g(x + a dt) + w_dev |a - D(u)|^2,
        # using the radial distance-field gradient of each goal's best target.
        grad = np.zeros(w.dims)
        for goal in scene.goals:
            target, _ = min_target(x, goal, value_fn)
            delta = x.pos - target.pos
            dist = float(np.linalg.norm(delta))
            if dist == 0.0:
                continue
            grad += b[goal.id] * _value_slope(dist, params, w) * (delta / dist)
        step = cfg.gradient_step * w.dt / (2.0 * params.deviation_weight)
        candidates.append(Action(d_u.vel - step * grad))

    best_a, best_q = None, np.inf
    for cand in candidates:
        a = Action(clamp_speed(cand.vel, w.v_max))
        q = qmdp_value(b, x, a, u, scene, params)
        if q < best_q - 1e-12:
            best_a, best_q = a, q
    return best_a


def blend_confidence(b: Belief, x: RobotState, scene: Scene, cfg: AssistConfig | None = None) -> float:
    """max(0, 1 - d/D) with d the distance to the nearest target of the most
    probable goal."""
    cfg = cfg or AssistConfig()
    goal = scene.goal_by_id(map_goal(b))
    d = min(float(np.linalg.norm(x.pos - t.pos)) for t in goal.targets)
    return max(0.0, 1.0 - d / cfg.blend_distance_D)


def blend_action(
    b: Belief,
    x: RobotState,
    u: UserInput,
    scene: Scene,
    params: CostParams,
    cfg: AssistConfig | None = None,
) -> Action:
    cfg = cfg or AssistConfig()
    w = scene.workspace
    goal = scene.goal_by_id(map_goal(b))
    a_auto = greedy_action(x, goal, scene, params)
    gamma = cfg.blend_cap * blend_confidence(b, x, scene, cfg)
    vel = (1.0 - gamma) * direct_teleop(u, w).vel + gamma * a_auto.vel
    return Action(clamp_speed(vel, w.v_max))


def direct_action(u: UserInput, w: Workspace) -> Action:
    return direct_teleop(u, w)


def select_action(
    method: str,
    b: Belief,
    x: RobotState,
    u: UserInput,
    scene: Scene,
    params: CostParams,
    cfg: AssistConfig | None = None,
) -> Action:
    if method == "policy":
        return policy_action(b, x, u, scene, params, cfg)
    if method == "blend":
        return blend_action(b, x, u, scene, params, cfg)
    if method == "direct":
        return direct_action(u, scene.workspace)
    raise ValueError(f"unknown assistance method {method!r}")
