"""Goal inference from streaming user inputs.

The observation model scores each discrete input by how efficiently it
progresses toward each goal (exponential in soft cost-to-go differences), and
a Bayes update folds those scores into a belief over goals. Likelihoods are a
function of the user's input and the executed state only; robot actions never
enter, which structurally rules out the self-confirming feedback loop.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .costs import CostParams, cost_at_distance
from .values import (
    ValueGrid,
    analytic_values_at_distance,
    eval_values,
    soft_value_iteration,
    softmin_axis,
)
from .world import (
    RobotState,
    Scene,
    UserInput,
    Workspace,
    clamp_speed,
    discretize_inputs,
)

DEAD_ZONE = 0.1

MODES = ("exact_soft", "approx_hard")


@dataclass(frozen=True)
class Belief:
    """Probability per goal id, in scene order. Always a valid distribution."""

    probs: dict[str, float]

    def __post_init__(self):
        object.__setattr__(self, "probs", dict(self.probs))
        vals = np.array(list(self.probs.values()), dtype=np.float64)
        if vals.size == 0:
            raise ValueError("belief over zero goals")
        if np.any(vals < -1e-12) or np.any(vals > 1.0 + 1e-9):
            raise ValueError(f"belief probabilities out of [0, 1]: {self.probs}")
        if abs(vals.sum() - 1.0) > 1e-9:
            raise ValueError(f"belief does not sum to 1: sum={vals.sum()!r}")

    def as_array(self, goal_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.probs[g] for g in goal_ids], dtype=np.float64)

    def __getitem__(self, goal_id: str) -> float:
        return self.probs[goal_id]


def uniform_belief(goal_ids: Sequence[str]) -> Belief:
    p = 1.0 / len(goal_ids)
    return Belief({g: p for g in goal_ids})


def belief_entropy(b: Belief) -> float:
    """Shannon entropy in nats."""
    total = 0.0
    for p in b.probs.values():
        if p > 0.0:
            total -= p * np.log(p)
    return float(total)


def map_goal(b: Belief) -> str:
    """Most probable goal; ties keep the earliest (lowest) goal id."""
    best_id, best_p = None, -1.0
    for gid, p in b.probs.items():
        if p > best_p:
            best_id, best_p = gid, p
    return best_id


@dataclass(frozen=True)
class PredictorConfig:
    mode: str = "exact_soft"
    likelihood_floor: float = 1e-6
    prior: Belief | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0.0 <= self.likelihood_floor <= 0.1):
            raise ValueError("likelihood_floor must lie in [0, 0.1]")


def snap_input(
    u: UserInput, inputs: Sequence[UserInput], dead_zone: float = DEAD_ZONE
) -> UserInput:
    """Nearest member of the discrete input set: inputs below the dead zone
    snap to zero, otherwise the member with the highest cosine similarity."""
    return inputs[snap_index(u, inputs, dead_zone)]


def snap_index(u: UserInput, inputs: Sequence[UserInput], dead_zone: float = DEAD_ZONE) -> int:
    norms = [inp.norm for inp in inputs]
    zero_idx = next(i for i, nrm in enumerate(norms) if nrm == 0.0)
    u_norm = u.norm
    if u_norm < dead_zone:
        return zero_idx
    best_i, best_cos = zero_idx, -np.inf
    for i, inp in enumerate(inputs):
        if norms[i] == 0.0:
            continue
        cos = float(np.dot(u.vec, inp.vec)) / (u_norm * norms[i])
        if cos > best_cos + 1e-12:
            best_i, best_cos = i, cos
    return best_i


class AllZeroPosteriorWarning(UserWarning):
    """Every goal assigned zero likelihood to the observed input (possible only
    with a zero likelihood floor); the belief was left unchanged."""


class GoalPredictor:
    """Holds the per-target soft value grids (immutable after construction)
    and computes input likelihoods and Bayes updates for one scene."""

    def __init__(
        self,
        scene: Scene,
        params: CostParams,
        config: PredictorConfig | None = None,
        soft_grids: Mapping[str, Mapping[str, ValueGrid]] | None = None,
        inputs: Sequence[UserInput] | None = None,
        resolution=None,
    ):
        self.scene = scene
        self.params = params
        self.config = config or PredictorConfig()
        self.inputs = list(inputs) if inputs is not None else discretize_inputs(scene.workspace)
        w = scene.workspace
        self._actions = np.stack([clamp_speed(u.vec * w.v_max, w.v_max) for u in self.inputs])
        if self.config.mode == "exact_soft":
            if soft_grids is None:
                soft_grids = build_soft_grids(scene, params, self.inputs, resolution)
            self.soft_grids = soft_grids
        else:
            self.soft_grids = soft_grids  # unused by approx_hard

    def initial_belief(self) -> Belief:
        if self.config.prior is not None:
            return self.config.prior
        return uniform_belief(self.scene.goal_ids)

    def likelihood_matrix(self, x: RobotState) -> np.ndarray:
        """Likelihood of every discrete input (rows) under every goal
        (columns, scene order). Rows of each column sum to 1."""
        w = self.scene.workspace
        nxt = np.clip(x.pos + self._actions * w.dt, w.lower_bound, w.upper_bound)
        cols = []
        for goal in self.scene.goals:
            if self.config.mode == "exact_soft":
                cols.append(self._soft_column(x, nxt, goal))
            else:
                cols.append(self._hard_column(x, nxt, goal))
        return np.stack(cols, axis=1)

    def _soft_column(self, x: RobotState, nxt: np.ndarray, goal) -> np.ndarray:
        grids = self.soft_grids[goal.id]
        qs = []
        for t in goal.targets:
            step = cost_at_distance(float(np.linalg.norm(x.pos - t.pos)), self.params)
            qs.append(step + eval_values(grids[t.id], nxt))
        q_goal = softmin_axis(np.stack(qs), axis=0)  # (K,)
        v_goal = softmin_axis(q_goal, axis=0)
        return np.exp(v_goal - q_goal)

    def _hard_column(self, x: RobotState, nxt: np.ndarray, goal) -> np.ndarray:
        w = self.scene.workspace
        vals, steps = [], []
        for t in goal.targets:
            d_next = np.linalg.norm(nxt - t.pos, axis=1)
            vals.append(analytic_values_at_distance(d_next, self.params, w))
            steps.append(cost_at_distance(float(np.linalg.norm(x.pos - t.pos)), self.params))
        vals = np.stack(vals)  # (T, K)
        best = vals.argmin(axis=0)
        q_goal = np.asarray(steps)[best] + vals[best, np.arange(vals.shape[1])]
        v_goal = min(
            analytic_values_at_distance(float(np.linalg.norm(x.pos - t.pos)), self.params, w)
            for t in goal.targets
        )
        logits = v_goal - q_goal
        # Hard-value substitution breaks exact normalization; renormalize.
        weights = np.exp(logits - logits.max())
        return weights / weights.sum()

    def input_likelihood(self, u: UserInput, x: RobotState, goal_id: str) -> float:
        k = snap_index(u, self.inputs)
        gi = self.scene.goal_ids.index(goal_id)
        return float(self.likelihood_matrix(x)[k, gi])

    def belief_update(self, b: Belief, u: UserInput, x: RobotState) -> Belief:
        k = snap_index(u, self.inputs)
        row = self.likelihood_matrix(x)[k, :]
        return self.apply_likelihoods(b, row)

    def apply_likelihoods(self, b: Belief, likelihoods: np.ndarray) -> Belief:
        goal_ids = self.scene.goal_ids
        prior = b.as_array(goal_ids)
        post = prior * np.maximum(likelihoods, self.config.likelihood_floor)
        total = post.sum()
        if total <= 0.0:
            warnings.warn(
                "all-zero posterior; keeping previous belief", AllZeroPosteriorWarning
            )
            return b
        post /= total
        return Belief(dict(zip(goal_ids, post.tolist())))


def build_soft_grids(
    scene: Scene,
    params: CostParams,
    inputs: Sequence[UserInput] | None = None,
    resolution=None,
) -> dict[str, dict[str, ValueGrid]]:
    """Per-goal, per-target soft value grids. Grid construction per target is
    independent; results are immutable and shareable."""
    if inputs is None:
        inputs = discretize_inputs(scene.workspace)
    out: dict[str, dict[str, ValueGrid]] = {}
    for goal in scene.goals:
        out[goal.id] = {
            t.id: soft_value_iteration(
                t, params, scene.workspace, resolution=resolution, inputs=inputs
            )
            for t in goal.targets
        }
    return out
