"""Scene runtime: one immutable bundle of scene, cost parameters, discrete
input set, precomputed soft value grids, predictor and assistance policies.

Grids are built once per scene (lazily) and shared read-only afterwards;
everything downstream of construction is a pure function, so a runtime can be
shared across threads and sessions.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .assist import AssistConfig, select_action
from .costs import CostParams
from .prediction import Belief, GoalPredictor, PredictorConfig, build_soft_grids
from .values import analytic_values_at_distance, axis_centers
from .world import Action, RobotState, Scene, UserInput, discretize_inputs


def scene_fingerprint(scene: Scene, params: CostParams) -> str:
    """Stable short hash of the scene geometry and cost parameters."""
    w = scene.workspace
    doc = {
        "dims": w.dims,
        "lower": w.lower_bound.tolist(),
        "upper": w.upper_bound.tolist(),
        "dt": w.dt,
        "v_max": w.v_max,
        "epsilon": w.capture_radius,
        "alpha": params.alpha,
        "delta": params.delta,
        "deviation_weight": params.deviation_weight,
        "start": scene.start_state.pos.tolist(),
        "goals": [
            {
                "id": g.id,
                "name": g.name,
                "targets": [{"id": t.id, "pos": t.pos.tolist()} for t in g.targets],
            }
            for g in scene.goals
        ],
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class SceneRuntime:
    def __init__(
        self,
        scene: Scene,
        params: CostParams | None = None,
        predictor_config: PredictorConfig | None = None,
        assist_config: AssistConfig | None = None,
        resolution=None,
        diag_inputs: bool = False,
    ):
        self.scene = scene
        self.params = params or CostParams()
        self.predictor_config = predictor_config or PredictorConfig()
        self.assist_config = assist_config or AssistConfig()
        self.resolution = resolution
        self.inputs = discretize_inputs(scene.workspace, diag_inputs)
        self._soft_grids = None
        self._predictor = None
        self._user_model = None

    @property
    def soft_grids(self):
        if self._soft_grids is None:
            self._soft_grids = build_soft_grids(
                self.scene, self.params, self.inputs, self.resolution
            )
        return self._soft_grids

    @property
    def predictor(self) -> GoalPredictor:
        if self._predictor is None:
            grids = self.soft_grids if self.predictor_config.mode == "exact_soft" else None
            self._predictor = GoalPredictor(
                self.scene, self.params, self.predictor_config, grids, self.inputs
            )
        return self._predictor

    @property
    def user_model(self) -> GoalPredictor:
        """Stochastically-optimal user model; always the exact soft variant,
        independent of which mode the belief predictor runs in."""
        if self.predictor_config.mode == "exact_soft":
            return self.predictor
        if self._user_model is None:
            self._user_model = GoalPredictor(
                self.scene,
                self.params,
                PredictorConfig(mode="exact_soft"),
                self.soft_grids,
                self.inputs,
            )
        return self._user_model

    def action(self, method: str, b: Belief, x: RobotState, u: UserInput) -> Action:
        return select_action(method, b, x, u, self.scene, self.params, self.assist_config)

    def scene_hash(self) -> str:
        return scene_fingerprint(self.scene, self.params)

    def captured_target(self, x: RobotState, goal_id: str) -> str | None:
        """Id of the first target of the goal within the capture radius of x,
        or None."""
        goal = self.scene.goal_by_id(goal_id)
        eps = self.scene.workspace.capture_radius
        for t in goal.targets:
            if float(np.linalg.norm(x.pos - t.pos)) <= eps:
                return t.id
        return None

    def heatmap(self, goal_id: str | None, belief: Belief | None = None, resolution=None, plane: float | None = None):
        """2-D slice of the hard goal value field (min over targets of the
        analytic cost-to-go), belief-weighted across goals when goal_id is
        None. For 3-D scenes the slice is taken at height `plane` (start
        height if omitted). Returns a payload dict for the wire protocol."""
        w = self.scene.workspace
        res = resolution or 64
        axes = axis_centers(w, (res,) * w.dims)
        xs, ys = axes[0], axes[1]
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        if w.dims == 3:
            z = plane if plane is not None else float(self.scene.start_state.pos[2])
            pts = np.concatenate([pts, np.full((pts.shape[0], 1), z)], axis=1)

        def goal_field(goal):
            per_target = [
                analytic_values_at_distance(
                    np.linalg.norm(pts - t.pos, axis=1), self.params, w
                )
                for t in goal.targets
            ]
            return np.minimum.reduce(per_target)

        if goal_id is not None:
            field = goal_field(self.scene.goal_by_id(goal_id))
            label = goal_id
        else:
            b = belief or self.predictor.initial_belief()
            field = np.zeros(pts.shape[0])
            for goal in self.scene.goals:
                field += b[goal.id] * goal_field(goal)
            label = "belief-weighted"
        return {
            "type": "heatmap",
            "goal": label,
            "bounds": [w.lower_bound.tolist()[:2], w.upper_bound.tolist()[:2]],
            "rows": len(xs),
            "cols": len(ys),
            "values": field.tolist(),
        }
