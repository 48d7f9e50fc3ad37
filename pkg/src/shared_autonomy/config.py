"""Scene config files: a strict, human-readable YAML schema carrying the
workspace, cost parameters, goals, start pose, predictor and assistance
settings. Unknown keys are rejected; every domain invariant is enforced at
load time with field-level messages."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .assist import METHODS, AssistConfig
from .costs import CostParams
from .prediction import MODES, PredictorConfig
from .world import Goal, RobotState, Scene, Target, Workspace


class ConfigError(ValueError):
    """Scene config failed validation; .errors lists field-level messages."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scene config:\n" + "\n".join(f"  - {e}" for e in errors))


@dataclass(frozen=True)
class SceneConfig:
    scene: Scene
    cost: CostParams
    predictor: PredictorConfig
    assist: AssistConfig


_TOP_KEYS = {"workspace", "cost", "goals", "start", "predictor", "assist"}
_WORKSPACE_KEYS = {"dims", "bounds", "dt", "v_max", "epsilon"}
_COST_KEYS = {"alpha", "delta", "deviation_weight"}
_GOAL_KEYS = {"name", "targets"}
_PREDICTOR_KEYS = {"mode", "floor"}
_ASSIST_KEYS = {"method", "D", "cap"}


def _check_keys(doc: dict, allowed: set, where: str, errors: list):
    for key in doc:
        if key not in allowed:
            errors.append(f"{where}: unknown key {key!r}")


def _number(doc, key, where, errors, default=None):
    if key not in doc:
        if default is None:
            errors.append(f"{where}.{key}: required")
        return default
    v = doc[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        errors.append(f"{where}.{key}: must be a number, got {v!r}")
        return default
    return float(v)


def parse_scene_config(doc: dict) -> SceneConfig:
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level: must be a mapping"])
    _check_keys(doc, _TOP_KEYS, "top level", errors)

    ws_doc = doc.get("workspace")
    if not isinstance(ws_doc, dict):
        errors.append("workspace: required mapping")
        raise ConfigError(errors)
    _check_keys(ws_doc, _WORKSPACE_KEYS, "workspace", errors)
    dims = ws_doc.get("dims")
    if dims not in (2, 3):
        errors.append(f"workspace.dims: must be 2 or 3, got {dims!r}")
        raise ConfigError(errors)
    bounds = ws_doc.get("bounds")
    if (
        not isinstance(bounds, list)
        or len(bounds) != 2
        or any(not isinstance(b, list) or len(b) != dims for b in bounds)
    ):
        errors.append(f"workspace.bounds: must be [lower, upper], each length {dims}")
        raise ConfigError(errors)
    dt = _number(ws_doc, "dt", "workspace", errors, 0.05)
    v_max = _number(ws_doc, "v_max", "workspace", errors, 0.5)
    epsilon = _number(ws_doc, "epsilon", "workspace", errors, 0.02)
    try:
        workspace = Workspace(dims, bounds[0], bounds[1], dt, v_max, epsilon)
    except ValueError as exc:
        errors.append(f"workspace: {exc}")
        raise ConfigError(errors)

    cost_doc = doc.get("cost", {})
    if not isinstance(cost_doc, dict):
        errors.append("cost: must be a mapping")
        cost_doc = {}
    _check_keys(cost_doc, _COST_KEYS, "cost", errors)
    try:
        cost = CostParams(
            alpha=_number(cost_doc, "alpha", "cost", errors, 1.0),
            delta=_number(cost_doc, "delta", "cost", errors, 0.1),
            deviation_weight=_number(cost_doc, "deviation_weight", "cost", errors, 1.0),
        )
    except ValueError as exc:
        errors.append(f"cost: {exc}")
        cost = CostParams()

    goals_doc = doc.get("goals")
    goals: list[Goal] = []
    if not isinstance(goals_doc, list) or not goals_doc:
        errors.append("goals: required non-empty list")
    else:
        for gi, g_doc in enumerate(goals_doc):
            where = f"goals[{gi}]"
            if not isinstance(g_doc, dict):
                errors.append(f"{where}: must be a mapping")
                continue
            _check_keys(g_doc, _GOAL_KEYS, where, errors)
            name = g_doc.get("name")
            if not isinstance(name, str) or not name:
                errors.append(f"{where}.name: required non-empty string")
                name = f"goal{gi}"
            t_doc = g_doc.get("targets")
            if not isinstance(t_doc, list) or not t_doc:
                errors.append(f"{where}.targets: required non-empty list of coordinates")
                continue
            targets = []
            for ti, coords in enumerate(t_doc):
                if not isinstance(coords, list) or len(coords) != dims:
                    errors.append(f"{where}.targets[{ti}]: must be a length-{dims} vector")
                    continue
                pos = np.asarray(coords, dtype=np.float64)
                if not workspace.contains(pos):
                    errors.append(f"{where}.targets[{ti}]: position {coords} out of bounds")
                    continue
                targets.append(Target(id=f"t{ti}", pos=pos))
            if not targets:
                continue
            try:
                goals.append(Goal(id=f"g{gi}", name=name, targets=tuple(targets)))
            except ValueError as exc:
                errors.append(f"{where}: {exc}")
    names = [g.name for g in goals]
    if len(set(names)) != len(names):
        errors.append(f"goals: duplicate names {names}")

    start = doc.get("start")
    if not isinstance(start, list) or len(start) != dims:
        errors.append(f"start: required length-{dims} vector")
        start = None

    pred_doc = doc.get("predictor", {})
    if not isinstance(pred_doc, dict):
        errors.append("predictor: must be a mapping")
        pred_doc = {}
    _check_keys(pred_doc, _PREDICTOR_KEYS, "predictor", errors)
    mode = pred_doc.get("mode", "exact_soft")
    if mode not in MODES:
        errors.append(f"predictor.mode: must be one of {MODES}, got {mode!r}")
        mode = "exact_soft"
    floor = _number(pred_doc, "floor", "predictor", errors, 1e-6)
    try:
        predictor = PredictorConfig(mode=mode, likelihood_floor=floor)
    except ValueError as exc:
        errors.append(f"predictor: {exc}")
        predictor = PredictorConfig()

    assist_doc = doc.get("assist", {})
    if not isinstance(assist_doc, dict):
        errors.append("assist: must be a mapping")
        assist_doc = {}
    _check_keys(assist_doc, _ASSIST_KEYS, "assist", errors)
    method = assist_doc.get("method", "policy")
    if method not in METHODS:
        errors.append(f"assist.method: must be one of {METHODS}, got {method!r}")
        method = "policy"
    try:
        assist = AssistConfig(
            method=method,
            blend_distance_D=_number(assist_doc, "D", "assist", errors, 0.3),
            blend_cap=_number(assist_doc, "cap", "assist", errors, 0.6),
        )
    except ValueError as exc:
        errors.append(f"assist: {exc}")
        assist = AssistConfig()

    if errors:
        raise ConfigError(errors)

    try:
        scene = Scene(workspace, tuple(goals), RobotState(np.asarray(start, dtype=np.float64)))
    except ValueError as exc:
        raise ConfigError([str(exc)])
    return SceneConfig(scene=scene, cost=cost, predictor=predictor, assist=assist)


def load_scene_config(path: str) -> SceneConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"YAML parse error: {exc}"])
    return parse_scene_config(doc)


def bundled_scene_path(name: str) -> str:
    ref = resources.files("shared_autonomy") / "scenes" / f"{name}.yaml"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled scene named {name!r}")
    return str(ref)


def load_bundled_scene(name: str) -> SceneConfig:
    return load_scene_config(bundled_scene_path(name))
