"""Shared-autonomy teleoperation engine: goal inference from user inputs and
belief-weighted assistance."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .assist import AssistConfig
from .config import SceneConfig, load_bundled_scene, load_scene_config
from .costs import CostParams
from .engine import SceneRuntime
from .prediction import Belief, GoalPredictor, PredictorConfig
from .world import Goal, RobotState, Scene, Target, UserInput, Workspace

__all__ = [
    "KERNEL_BACKEND",
    "AssistConfig",
    "SceneConfig",
    "load_bundled_scene",
    "load_scene_config",
    "CostParams",
    "SceneRuntime",
    "Belief",
    "GoalPredictor",
    "PredictorConfig",
    "Goal",
    "RobotState",
    "Scene",
    "Target",
    "UserInput",
    "Workspace",
]

__version__ = "0.1.0"
