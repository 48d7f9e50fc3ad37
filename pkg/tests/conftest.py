import numpy as np
import pytest

from shared_autonomy import load_bundled_scene
from shared_autonomy.engine import SceneRuntime


@pytest.fixture(scope="session")
def default_cfg():
    return load_bundled_scene("default")


@pytest.fixture(scope="session")
def default_runtime(default_cfg):
    rt = SceneRuntime(
        default_cfg.scene,
        default_cfg.cost,
        default_cfg.predictor,
        default_cfg.assist,
    )
    rt.soft_grids  # build once, shared by the whole session
    return rt


@pytest.fixture(scope="session")
def one_goal_cfg():
    return load_bundled_scene("one_goal")


@pytest.fixture(scope="session")
def one_goal_runtime(one_goal_cfg):
    rt = SceneRuntime(
        one_goal_cfg.scene, one_goal_cfg.cost, one_goal_cfg.predictor, one_goal_cfg.assist
    )
    rt.soft_grids
    return rt


@pytest.fixture(scope="session")
def two_goal_cfg():
    return load_bundled_scene("two_goal")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def random_states(workspace, n, rng):
    """Uniform positions inside the workspace box, as an (n, dims) array."""
    span = workspace.upper_bound - workspace.lower_bound
    return workspace.lower_bound + rng.random((n, workspace.dims)) * span
