"""Per-target cost functions: constant far from the target, linear ramp near it,
plus a quadratic penalty on deviating from direct teleoperation.

Costs are charged per decision epoch, not scaled by dt. States within the
capture radius are treated as absorbing (zero continuation cost) by the value
computations built on top of these.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import (
    Action,
    RobotState,
    Target,
    UserInput,
    Workspace,
    direct_teleop,
    distance_to_target,
)


@dataclass(frozen=True)
class CostParams:
    alpha: float = 1.0
    delta: float = 0.1
    deviation_weight: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.deviation_weight < 0:
            raise ValueError("deviation_weight must be non-negative")


def cost_at_distance(d, p: CostParams):
    """Per-step cost as a function of distance to the target: alpha in the far
    field, a linear ramp alpha/delta * d inside the delta radius. Accepts
    scalars or arrays."""
    d = np.asarray(d, dtype=np.float64)
    out = np.where(d > p.delta, p.alpha, (p.alpha / p.delta) * d)
    if out.ndim == 0:
        return float(out)
    return out


def user_cost(x: RobotState, u: UserInput, target: Target, p: CostParams) -> float:
    # The input is part of the signature but this instantiation depends on
    # state alone.
    return cost_at_distance(distance_to_target(x, target), p)


def robot_cost(
    x: RobotState,
    a: Action,
    u: UserInput,
    target: Target,
    p: CostParams,
    w: Workspace,
) -> float:
    dev = a.vel - direct_teleop(u, w).vel
    return user_cost(x, u, target, p) + p.deviation_weight * float(np.dot(dev, dev))


def takeover_cost(x: RobotState, a: Action, target: Target, p: CostParams, w: Workspace) -> float:
    """Robot cost with the user input fixed to zero (robot-takes-over variant)."""
    zero = UserInput(np.zeros(w.dims))
    return robot_cost(x, a, zero, target, p, w)
