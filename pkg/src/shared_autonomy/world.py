"""Kinematic workspace: states, inputs, actions, goals and targets.

Everything here is an immutable value object; the operations are pure
functions, so all of it is safe to share across threads.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


def _vector(value, dims: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (dims,):
        raise ValueError(f"{name} must be a length-{dims} vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned box the effector moves in, with time and speed limits."""

    dims: int
    lower_bound: np.ndarray
    upper_bound: np.ndarray
    dt: float = 0.05
    v_max: float = 0.5
    capture_radius: float = 0.02

    def __post_init__(self):
        if self.dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {self.dims}")
        object.__setattr__(self, "lower_bound", _vector(self.lower_bound, self.dims, "lower_bound"))
        object.__setattr__(self, "upper_bound", _vector(self.upper_bound, self.dims, "upper_bound"))
        if not np.all(self.lower_bound < self.upper_bound):
            raise ValueError("lower_bound must be strictly below upper_bound componentwise")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.capture_radius <= 0:
            raise ValueError("capture_radius must be positive")

    @property
    def step_length(self) -> float:
        """Distance covered in one tick at maximum speed."""
        return self.v_max * self.dt

    def clamp(self, pos: np.ndarray) -> np.ndarray:
        return np.clip(pos, self.lower_bound, self.upper_bound)

    def contains(self, pos: np.ndarray) -> bool:
        return bool(np.all(pos >= self.lower_bound) and np.all(pos <= self.upper_bound))


@dataclass(frozen=True)
class RobotState:
    pos: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pos", _vector(self.pos, len(np.atleast_1d(self.pos)), "pos"))


@dataclass(frozen=True)
class UserInput:
    """Joystick deflection, each component in [-1, 1]."""

    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vec", _vector(self.vec, len(np.atleast_1d(self.vec)), "vec"))
        if np.any(np.abs(self.vec) > 1.0 + 1e-12):
            raise ValueError(f"input components must lie in [-1, 1], got {self.vec}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))


@dataclass(frozen=True)
class Action:
    """Velocity command in m/s."""

    vel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vel", _vector(self.vel, len(np.atleast_1d(self.vel)), "vel"))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vel))


@dataclass(frozen=True)
class Target:
    id: str
    pos: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pos", _vector(self.pos, len(np.atleast_1d(self.pos)), "pos"))


@dataclass(frozen=True)
class Goal:
    id: str
    name: str
    targets: tuple[Target, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ValueError(f"goal {self.id!r} must have at least one target")
        ids = [t.id for t in self.targets]
        if len(set(ids)) != len(ids):
            raise ValueError(f"goal {self.id!r} has duplicate target ids: {ids}")


@dataclass(frozen=True)
class Scene:
    workspace: Workspace
    goals: tuple[Goal, ...]
    start_state: RobotState

    def __post_init__(self):
        object.__setattr__(self, "goals", tuple(self.goals))
        if not self.goals:
            raise ValueError("scene must have at least one goal")
        ids = [g.id for g in self.goals]
        if len(set(ids)) != len(ids):
            raise ValueError(f"scene has duplicate goal ids: {ids}")
        for g in self.goals:
            for t in g.targets:
                if t.pos.shape != (self.workspace.dims,):
                    raise ValueError(f"target {g.id}/{t.id} has wrong dimensionality")
                if not self.workspace.contains(t.pos):
                    raise ValueError(f"target {g.id}/{t.id} at {t.pos} is out of bounds")
        if self.start_state.pos.shape != (self.workspace.dims,):
            raise ValueError("start state has wrong dimensionality")
        if not self.workspace.contains(self.start_state.pos):
            raise ValueError(f"start state {self.start_state.pos} is out of bounds")

    def goal_by_id(self, goal_id: str) -> Goal:
        for g in self.goals:
            if g.id == goal_id:
                return g
        raise KeyError(f"unknown goal id {goal_id!r}")

    @property
    def goal_ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.goals)


def transition(x: RobotState, a: Action, w: Workspace) -> RobotState:
    """Explicit-Euler step, clamped componentwise to the workspace box."""
    return RobotState(w.clamp(x.pos + a.vel * w.dt))


def clamp_speed(vel: np.ndarray, v_max: float) -> np.ndarray:
    speed = np.linalg.norm(vel)
    if speed > v_max:
        return vel * (v_max / speed)
    return vel


def direct_teleop(u: UserInput, w: Workspace) -> Action:
    """Map joystick deflection straight to a velocity command."""
    return Action(clamp_speed(u.vec * w.v_max, w.v_max))


def distance_to_target(x: RobotState, target: Target) -> float:
    return float(np.linalg.norm(x.pos - target.pos))


def discretize_inputs(w: Workspace, diag: bool = False) -> list[UserInput]:
    """Canonical finite input set: zero, the 2n axis deflections, and
    optionally the 2^n unit-norm corner diagonals. Ordering is fixed."""
    n = w.dims
    vecs = [np.zeros(n)]
    for axis in range(n):
        for sign in (1.0, -1.0):
            v = np.zeros(n)
            v[axis] = sign
            vecs.append(v)
    if diag:
        for signs in itertools.product((1.0, -1.0), repeat=n):
            v = np.array(signs) / math.sqrt(n)
            vecs.append(v)
    return [UserInput(v) for v in vecs]


def ring_inputs(count: int) -> list[UserInput]:
    """Dense 2-D direction set: zero plus `count` unit deflections on the
    circle. Useful when value grids need low direction-discretization bias."""
    vecs = [np.zeros(2)]
    for k in range(count):
        theta = 2.0 * math.pi * k / count
        vecs.append(np.array([math.cos(theta), math.sin(theta)]))
    return [UserInput(v) for v in vecs]
