"""Hard and soft cost-to-go functions per target, and their composition into
per-goal values.

Grid-based value iteration runs over a discretized workspace with multilinear
interpolation of the continuous next state. The hard (min) values also have a
closed form for this cost family (straight-line travel at max speed), which
the live control loop uses instead of grids.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels
from .costs import CostParams, cost_at_distance, user_cost
from .world import (
    Action,
    Goal,
    RobotState,
    Target,
    UserInput,
    Workspace,
    direct_teleop,
    discretize_inputs,
    distance_to_target,
    transition,
)

DEFAULT_RESOLUTION = {2: 64, 3: 32}

# A callable giving the cost-to-go of one target at a state.
TargetValueFn = Callable[[RobotState, Target], float]


class ValueIterationError(RuntimeError):
    """Value iteration failed to converge within the sweep cap."""

    def __init__(self, residual: float, sweeps: int, tol: float):
        self.residual = residual
        self.sweeps = sweeps
        self.tol = tol
        super().__init__(
            f"value iteration did not converge: residual {residual:.3e} > tol {tol:.3e} "
            f"after {sweeps} sweeps"
        )


def softmin(vals: Sequence[float]) -> float:
    """Smoothed minimum, -log(sum(exp(-v))), shifted for numerical stability.
    Always at or below min(vals); equal to it for a single element."""
    arr = np.asarray(vals, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("softmin of an empty sequence")
    m = arr.min()
    return float(m - np.log(np.exp(m - arr).sum()))


def softmin_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    m = arr.min(axis=axis, keepdims=True)
    out = m - np.log(np.exp(m - arr).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _resolution_tuple(w: Workspace, resolution) -> tuple[int, ...]:
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[w.dims]
    if isinstance(resolution, int):
        return (resolution,) * w.dims
    res = tuple(int(r) for r in resolution)
    if len(res) != w.dims or any(r < 1 for r in res):
        raise ValueError(f"bad grid resolution {resolution!r} for {w.dims}-D workspace")
    return res


def axis_centers(w: Workspace, resolution) -> list[np.ndarray]:
    res = _resolution_tuple(w, resolution)
    centers = []
    for d in range(w.dims):
        h = (w.upper_bound[d] - w.lower_bound[d]) / res[d]
        centers.append(w.lower_bound[d] + (np.arange(res[d]) + 0.5) * h)
    return centers


def grid_centers(w: Workspace, resolution) -> np.ndarray:
    """All cell centers, row-major, shape (C, dims)."""
    axes = axis_centers(w, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def interp_table(w: Workspace, resolution, points: np.ndarray):
    """Multilinear interpolation corners and weights on the cell-center lattice.

    points: (m, dims). Returns idx (m, 2^dims) flat row-major indices and
    wts (m, 2^dims). Points outside the lattice hull are clamped.
    """
    res = _resolution_tuple(w, resolution)
    n = w.dims
    points = np.asarray(points, dtype=np.float64).reshape(-1, n)
    m = points.shape[0]
    base = np.empty((m, n), dtype=np.int64)
    frac = np.empty((m, n), dtype=np.float64)
    for d in range(n):
        h = (w.upper_bound[d] - w.lower_bound[d]) / res[d]
        t = (points[:, d] - w.lower_bound[d]) / h - 0.5
        t = np.clip(t, 0.0, res[d] - 1.0)
        i0 = np.minimum(np.floor(t).astype(np.int64), max(res[d] - 2, 0))
        base[:, d] = i0
        frac[:, d] = t - i0 if res[d] > 1 else 0.0
    corners = list(itertools.product((0, 1), repeat=n))
    idx = np.empty((m, len(corners)), dtype=np.int64)
    wts = np.empty((m, len(corners)), dtype=np.float64)
    for j, corner in enumerate(corners):
        coords = []
        weight = np.ones(m, dtype=np.float64)
        for d in range(n):
            if corner[d] == 0:
                coords.append(base[:, d])
                weight = weight * (1.0 - frac[:, d])
            else:
                coords.append(np.minimum(base[:, d] + 1, res[d] - 1))
                weight = weight * frac[:, d]
        idx[:, j] = np.ravel_multi_index(coords, res)
        wts[:, j] = weight
    return idx, wts


@dataclass(frozen=True)
class ValueGrid:
    workspace: Workspace
    resolution: tuple[int, ...]
    kind: str  # "hard" | "soft"
    target_id: str
    values: np.ndarray  # shape == resolution

    def __post_init__(self):
        if self.kind not in ("hard", "soft"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.values.shape != self.resolution:
            raise ValueError("grid values shape does not match resolution")

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def eval_values(grid: ValueGrid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at (m, dims) points, clamped to the lattice."""
    idx, wts = interp_table(grid.workspace, grid.resolution, points)
    return (grid.flat[idx] * wts).sum(axis=1)


def eval_value(grid: ValueGrid, x: RobotState) -> float:
    return float(eval_values(grid, x.pos[None, :])[0])


def transition_tables(w: Workspace, resolution, inputs: Sequence[UserInput]):
    """Per-input interpolation tables for the state reached from every cell
    center: idx, wts with shape (K, C, 2^dims)."""
    centers = grid_centers(w, resolution)
    idx_list, wts_list = [], []
    for u in inputs:
        a = direct_teleop(u, w)
        nxt = np.clip(centers + a.vel * w.dt, w.lower_bound, w.upper_bound)
        idx, wts = interp_table(w, resolution, nxt)
        idx_list.append(idx)
        wts_list.append(wts)
    return np.ascontiguousarray(idx_list), np.ascontiguousarray(wts_list)


def _absorbing_mask(w: Workspace, resolution, target: Target) -> np.ndarray:
    centers = grid_centers(w, resolution)
    dists = np.linalg.norm(centers - target.pos, axis=1)
    mask = dists <= w.capture_radius
    if not mask.any():
        # A target must absorb somewhere or the iteration diverges; fall back
        # to the nearest cell when the capture radius is below cell size.
        mask[np.argmin(dists)] = True
    return mask


def _run_vi(
    kind: str,
    target: Target,
    params: CostParams,
    w: Workspace,
    resolution,
    inputs,
    tol: float,
    max_sweeps: int,
    backend: str | None,
) -> ValueGrid:
    res = _resolution_tuple(w, resolution)
    if inputs is None:
        inputs = discretize_inputs(w)
    centers = grid_centers(w, res)
    dists = np.linalg.norm(centers - target.pos, axis=1)
    step_costs = cost_at_distance(dists, params)
    if kind == "soft":
        # The soft backup integrates over the input set with the normalized
        # uniform measure: baking log K into the step cost turns the
        # sum-form softmin into a mean. With a raw sum the partition function
        # diverges whenever the step cost is below log(#inputs).
        step_costs = step_costs + math.log(len(inputs))
    costs = np.ascontiguousarray(np.broadcast_to(step_costs, (len(inputs), len(centers))))
    absorbing = _absorbing_mask(w, res, target).astype(np.uint8)
    idx, wts = transition_tables(w, res, inputs)
    values = np.zeros(len(centers), dtype=np.float64)
    if backend is None:
        kernel = _kernels.hard_vi if kind == "hard" else _kernels.soft_vi
    else:
        hard, soft = _kernels.get_backend(backend)
        kernel = hard if kind == "hard" else soft
    sweeps, residual = kernel(values, costs, absorbing, idx, wts, tol, max_sweeps)
    if residual >= tol:
        raise ValueIterationError(residual, sweeps, tol)
    return ValueGrid(w, res, kind, target.id, np.asarray(values).reshape(res))


def hard_value_iteration(
    target: Target,
    params: CostParams,
    w: Workspace,
    resolution=None,
    inputs: Sequence[UserInput] | None = None,
    tol: float = 1e-9,
    max_sweeps: int = 10_000,
    backend: str | None = None,
) -> ValueGrid:
    """Fixed point of V(x) = min_u [C(x) + V(T(x, D(u)))] with absorbing
    zero-cost cells inside the capture radius."""
    return _run_vi("hard", target, params, w, resolution, inputs, tol, max_sweeps, backend)


def soft_value_iteration(
    target: Target,
    params: CostParams,
    w: Workspace,
    resolution=None,
    inputs: Sequence[UserInput] | None = None,
    tol: float = 1e-9,
    max_sweeps: int = 10_000,
    backend: str | None = None,
) -> ValueGrid:
    """Fixed point of the soft-minimum recursion over the discrete input set,
    with the same absorbing-cell construction as the hard variant."""
    return _run_vi("soft", target, params, w, resolution, inputs, tol, max_sweeps, backend)


def finite_horizon_soft_values(costs: np.ndarray, next_idx: np.ndarray, horizon: int) -> np.ndarray:
    """Horizon-limited soft values on an explicit small MDP.

    costs, next_idx: (K, S) per-input step costs and deterministic successor
    indices. Returns V~ over states such that exp(-V~[s]) equals the sum of
    exp(-path cost) over all K^horizon input sequences starting at s.
    """
    costs = np.asarray(costs, dtype=np.float64)
    next_idx = np.asarray(next_idx, dtype=np.int64)
    v = np.zeros(costs.shape[1], dtype=np.float64)
    for _ in range(horizon):
        q = costs + v[next_idx]
        v = softmin_axis(q, axis=0)
    return v


def analytic_values_at_distance(dists, params: CostParams, w: Workspace):
    """Closed-form cost-to-go of moving straight at max speed: the sum of
    per-step distance costs until the capture radius is reached. Vectorized."""
    d = np.asarray(dists, dtype=np.float64)
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    ell = w.step_length
    steps = np.ceil(np.maximum(d - w.capture_radius, 0.0) / ell).astype(np.int64)
    far = np.clip(np.ceil((d - params.delta) / ell).astype(np.int64), 0, steps)
    ramp_n = steps - far
    # sum over i in [far, steps) of (alpha/delta) * (d - i*ell)
    ramp_sum = ramp_n * d - ell * (far + steps - 1) * ramp_n / 2.0
    total = params.alpha * far + (params.alpha / params.delta) * ramp_sum
    return float(total[0]) if scalar else total


def analytic_target_value(x: RobotState, target: Target, params: CostParams, w: Workspace) -> float:
    return analytic_values_at_distance(distance_to_target(x, target), params, w)


def make_analytic_value_fn(params: CostParams, w: Workspace) -> TargetValueFn:
    def fn(x: RobotState, target: Target) -> float:
        return analytic_target_value(x, target, params, w)

    return fn


def make_grid_value_fn(grids: Mapping[str, ValueGrid]) -> TargetValueFn:
    def fn(x: RobotState, target: Target) -> float:
        return eval_value(grids[target.id], x)

    return fn


def min_target(x: RobotState, goal: Goal, value_fn: TargetValueFn) -> tuple[Target, float]:
    """Target of the goal with minimum cost-to-go at x; ties keep the first
    (lowest target id) for deterministic replay."""
    best_t, best_v = None, math.inf
    for t in goal.targets:
        v = value_fn(x, t)
        if v < best_v:
            best_t, best_v = t, v
    return best_t, best_v


def goal_value(x: RobotState, goal: Goal, value_fn: TargetValueFn) -> float:
    return min_target(x, goal, value_fn)[1]


def goal_qvalue(
    x: RobotState,
    a: Action,
    goal: Goal,
    value_fn: TargetValueFn,
    params: CostParams,
    w: Workspace,
    u: UserInput | None = None,
) -> float:
    """Min-composed action value: step cost for the target that is best after
    the move, plus that target's cost-to-go. The deviation penalty is taken
    against direct teleoperation of u (zero input if omitted)."""
    if u is None:
        u = UserInput(np.zeros(w.dims))
    x_next = transition(x, a, w)
    best, _ = min_target(x_next, goal, value_fn)
    dev = a.vel - direct_teleop(u, w).vel
    step = user_cost(x, u, best, params) + params.deviation_weight * float(np.dot(dev, dev))
    return step + value_fn(x_next, best)


def goal_soft_value(x: RobotState, goal: Goal, soft_grids: Mapping[str, ValueGrid]) -> float:
    return softmin([eval_value(soft_grids[t.id], x) for t in goal.targets])


def goal_soft_qvalue(
    x: RobotState,
    u: UserInput,
    goal: Goal,
    soft_grids: Mapping[str, ValueGrid],
    params: CostParams,
    w: Workspace,
) -> float:
    x_next = transition(x, direct_teleop(u, w), w)
    qs = [
        user_cost(x, u, t, params) + eval_value(soft_grids[t.id], x_next)
        for t in goal.targets
    ]
    return softmin(qs)
