"""Headless seeded simulation: stochastic simulated user, trial execution,
metrics, paired experiments, and trial log (re)serialization.

Every trial is a pure function of (scene, method, goal, seed): the simulated
user consumes exactly one uniform draw per step regardless of the assistance
method, so paired seeds share the same random stream across methods.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .engine import SceneRuntime
from .prediction import Belief, snap_index
from .world import Action, RobotState, UserInput, direct_teleop, transition


@dataclass(frozen=True)
class Frame:
    t: int
    x: np.ndarray
    u: np.ndarray
    a: np.ndarray
    belief: dict[str, float]


@dataclass(frozen=True)
class TrialMetrics:
    steps: int
    time: float
    total_input: float
    total_assist_deviation: float


@dataclass
class TrialLog:
    scene_hash: str
    method: str
    goal_id: str
    seed: int
    dt: float
    v_max: float
    frames: list[Frame]
    outcome: str  # "captured" | "timeout"
    captured_target: str | None
    metrics: TrialMetrics


class TrialLogError(ValueError):
    """Trial log file is malformed."""


def compute_metrics(frames: Sequence[Frame], dt: float, v_max: float) -> TrialMetrics:
    total_input = 0.0
    total_dev = 0.0
    for f in frames:
        total_input += float(np.linalg.norm(f.u)) * dt
        d_u = f.u * v_max
        speed = np.linalg.norm(d_u)
        if speed > v_max:
            d_u = d_u * (v_max / speed)
        total_dev += float(np.linalg.norm(f.a - d_u)) * dt
    return TrialMetrics(len(frames), len(frames) * dt, total_input, total_dev)


def simulated_user_step(
    x: RobotState,
    goal_id: str,
    rng: np.random.Generator,
    runtime: SceneRuntime,
    temperature: float = 1.0,
) -> UserInput:
    """Sample one input from the stochastically-optimal user model for the
    true goal. Consumes exactly one uniform draw. temperature is an exponent
    on the model probabilities; infinity means argmax."""
    matrix = runtime.user_model.likelihood_matrix(x)
    gi = runtime.scene.goal_ids.index(goal_id)
    probs = matrix[:, gi]
    r = rng.random()  # always consumed, to keep streams aligned across modes
    if math.isinf(temperature):
        k = int(np.argmax(probs))
    else:
        if temperature != 1.0:
            logs = np.where(probs > 0.0, np.log(np.maximum(probs, 1e-300)), -np.inf)
            logs = logs * temperature
            logs -= logs.max()
            probs = np.exp(logs)
        probs = probs / probs.sum()
        k = int(np.searchsorted(np.cumsum(probs), r, side="right"))
        k = min(k, len(probs) - 1)
    return runtime.inputs[k]


def run_trial(
    runtime: SceneRuntime,
    method: str,
    goal_id: str,
    seed: int,
    max_steps: int = 2000,
    temperature: float = 1.0,
) -> TrialLog:
    scene = runtime.scene
    w = scene.workspace
    goal = scene.goal_by_id(goal_id)  # validates the id
    rng = np.random.Generator(np.random.PCG64(seed))
    predictor = runtime.predictor
    b = predictor.initial_belief()
    x = scene.start_state
    frames: list[Frame] = []
    outcome, captured = "timeout", None
    for t in range(max_steps):
        u = simulated_user_step(x, goal_id, rng, runtime, temperature)
        b = predictor.belief_update(b, u, x)
        a = runtime.action(method, b, x, u)
        frames.append(Frame(t, x.pos.copy(), u.vec.copy(), a.vel.copy(), dict(b.probs)))
        x = transition(x, a, w)
        hit = runtime.captured_target(x, goal_id)
        if hit is not None:
            outcome, captured = "captured", hit
            break
    metrics = compute_metrics(frames, w.dt, w.v_max)
    return TrialLog(
        scene_hash=runtime.scene_hash(),
        method=method,
        goal_id=goal_id,
        seed=seed,
        dt=w.dt,
        v_max=w.v_max,
        frames=frames,
        outcome=outcome,
        captured_target=captured,
        metrics=metrics,
    )


def replay(log: TrialLog) -> Iterator[Frame]:
    """Re-emit frames in order."""
    yield from log.frames


def recompute_beliefs(log: TrialLog, runtime: SceneRuntime) -> list[dict[str, float]]:
    """Fold the predictor over the logged (x, u) stream; independent of the
    logged actions by construction."""
    predictor = runtime.predictor
    b = predictor.initial_belief()
    out = []
    for f in log.frames:
        b = predictor.belief_update(b, UserInput(f.u), RobotState(f.x))
        out.append(dict(b.probs))
    return out


# --- serialization -----------------------------------------------------------

def _dump_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def trial_log_lines(log: TrialLog) -> list[str]:
    lines = [
        _dump_line(
            {
                "type": "header",
                "scene_hash": log.scene_hash,
                "method": log.method,
                "goal": log.goal_id,
                "seed": log.seed,
                "dt": log.dt,
                "v_max": log.v_max,
            }
        )
    ]
    for f in log.frames:
        lines.append(
            _dump_line(
                {
                    "type": "frame",
                    "t": f.t,
                    "x": f.x.tolist(),
                    "u": f.u.tolist(),
                    "a": f.a.tolist(),
                    "b": f.belief,
                }
            )
        )
    m = log.metrics
    lines.append(
        _dump_line(
            {
                "type": "outcome",
                "outcome": log.outcome,
                "captured_target": log.captured_target,
                "steps": m.steps,
                "time": m.time,
                "total_input": m.total_input,
                "total_assist_deviation": m.total_assist_deviation,
            }
        )
    )
    return lines


def write_trial_log(log: TrialLog, path: str) -> None:
    atomic_write(path, "\n".join(trial_log_lines(log)) + "\n")


def read_trial_log(path: str) -> TrialLog:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_trial_log(text)


def parse_trial_log(text: str) -> TrialLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise TrialLogError("trial log must have a header and an outcome line")
    try:
        records = [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise TrialLogError(f"invalid JSON in trial log: {exc}") from exc
    header, outcome = records[0], records[-1]
    if header.get("type") != "header" or outcome.get("type") != "outcome":
        raise TrialLogError("trial log must start with a header and end with an outcome")
    frames = []
    for rec in records[1:-1]:
        if rec.get("type") != "frame":
            raise TrialLogError(f"unexpected record type {rec.get('type')!r}")
        try:
            frames.append(
                Frame(
                    t=int(rec["t"]),
                    x=np.asarray(rec["x"], dtype=np.float64),
                    u=np.asarray(rec["u"], dtype=np.float64),
                    a=np.asarray(rec["a"], dtype=np.float64),
                    belief={k: float(v) for k, v in rec["b"].items()},
                )
            )
        except KeyError as exc:
            raise TrialLogError(f"frame record missing field {exc}") from exc
    metrics = TrialMetrics(
        steps=int(outcome["steps"]),
        time=float(outcome["time"]),
        total_input=float(outcome["total_input"]),
        total_assist_deviation=float(outcome["total_assist_deviation"]),
    )
    return TrialLog(
        scene_hash=header["scene_hash"],
        method=header["method"],
        goal_id=header["goal"],
        seed=int(header["seed"]),
        dt=float(header["dt"]),
        v_max=float(header["v_max"]),
        frames=frames,
        outcome=outcome["outcome"],
        captured_target=outcome["captured_target"],
        metrics=metrics,
    )


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- experiments -------------------------------------------------------------

@dataclass
class ExperimentSummary:
    methods: list[str]
    seeds: list[int]
    trials: list[dict]  # one row per (trial index, method)
    stats: dict[str, dict[str, float]]  # method -> mean/se of steps and input
    paired: list[dict]  # per trial index: per-method steps/input for pairing

    def to_json(self) -> str:
        return json.dumps(
            {
                "methods": self.methods,
                "seeds": self.seeds,
                "trials": self.trials,
                "stats": self.stats,
                "paired": self.paired,
            },
            sort_keys=True,
            indent=2,
        )

    def stats_csv(self) -> str:
        lines = ["method,steps_mean,steps_se,total_input_mean,total_input_se"]
        for m in self.methods:
            s = self.stats[m]
            if not s:
                lines.append(f"{m},,,,")
                continue
            lines.append(
                f"{m},{s['steps_mean']!r},{s['steps_se']!r},"
                f"{s['total_input_mean']!r},{s['total_input_se']!r}"
            )
        return "\n".join(lines) + "\n"


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("nan")
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def run_experiment(
    runtime: SceneRuntime,
    methods: Sequence[str],
    trials_per_cell: int,
    base_seed: int = 0,
    max_steps: int = 2000,
    temperature: float = 1.0,
    log_sink=None,
) -> ExperimentSummary:
    """Paired design: trial i uses the same (goal, seed) for every method.
    log_sink, if given, is called with every TrialLog."""
    if len(methods) < 2:
        raise ValueError("run_experiment needs at least two methods to compare")
    goals = runtime.scene.goal_ids
    seeds, trials, paired = [], [], []
    per_method = {m: {"steps": [], "total_input": []} for m in methods}
    for i in range(trials_per_cell):
        goal_id = goals[i % len(goals)]
        seed = base_seed + i
        seeds.append(seed)
        row = {"trial": i, "goal": goal_id, "seed": seed, "methods": {}}
        for method in methods:
            log = run_trial(runtime, method, goal_id, seed, max_steps, temperature)
            if log_sink is not None:
                log_sink(log)
            m = log.metrics
            trials.append(
                {
                    "trial": i,
                    "goal": goal_id,
                    "seed": seed,
                    "method": method,
                    "outcome": log.outcome,
                    "steps": m.steps,
                    "time": m.time,
                    "total_input": m.total_input,
                    "total_assist_deviation": m.total_assist_deviation,
                }
            )
            row["methods"][method] = {"steps": m.steps, "total_input": m.total_input}
            per_method[method]["steps"].append(m.steps)
            per_method[method]["total_input"].append(m.total_input)
        paired.append(row)
    stats = {}
    for method in methods:
        if not per_method[method]["steps"]:
            stats[method] = {}
            continue
        steps_mean, steps_se = _mean_se(per_method[method]["steps"])
        inp_mean, inp_se = _mean_se(per_method[method]["total_input"])
        stats[method] = {
            "steps_mean": steps_mean,
            "steps_se": steps_se,
            "total_input_mean": inp_mean,
            "total_input_se": inp_se,
        }
    return ExperimentSummary(list(methods), seeds, trials, stats, paired)
