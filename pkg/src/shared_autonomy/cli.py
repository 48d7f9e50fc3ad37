"""Operator command line: scene validation, headless trials and experiments,
plot-data extraction, and the live session server.

Exit codes: 0 ok, 2 validation failure, 3 runtime failure.
"""
from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .assist import METHODS
from .config import ConfigError, load_scene_config
from .engine import SceneRuntime
from .sim import (
    atomic_write,
    read_trial_log,
    run_experiment,
    run_trial,
    write_trial_log,
)

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _load(scene_path: str):
    try:
        return load_scene_config(scene_path)
    except FileNotFoundError:
        click.echo(f"error: scene file not found: {scene_path}", err=True)
        sys.exit(EXIT_VALIDATION)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)


def _runtime(cfg) -> SceneRuntime:
    return SceneRuntime(cfg.scene, cfg.cost, cfg.predictor, cfg.assist)


def _resolve_goal(scene, goal: str) -> str:
    for g in scene.goals:
        if goal in (g.id, g.name):
            return g.id
    known = [f"{g.id} ({g.name})" for g in scene.goals]
    click.echo(f"error: unknown goal {goal!r}; known goals: {', '.join(known)}", err=True)
    sys.exit(EXIT_VALIDATION)


@click.group()
def main():
    """Shared-autonomy teleoperation engine."""


@main.command()
@click.argument("scene", type=click.Path())
def validate(scene):
    """Parse a scene config and check every invariant."""
    cfg = _load(scene)
    s = cfg.scene
    n_targets = sum(len(g.targets) for g in s.goals)
    click.echo(f"ok: {s.workspace.dims}-D scene, {len(s.goals)} goals, {n_targets} targets")


@main.command()
@click.argument("scene", type=click.Path())
@click.option("--method", type=click.Choice(METHODS), default=None, help="Assistance method (default: scene config).")
@click.option("--goal", required=True, help="True goal (name or id) for the simulated user.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Trial log output path (JSON lines).")
@click.option("--max-steps", type=int, default=2000, show_default=True)
@click.option("--temperature", type=float, default=1.0, show_default=True, help="Exponent on the simulated user's input probabilities.")
def run(scene, method, goal, seed, out, max_steps, temperature):
    """Run one seeded headless trial and write its log."""
    cfg = _load(scene)
    goal_id = _resolve_goal(cfg.scene, goal)
    method = method or cfg.assist.method
    try:
        runtime = _runtime(cfg)
        log = run_trial(runtime, method, goal_id, seed, max_steps, temperature)
        write_trial_log(log, out)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(
        f"{log.outcome}: {log.metrics.steps} steps, "
        f"total input {log.metrics.total_input:.3f} -> {out}"
    )


@main.command()
@click.argument("scene", type=click.Path())
@click.option("--methods", default="policy,blend,direct", show_default=True, help="Comma-separated methods to pair.")
@click.option("--trials", type=int, default=100, show_default=True, help="Paired trials per method.")
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed; trial i uses seed+i.")
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--max-steps", type=int, default=2000, show_default=True)
@click.option("--temperature", type=float, default=1.0, show_default=True)
@click.option("--save-logs/--no-save-logs", default=True, show_default=True)
def experiment(scene, methods, trials, seed, out_dir, max_steps, temperature, save_logs):
    """Run a paired seeded experiment and write summary CSV/JSON plus logs."""
    cfg = _load(scene)
    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    for m in method_list:
        if m not in METHODS:
            click.echo(f"error: unknown method {m!r}; choose from {METHODS}", err=True)
            sys.exit(EXIT_VALIDATION)
    if len(method_list) < 2:
        click.echo("error: need at least two methods to compare", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        runtime = _runtime(cfg)
        os.makedirs(out_dir, exist_ok=True)
        log_dir = os.path.join(out_dir, "logs")

        def sink(log):
            if save_logs:
                name = f"trial_{log.seed}_{log.method}.jsonl"
                write_trial_log(log, os.path.join(log_dir, name))

        summary = run_experiment(
            runtime, method_list, trials, seed, max_steps, temperature, log_sink=sink
        )
        atomic_write(os.path.join(out_dir, "summary.json"), summary.to_json() + "\n")
        atomic_write(os.path.join(out_dir, "summary.csv"), summary.stats_csv())
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    for m in method_list:
        s = summary.stats[m]
        if s:
            click.echo(
                f"{m}: steps {s['steps_mean']:.1f} +- {s['steps_se']:.1f}, "
                f"input {s['total_input_mean']:.3f} +- {s['total_input_se']:.3f}"
            )
    click.echo(f"wrote {out_dir}/summary.json and summary.csv")


def _perdim_csv(log) -> str:
    dims = len(log.frames[0].x) if log.frames else 0
    cols = ["t"]
    cols += [f"u_{d}" for d in range(dims)]
    cols += [f"assist_{d}" for d in range(dims)]
    cols.append("dot")
    lines = [",".join(cols)]
    for f in log.frames:
        d_u = f.u * log.v_max
        speed = np.linalg.norm(d_u)
        if speed > log.v_max:
            d_u = d_u * (log.v_max / speed)
        assist = f.a - d_u
        dot = float(np.dot(f.u, assist))
        row = [str(f.t)]
        row += [repr(float(v)) for v in f.u]
        row += [repr(float(v)) for v in assist]
        row.append(repr(dot))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _dots_csv(summary: dict) -> str:
    methods = summary["methods"]
    baseline = "blend" if "blend" in methods else methods[0]
    other = "policy" if "policy" in methods else [m for m in methods if m != baseline][0]
    lines = [
        f"trial,goal,seed,steps_{baseline},steps_diff,input_{baseline},input_diff"
    ]
    for row in summary["paired"]:
        base = row["methods"][baseline]
        comp = row["methods"][other]
        lines.append(
            ",".join(
                [
                    str(row["trial"]),
                    row["goal"],
                    str(row["seed"]),
                    repr(base["steps"]),
                    repr(base["steps"] - comp["steps"]),
                    repr(base["total_input"]),
                    repr(base["total_input"] - comp["total_input"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _bars_csv(summary: dict) -> str:
    lines = ["method,steps_mean,steps_se,total_input_mean,total_input_se"]
    for m in summary["methods"]:
        s = summary["stats"][m]
        if not s:
            lines.append(f"{m},,,,")
            continue
        lines.append(
            f"{m},{s['steps_mean']!r},{s['steps_se']!r},"
            f"{s['total_input_mean']!r},{s['total_input_se']!r}"
        )
    return "\n".join(lines) + "\n"


@main.command()
@click.argument("path", type=click.Path())
@click.option("--kind", type=click.Choice(["perdim", "dots", "bars"]), required=True)
@click.option("--out", type=click.Path(), required=True)
def plotdata(path, kind, out):
    """Extract plot-ready CSV from a trial log (perdim) or an experiment
    summary JSON (dots, bars)."""
    try:
        if kind == "perdim":
            log = read_trial_log(path)
            text = _perdim_csv(log)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                summary = json.load(fh)
            text = _dots_csv(summary) if kind == "dots" else _bars_csv(summary)
        atomic_write(out, text)
    except FileNotFoundError:
        click.echo(f"error: no such file: {path}", err=True)
        sys.exit(EXIT_VALIDATION)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--scene", "scene_path", type=click.Path(), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--lockstep", is_flag=True, help="Tick once per input message (for scripted clients).")
@click.option("--ui-dir", type=click.Path(), default=None, help="Static UI assets to serve at /.")
def serve(scene_path, host, port, lockstep, ui_dir):
    """Serve the live session service (and the UI when built)."""
    import uvicorn

    from .service import create_app

    cfg = _load(scene_path)
    runtime = _runtime(cfg)
    runtime.soft_grids  # precompute before accepting connections
    if ui_dir is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        ui_dir = candidate if os.path.isdir(candidate) else None
    app = create_app(runtime, lockstep=lockstep, static_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        click.echo(f"error: cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
