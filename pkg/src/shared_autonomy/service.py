"""Live session service: a fixed-tick control loop behind a JSON websocket.

The session advances exactly one model dt per tick regardless of wall-clock
timing. Missing client input is held (zero-order) and decays to zero after
0.5 s of silence. In lockstep mode every client input message drives exactly
one tick, which makes scripted sessions reproducible; the default timer mode
ticks at the model rate for human clients.

Wire protocol (JSON per message):
  client -> server: {"type":"input","vec":[...],"capture":bool}
                    {"type":"set_method","method":...}
                    {"type":"reset"}
                    {"type":"heatmap","goal":<goal id or "belief-weighted">}
  server -> client: {"type":"frame","tick",..,"x","u","a","belief",
                     "confidence","status","values"}
                    {"type":"heatmap","goal","bounds","rows","cols","values"}
"""
from __future__ import annotations

import asyncio
import math
import uuid
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .assist import METHODS, blend_confidence
from .engine import SceneRuntime
from .prediction import snap_input
from .values import goal_value, make_analytic_value_fn
from .world import RobotState, UserInput, transition

INPUT_HOLD_SECONDS = 0.5


class SessionState:
    """One live control session. Single-writer: the connection layer owns it."""

    def __init__(self, runtime: SceneRuntime, method: str | None = None, session_id: str | None = None):
        self.id = session_id or uuid.uuid4().hex
        self.runtime = runtime
        self.method = method or runtime.assist_config.method
        if self.method not in METHODS:
            raise ValueError(f"unknown assistance method {self.method!r}")
        w = runtime.scene.workspace
        self._hold_ticks = max(1, math.ceil(INPUT_HOLD_SECONDS / w.dt))
        self._value_fn = make_analytic_value_fn(runtime.params, w)
        self.reset()

    def reset(self):
        self.belief = self.runtime.predictor.initial_belief()
        self.x = self.runtime.scene.start_state
        self.tick_count = 0
        self.held_input = np.zeros(self.runtime.scene.workspace.dims)
        self.silence_ticks = 0
        self.capture_requested = False
        self.status = "running"

    def set_method(self, method: str):
        if method not in METHODS:
            raise ValueError(f"unknown assistance method {method!r}")
        self.method = method  # belief is preserved across switches

    def apply_input(self, vec, capture: bool = False):
        arr = np.asarray(vec, dtype=np.float64)
        w = self.runtime.scene.workspace
        if arr.shape != (w.dims,) or not np.all(np.isfinite(arr)):
            raise ValueError(f"input vec must be a finite length-{w.dims} vector")
        self.held_input = np.clip(arr, -1.0, 1.0)
        self.silence_ticks = 0
        if capture:
            self.capture_requested = True

    def tick(self, input_frame=None) -> dict:
        """Advance one model dt. input_frame is ({vec, capture}) or None for
        a silent tick (zero-order hold with decay)."""
        if input_frame is not None:
            self.apply_input(input_frame.get("vec"), bool(input_frame.get("capture", False)))
        else:
            self.silence_ticks += 1
            if self.silence_ticks >= self._hold_ticks:
                self.held_input = np.zeros_like(self.held_input)

        scene = self.runtime.scene
        w = scene.workspace
        u = UserInput(self.held_input)
        if self.status == "running":
            snapped = snap_input(u, self.runtime.predictor.inputs)
            self.belief = self.runtime.predictor.belief_update(self.belief, snapped, self.x)
            a = self.runtime.action(self.method, self.belief, self.x, u)
            self.x = transition(self.x, a, w)
            self.tick_count += 1
            # Capture mirrors the hand-close button: requires the explicit
            # capture command while within the capture radius of some target.
            if self.capture_requested and self._near_any_target():
                self.status = "captured"
        else:
            a = None
        self.capture_requested = False
        return self._frame(u, a)

    def _near_any_target(self) -> bool:
        eps = self.runtime.scene.workspace.capture_radius
        for goal in self.runtime.scene.goals:
            for t in goal.targets:
                if float(np.linalg.norm(self.x.pos - t.pos)) <= eps:
                    return True
        return False

    def _frame(self, u: UserInput, a) -> dict:
        scene = self.runtime.scene
        values = {
            g.id: goal_value(self.x, g, self._value_fn) for g in scene.goals
        }
        return {
            "type": "frame",
            "tick": self.tick_count,
            "x": self.x.pos.tolist(),
            "u": u.vec.tolist(),
            "a": a.vel.tolist() if a is not None else [0.0] * scene.workspace.dims,
            "belief": {gid: float(p) for gid, p in self.belief.probs.items()},
            "confidence": blend_confidence(
                self.belief, self.x, scene, self.runtime.assist_config
            ),
            "status": self.status,
            "values": values,
        }


def scene_metadata(runtime: SceneRuntime) -> dict:
    scene = runtime.scene
    w = scene.workspace
    return {
        "dims": w.dims,
        "bounds": [w.lower_bound.tolist(), w.upper_bound.tolist()],
        "dt": w.dt,
        "v_max": w.v_max,
        "epsilon": w.capture_radius,
        "start": scene.start_state.pos.tolist(),
        "goals": [
            {
                "id": g.id,
                "name": g.name,
                "targets": [{"id": t.id, "pos": t.pos.tolist()} for t in g.targets],
            }
            for g in scene.goals
        ],
        "methods": list(METHODS),
        "scene_hash": runtime.scene_hash(),
    }


def create_app(runtime: SceneRuntime, lockstep: bool = False, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="shared-autonomy session service")
    sessions: dict[str, SessionState] = {}
    app.state.sessions = sessions
    app.state.runtime = runtime

    @app.get("/api/scene")
    def get_scene():
        return scene_metadata(runtime)

    @app.get("/api/heatmap")
    def get_heatmap(goal: str = "belief-weighted", session: str | None = None):
        belief = None
        if session is not None:
            st = sessions.get(session)
            if st is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session!r}")
            belief = st.belief
        gid = None if goal == "belief-weighted" else goal
        if gid is not None and gid not in runtime.scene.goal_ids:
            raise HTTPException(status_code=404, detail=f"unknown goal id {goal!r}")
        return runtime.heatmap(gid, belief)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session_id = ws.query_params.get("session")
        method = ws.query_params.get("method")
        if session_id and session_id in sessions:
            session = sessions[session_id]
        else:
            try:
                session = SessionState(runtime, method=method, session_id=session_id)
            except ValueError as exc:
                await ws.send_json({"type": "error", "message": str(exc)})
                await ws.close()
                return
            sessions[session.id] = session
        await ws.send_json({"type": "session", "session": session.id})

        async def handle(msg: dict) -> bool:
            """Returns True when the message ticked the session (lockstep)."""
            mtype = msg.get("type")
            if mtype == "input":
                try:
                    if lockstep:
                        await ws.send_json(session.tick(msg))
                    else:
                        session.apply_input(msg.get("vec"), bool(msg.get("capture", False)))
                except ValueError as exc:
                    await ws.send_json({"type": "error", "message": str(exc)})
                    return False
                return True
            if mtype == "set_method":
                try:
                    session.set_method(msg.get("method"))
                    await ws.send_json({"type": "ack", "method": session.method})
                except ValueError as exc:
                    await ws.send_json({"type": "error", "message": str(exc)})
                return False
            if mtype == "reset":
                session.reset()
                await ws.send_json({"type": "ack", "method": session.method})
                return False
            if mtype == "heatmap":
                goal = msg.get("goal", "belief-weighted")
                gid = None if goal == "belief-weighted" else goal
                if gid is not None and gid not in runtime.scene.goal_ids:
                    await ws.send_json({"type": "error", "message": f"unknown goal id {goal!r}"})
                else:
                    await ws.send_json(runtime.heatmap(gid, session.belief))
                return False
            await ws.send_json({"type": "error", "message": f"unknown message type {mtype!r}"})
            return False

        try:
            if lockstep:
                while True:
                    msg = await ws.receive_json()
                    await handle(msg)
            else:
                dt = runtime.scene.workspace.dt
                pending: list[dict | None] = [None]

                async def ticker_loop():
                    while True:
                        await asyncio.sleep(dt)
                        frame_input, pending[0] = pending[0], None
                        try:
                            frame = session.tick(frame_input)
                        except ValueError as exc:
                            await ws.send_json({"type": "error", "message": str(exc)})
                            frame = session.tick(None)
                        await ws.send_json(frame)

                task = asyncio.create_task(ticker_loop())
                try:
                    while True:
                        msg = await ws.receive_json()
                        if msg.get("type") == "input":
                            pending[0] = msg
                        else:
                            await handle(msg)
                finally:
                    task.cancel()
        except WebSocketDisconnect:
            return

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
