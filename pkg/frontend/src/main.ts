/**
 * Application entry point: wires the connection, input device, render loop
 * and control panel together. All simulation state is server-authoritative;
 * this file only routes messages and draws.
 */

import { InputDevice, stickVector } from "./joystick.js";
import { Connection } from "./net.js";
import {
  beliefBars,
  type HeatmapPayload,
  type SceneMetadata,
  type ServerFrame,
} from "./protocol.js";
import { drawScene, goalColor, interpolate, type Viewport } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const meta: SceneMetadata = await (await fetch("/api/scene")).json();
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const view: Viewport = { width: canvas.width, height: canvas.height, bounds: meta.bounds };

  const banner = el<HTMLDivElement>("banner");
  const beliefPanel = el<HTMLDivElement>("belief");
  const methodPanel = el<HTMLDivElement>("methods");
  const statusLine = el<HTMLDivElement>("status");

  const device = new InputDevice(meta.dims);
  let heatmap: HeatmapPayload | null = null;
  let prevFrame: ServerFrame | null = null;
  let lastFrame: ServerFrame | null = null;
  let lastFrameAt = 0;
  let currentMethod = meta.methods[0];
  const trail: number[][] = [];

  const wsProto = location.protocol === "https:" ? "wss:" : "ws:";
  const conn = new Connection(
    `${wsProto}//${location.host}/ws`,
    {
      onFrame: (frame) => {
        prevFrame = lastFrame;
        lastFrame = frame;
        lastFrameAt = performance.now();
        trail.push(frame.x);
        if (trail.length > 400) trail.shift();
        renderBelief(frame);
        statusLine.textContent =
          frame.status === "captured"
            ? `captured at tick ${frame.tick}`
            : `tick ${frame.tick} | confidence ${frame.confidence.toFixed(2)}`;
      },
      onMessage: (msg) => {
        if (msg.type === "heatmap") heatmap = msg;
        if (msg.type === "ack") setMethodButtons(msg.method);
        if (msg.type === "error") flashBanner(msg.message);
      },
      onStatus: (status) => {
        banner.hidden = status === "open";
        banner.textContent = status === "open" ? "" : `connection ${status}; retrying`;
      },
    },
    (url) => new WebSocket(url) as unknown as import("./net.js").SocketLike,
  );

  function flashBanner(text: string): void {
    banner.hidden = false;
    banner.textContent = text;
    setTimeout(() => {
      banner.hidden = true;
    }, 3000);
  }

  function renderBelief(frame: ServerFrame): void {
    const goalIds = meta.goals.map((g) => g.id);
    beliefPanel.innerHTML = "";
    for (const [i, bar] of beliefBars(frame, goalIds).entries()) {
      const row = document.createElement("div");
      row.className = "belief-row";
      const name = meta.goals[i].name;
      row.innerHTML =
        `<span class="belief-name">${name}</span>` +
        `<span class="belief-track"><span class="belief-fill" ` +
        `style="width:${(bar.fraction * 100).toFixed(1)}%;background:${goalColor(i)}"></span></span>` +
        `<span class="belief-value">${bar.label}</span>`;
      beliefPanel.appendChild(row);
    }
  }

  function setMethodButtons(active: string): void {
    currentMethod = active;
    for (const button of methodPanel.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.method === active);
    }
  }

  for (const method of meta.methods) {
    const button = document.createElement("button");
    button.textContent = method;
    button.dataset.method = method;
    button.addEventListener("click", () => conn.send({ type: "set_method", method }));
    methodPanel.appendChild(button);
  }
  el<HTMLButtonElement>("reset").addEventListener("click", () => {
    trail.length = 0;
    conn.send({ type: "reset" });
  });
  el<HTMLButtonElement>("capture").addEventListener("pointerdown", () => device.capture.press());
  el<HTMLButtonElement>("capture").addEventListener("pointerup", () => device.capture.release());

  // virtual joystick on a dedicated pad element
  const pad = el<HTMLDivElement>("stick");
  let padPointer: number | null = null;
  pad.addEventListener("pointerdown", (ev) => {
    padPointer = ev.pointerId;
    pad.setPointerCapture(ev.pointerId);
  });
  pad.addEventListener("pointermove", (ev) => {
    if (ev.pointerId !== padPointer) return;
    const rect = pad.getBoundingClientRect();
    const [x, y] = stickVector(
      ev.clientX - (rect.left + rect.width / 2),
      ev.clientY - (rect.top + rect.height / 2),
      rect.width / 2,
    );
    device.setStick(x, y);
  });
  const releasePad = (ev: PointerEvent) => {
    if (ev.pointerId !== padPointer) return;
    padPointer = null;
    device.setStick(0, 0);
  };
  pad.addEventListener("pointerup", releasePad);
  pad.addEventListener("pointercancel", releasePad);

  window.addEventListener("keydown", (ev) => {
    if (!ev.repeat) device.keyDown(ev.code);
  });
  window.addEventListener("keyup", (ev) => device.keyUp(ev.code));

  conn.start();
  conn.send({ type: "heatmap", goal: "belief-weighted" });

  // input loop at the model tick rate
  setInterval(() => {
    conn.send({ type: "input", vec: device.sample(), capture: device.capture.consume() });
  }, meta.dt * 1000);

  // render loop, interpolating between server frames for smoothness
  function render(): void {
    if (lastFrame) {
      const t = (performance.now() - lastFrameAt) / (meta.dt * 1000);
      const displayPos = prevFrame ? interpolate(prevFrame.x, lastFrame.x, t) : lastFrame.x;
      drawScene(ctx as CanvasRenderingContext2D, view, {
        meta,
        frame: lastFrame,
        displayPos,
        trail,
        heatmap,
      });
    }
    requestAnimationFrame(render);
  }
  requestAnimationFrame(render);
  void currentMethod;
}

boot().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.hidden = false;
    banner.textContent = `failed to start: ${err}`;
  }
});
