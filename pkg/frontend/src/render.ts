/**
 * Canvas rendering: workspace, heatmap underlay, targets, robot with trail,
 * input/assistance arrows, belief bars. The math helpers are pure and the
 * drawing functions take a 2d context, so everything above the context call
 * is testable headless.
 *
 * Rendering interpolates the robot position between server ticks for display
 * smoothness only; logic state is always the last server frame.
 */

import type { HeatmapPayload, SceneMetadata, ServerFrame } from "./protocol.js";

export interface Viewport {
  width: number;
  height: number;
  bounds: [number[], number[]];
}

/** Workspace position -> canvas pixel. Canvas y is flipped. */
export function worldToCanvas(view: Viewport, pos: number[]): [number, number] {
  const [lo, hi] = view.bounds;
  const fx = (pos[0] - lo[0]) / (hi[0] - lo[0]);
  const fy = (pos[1] - lo[1]) / (hi[1] - lo[1]);
  return [fx * view.width, (1 - fy) * view.height];
}

export function canvasToWorld(view: Viewport, px: number, py: number): [number, number] {
  const [lo, hi] = view.bounds;
  return [
    lo[0] + (px / view.width) * (hi[0] - lo[0]),
    lo[1] + (1 - py / view.height) * (hi[1] - lo[1]),
  ];
}

/** Display position between the previous and current server frame,
 * t in [0, 1]. Display-only; never fed back into logic. */
export function interpolate(prev: number[], next: number[], t: number): number[] {
  const k = Math.max(0, Math.min(1, t));
  return next.map((v, i) => prev[i] + (v - prev[i]) * k);
}

/** Direct-teleop velocity of the user's input: u scaled by v_max, norm-capped. */
export function directTeleop(u: number[], vMax: number): number[] {
  const vel = u.map((c) => c * vMax);
  const speed = Math.hypot(...vel);
  if (speed > vMax) return vel.map((c) => (c * vMax) / speed);
  return vel;
}

/** The assistance component of the executed action: a - D(u). Zero when the
 * robot did exactly what the user asked (direct method). */
export function assistVector(frame: Pick<ServerFrame, "u" | "a">, vMax: number): number[] {
  const du = directTeleop(frame.u, vMax);
  return frame.a.map((c, i) => c - du[i]);
}

/** Map heatmap cost values to display intensity in [0, 1]; the minimum cost
 * (the target) is darkest (0). */
export function heatmapIntensities(values: number[]): number[] {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  const span = max - min;
  if (span === 0) return values.map(() => 0);
  return values.map((v) => (v - min) / span);
}

const GOAL_COLORS = ["#2b8cbe", "#e6550d", "#31a354", "#756bb1", "#d62728", "#8c6d31"];

export function goalColor(index: number): string {
  return GOAL_COLORS[index % GOAL_COLORS.length];
}

export function drawHeatmap(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  payload: HeatmapPayload,
): void {
  const intensities = heatmapIntensities(payload.values);
  const cw = view.width / payload.rows;
  const ch = view.height / payload.cols;
  for (let r = 0; r < payload.rows; r++) {
    for (let c = 0; c < payload.cols; c++) {
      const v = intensities[r * payload.cols + c];
      const shade = Math.round(40 + v * 215); // dark = low cost
      ctx.fillStyle = `rgb(${shade},${shade},${shade})`;
      // row indexes x, col indexes y; flip y for canvas
      ctx.fillRect(r * cw, view.height - (c + 1) * ch, cw + 1, ch + 1);
    }
  }
}

function drawArrow(
  ctx: CanvasRenderingContext2D,
  from: [number, number],
  to: [number, number],
  color: string,
): void {
  const dx = to[0] - from[0];
  const dy = to[1] - from[1];
  const len = Math.hypot(dx, dy);
  if (len < 1) return;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2.5;
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  const angle = Math.atan2(dy, dx);
  const size = Math.min(8, len / 2);
  ctx.beginPath();
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - size * Math.cos(angle - 0.4), to[1] - size * Math.sin(angle - 0.4));
  ctx.lineTo(to[0] - size * Math.cos(angle + 0.4), to[1] - size * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

export interface SceneRenderState {
  meta: SceneMetadata;
  frame: ServerFrame;
  displayPos: number[];
  trail: number[][];
  heatmap: HeatmapPayload | null;
}

export const USER_ARROW_COLOR = "#1f77b4";
export const ASSIST_ARROW_COLOR = "#d62728";
const ARROW_SCALE = 0.9; // seconds of travel the arrow visualizes

export function drawScene(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  state: SceneRenderState,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  if (state.heatmap) {
    drawHeatmap(ctx, view, state.heatmap);
  } else {
    ctx.fillStyle = "#f4f4f4";
    ctx.fillRect(0, 0, view.width, view.height);
  }

  // trail
  ctx.strokeStyle = "rgba(31,119,180,0.45)";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  state.trail.forEach((p, i) => {
    const [px, py] = worldToCanvas(view, p);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();

  // targets, colored per goal
  state.meta.goals.forEach((goal, gi) => {
    ctx.fillStyle = goalColor(gi);
    for (const target of goal.targets) {
      const [px, py] = worldToCanvas(view, target.pos);
      ctx.beginPath();
      ctx.arc(px, py, 7, 0, 2 * Math.PI);
      ctx.fill();
    }
  });

  // robot
  const robot = worldToCanvas(view, state.displayPos);
  ctx.fillStyle = state.frame.status === "captured" ? "#31a354" : "#111";
  ctx.beginPath();
  ctx.arc(robot[0], robot[1], 6, 0, 2 * Math.PI);
  ctx.fill();

  // arrows: user input and assistance component, in workspace units
  const vMax = state.meta.v_max;
  const du = directTeleop(state.frame.u, vMax);
  const assist = assistVector(state.frame, vMax);
  const tipU = worldToCanvas(view, [
    state.displayPos[0] + du[0] * ARROW_SCALE,
    state.displayPos[1] + du[1] * ARROW_SCALE,
  ]);
  const tipA = worldToCanvas(view, [
    state.displayPos[0] + assist[0] * ARROW_SCALE,
    state.displayPos[1] + assist[1] * ARROW_SCALE,
  ]);
  drawArrow(ctx, robot, tipU, USER_ARROW_COLOR);
  drawArrow(ctx, robot, tipA, ASSIST_ARROW_COLOR);
}
