/**
 * Wire protocol types and frame helpers.
 *
 * These mirror the JSON the session service emits. The client never invents
 * state: everything rendered comes from a ServerFrame or a metadata/heatmap
 * payload, and the only way to affect the simulation is a client message.
 */

export interface TargetMeta {
  id: string;
  pos: number[];
}

export interface GoalMeta {
  id: string;
  name: string;
  targets: TargetMeta[];
}

export interface SceneMetadata {
  dims: number;
  bounds: [number[], number[]];
  dt: number;
  v_max: number;
  epsilon: number;
  start: number[];
  goals: GoalMeta[];
  methods: string[];
  scene_hash: string;
}

export interface ServerFrame {
  type: "frame";
  tick: number;
  x: number[];
  u: number[];
  a: number[];
  belief: Record<string, number>;
  confidence: number;
  status: "running" | "captured";
  values: Record<string, number>;
}

export interface HeatmapPayload {
  type: "heatmap";
  goal: string;
  bounds: [number[], number[]];
  rows: number;
  cols: number;
  values: number[];
}

export interface SessionMessage {
  type: "session";
  session: string;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export interface AckMessage {
  type: "ack";
  method: string;
}

export type ServerMessage =
  | ServerFrame
  | HeatmapPayload
  | SessionMessage
  | ErrorMessage
  | AckMessage;

export interface InputMessage {
  type: "input";
  vec: number[];
  capture: boolean;
}

export interface SetMethodMessage {
  type: "set_method";
  method: string;
}

export type ClientMessage =
  | InputMessage
  | SetMethodMessage
  | { type: "reset" }
  | { type: "heatmap"; goal: string };

/** Bars shown in the belief panel, in goal order. Values are the server's
 * probabilities rounded for display; rounding drift is pushed into the last
 * bar so the displayed numbers always sum to exactly 1 at display precision.
 */
export function beliefBars(
  frame: Pick<ServerFrame, "belief">,
  goalIds: string[],
  decimals = 3,
): { goalId: string; fraction: number; label: string }[] {
  const scale = 10 ** decimals;
  const rounded = goalIds.map((g) => Math.round((frame.belief[g] ?? 0) * scale));
  const drift = scale - rounded.reduce((s, v) => s + v, 0);
  if (rounded.length > 0) {
    rounded[rounded.length - 1] += drift;
  }
  return goalIds.map((g, i) => ({
    goalId: g,
    fraction: rounded[i] / scale,
    label: (rounded[i] / scale).toFixed(decimals),
  }));
}

/** Row-major cell index of the heatmap's minimum value (the "darkest" cell in
 * the cost rendering) and the workspace position of that cell's center. */
export function darkestCell(payload: HeatmapPayload): {
  row: number;
  col: number;
  center: [number, number];
} {
  let best = 0;
  for (let i = 1; i < payload.values.length; i++) {
    if (payload.values[i] < payload.values[best]) best = i;
  }
  const row = Math.floor(best / payload.cols);
  const col = best % payload.cols;
  const [lo, hi] = payload.bounds;
  const hx = (hi[0] - lo[0]) / payload.rows;
  const hy = (hi[1] - lo[1]) / payload.cols;
  return { row, col, center: [lo[0] + (row + 0.5) * hx, lo[1] + (col + 0.5) * hy] };
}

/** Heatmap cell size in workspace units, as [hx, hy]. */
export function cellSize(payload: HeatmapPayload): [number, number] {
  const [lo, hi] = payload.bounds;
  return [(hi[0] - lo[0]) / payload.rows, (hi[1] - lo[1]) / payload.cols];
}

export function isServerFrame(msg: ServerMessage): msg is ServerFrame {
  return msg.type === "frame";
}
