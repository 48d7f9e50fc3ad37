/**
 * Virtual joystick and keyboard input.
 *
 * The dead zone matches the server's input-snapping dead zone, so what the
 * user sees as "no deflection" is exactly what the predictor treats as the
 * zero input. The capture button is edge-triggered: holding it down sends
 * capture:true on exactly one input frame per press.
 */

export const DEAD_ZONE = 0.1;

export function applyDeadZone(vec: number[], deadZone = DEAD_ZONE): number[] {
  const norm = Math.hypot(...vec);
  if (norm < deadZone) return vec.map(() => 0);
  return vec;
}

export function clampComponents(vec: number[]): number[] {
  return vec.map((v) => Math.max(-1, Math.min(1, v)));
}

/** Stick deflection from a pointer position relative to the stick center,
 * normalized by the stick radius and clamped to the unit disc. */
export function stickVector(dx: number, dy: number, radius: number): [number, number] {
  let x = dx / radius;
  let y = -dy / radius; // screen y grows downward; workspace y grows upward
  const norm = Math.hypot(x, y);
  if (norm > 1) {
    x /= norm;
    y /= norm;
  }
  return [x, y];
}

const KEY_AXES: Record<string, [number, number]> = {
  // [axis index, sign]; WASD on the horizontal plane, QE for height (3-D)
  KeyW: [1, 1],
  KeyS: [1, -1],
  KeyA: [0, -1],
  KeyD: [0, 1],
  KeyE: [2, 1],
  KeyQ: [2, -1],
};

export function keyboardVector(pressed: Set<string>, dims: number): number[] {
  const vec = new Array(dims).fill(0);
  for (const code of pressed) {
    const mapping = KEY_AXES[code];
    if (!mapping) continue;
    const [axis, sign] = mapping;
    if (axis < dims) vec[axis] += sign;
  }
  return clampComponents(vec);
}

export class CaptureButton {
  private held = false;
  private pending = false;

  press(): void {
    if (!this.held) this.pending = true;
    this.held = true;
  }

  release(): void {
    this.held = false;
  }

  /** True exactly once per press, consumed by the input loop. */
  consume(): boolean {
    const fire = this.pending;
    this.pending = false;
    return fire;
  }
}

export class InputDevice {
  private stick: number[] = [0, 0];
  private height = 0;
  private keys = new Set<string>();
  readonly capture = new CaptureButton();

  constructor(readonly dims: number) {}

  setStick(x: number, y: number): void {
    this.stick = [x, y];
  }

  setHeight(h: number): void {
    this.height = Math.max(-1, Math.min(1, h));
  }

  keyDown(code: string): void {
    if (code === "Space") this.capture.press();
    else this.keys.add(code);
  }

  keyUp(code: string): void {
    if (code === "Space") this.capture.release();
    else this.keys.delete(code);
  }

  /** Current input vector after dead-zoning; keyboard overrides an idle stick. */
  sample(): number[] {
    let vec = this.dims === 3 ? [...this.stick, this.height] : [...this.stick];
    if (Math.hypot(...vec) === 0) {
      vec = keyboardVector(this.keys, this.dims);
    }
    return applyDeadZone(clampComponents(vec));
  }
}
