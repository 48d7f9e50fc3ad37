/**
 * Websocket connection with session resume and exponential-backoff reconnect.
 *
 * The socket layer only enqueues messages; consumers read the latest frame.
 * On reconnect the stored session id is put back on the URL so the server
 * resumes the same session.
 */

import type { ClientMessage, ServerFrame, ServerMessage } from "./protocol.js";

export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 8000;

/** Delay before reconnect attempt `attempt` (0-based): base * 2^attempt, capped. */
export function backoffDelay(
  attempt: number,
  baseMs = BACKOFF_BASE_MS,
  capMs = BACKOFF_CAP_MS,
): number {
  return Math.min(baseMs * 2 ** attempt, capMs);
}

/** Websocket URL for a session, preserving the session id across reconnects. */
export function sessionUrl(base: string, sessionId: string | null, method: string | null): string {
  const params = new URLSearchParams();
  if (sessionId) params.set("session", sessionId);
  else if (method) params.set("method", method);
  const qs = params.toString();
  return qs ? `${base}?${qs}` : base;
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onFrame?: (frame: ServerFrame) => void;
  onMessage?: (msg: ServerMessage) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
}

export class Connection {
  sessionId: string | null = null;
  latestFrame: ServerFrame | null = null;
  private socket: SocketLike | null = null;
  private attempt = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly events: ConnectionEvents,
    private readonly factory: SocketFactory,
    private readonly method: string | null = null,
  ) {}

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
    this.socket = null;
  }

  send(msg: ClientMessage): void {
    this.socket?.send(JSON.stringify(msg));
  }

  private open(): void {
    this.events.onStatus?.("connecting");
    const socket = this.factory(sessionUrl(this.baseUrl, this.sessionId, this.method));
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.events.onStatus?.("open");
    };
    socket.onmessage = (ev) => this.handle(JSON.parse(ev.data) as ServerMessage);
    socket.onclose = () => {
      this.events.onStatus?.("closed");
      if (this.stopped) return;
      const delay = backoffDelay(this.attempt);
      this.attempt += 1;
      this.timer = setTimeout(() => this.open(), delay);
    };
  }

  private handle(msg: ServerMessage): void {
    if (msg.type === "session") {
      this.sessionId = msg.session;
    } else if (msg.type === "frame") {
      this.latestFrame = msg;
      this.events.onFrame?.(msg);
    }
    this.events.onMessage?.(msg);
  }
}
