// Wire protocol shared with the simulation service ("proto": 1).
// Every message in either direction carries a strictly increasing
// sequence number; snapshots are the only authority on vehicle state.

export const PROTO_VERSION = 1;

export interface VehicleStateMessage {
  position: [number, number, number];
  velocity: [number, number, number];
  yaw: number;
  yaw_rate: number;
}

export interface Snapshot {
  proto: number;
  seq: number;
  type: "snapshot";
  t: number;
  mode: "TELEOP" | "STOPPING" | "RECOVERY";
  monitoring_enabled: boolean;
  state: VehicleStateMessage;
  stop_cost_min: number | null;
  nearest_obstacles: number[][];
  stop_trajectory: number[][]; // rows of [t, x, y, z]
  finished: boolean;
}

export interface EventMessage {
  proto: number;
  seq: number;
  type: "event";
  event: string;
  t: number;
  [extra: string]: unknown;
}

export interface ErrorMessage {
  proto: number;
  seq: number;
  type: "error";
  notice: string;
}

export type ServerMessage = Snapshot | EventMessage | ErrorMessage;

function isVec3(v: unknown): v is [number, number, number] {
  return Array.isArray(v) && v.length === 3 &&
    v.every((x) => typeof x === "number" && Number.isFinite(x));
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  if (msg.proto !== PROTO_VERSION || typeof msg.seq !== "number") return null;
  if (msg.type === "snapshot") {
    const s = msg.state;
    if (!s || !isVec3(s.position) || !isVec3(s.velocity)) return null;
    if (!Array.isArray(msg.nearest_obstacles)) return null;
    if (!Array.isArray(msg.stop_trajectory)) return null;
    return msg as Snapshot;
  }
  if (msg.type === "event" && typeof msg.event === "string") {
    return msg as EventMessage;
  }
  if (msg.type === "error" && typeof msg.notice === "string") {
    return msg as ErrorMessage;
  }
  return null;
}

// Rejects any message whose sequence number does not advance.
export class SequenceTracker {
  private last = -Infinity;

  accept(seq: number): boolean {
    if (seq <= this.last) return false;
    this.last = seq;
    return true;
  }

  reset(): void {
    this.last = -Infinity;
  }
}

export function commandMessage(
  seq: number,
  velocity: [number, number, number],
  yawRate: number,
  timestamp: number,
): string {
  return JSON.stringify({
    proto: PROTO_VERSION,
    seq,
    type: "command",
    command: { velocity, yaw_rate: yawRate },
    timestamp,
  });
}

export function resetMessage(seq: number): string {
  return JSON.stringify({ proto: PROTO_VERSION, seq, type: "reset" });
}

export function toggleMonitoringMessage(seq: number): string {
  return JSON.stringify({
    proto: PROTO_VERSION,
    seq,
    type: "toggle_monitoring",
  });
}
