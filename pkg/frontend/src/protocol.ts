// Wire contract of the session service: JSON over WebSocket plus a couple
// of REST endpoints. The explorer never simulates anything; every rendered
// proxy/HIP/force value comes from a snapshot parsed here.

export interface RoiWindow {
  level: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Snapshot {
  type: "snapshot";
  seq: number;
  t_ms: number;
  hip: [number, number, number];
  proxy: [number, number, number];
  force: [number, number, number];
  in_contact: boolean;
  converged: boolean;
  roi: RoiWindow;
  mapping_version: number;
  tick_mean_us: number;
  tick_p99_us: number;
}

export interface Ack {
  type: "ack";
  cmd_id: number | null;
  accepted: boolean;
  seq: number;
  reason?: string;
}

export interface ServiceError {
  type: "error";
  code: string;
  message: string;
  cmd_id?: number | null;
}

export type ServerMessage = Snapshot | Ack | ServiceError;

export interface AssetInfo {
  id: string;
  name: string;
  width: number;
  height: number;
  spacing: number;
  levels: number;
}

export interface SessionInfo {
  session_id: string;
  snapshot_hz: number;
  workspace_extent: number;
  asset: AssetInfo;
  roi: RoiWindow;
  seq: number;
}

function vec3(v: unknown): v is [number, number, number] {
  return Array.isArray(v) && v.length === 3 && v.every((c) => typeof c === "number");
}

function roi(v: unknown): v is RoiWindow {
  if (typeof v !== "object" || v === null) return false;
  const r = v as Record<string, unknown>;
  return ["level", "x", "y", "w", "h"].every((k) => typeof r[k] === "number");
}

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "snapshot":
      if (
        typeof msg.seq === "number" &&
        typeof msg.t_ms === "number" &&
        vec3(msg.hip) &&
        vec3(msg.proxy) &&
        vec3(msg.force) &&
        typeof msg.in_contact === "boolean" &&
        roi(msg.roi) &&
        typeof msg.mapping_version === "number"
      ) {
        return {
          type: "snapshot",
          seq: msg.seq,
          t_ms: msg.t_ms,
          hip: msg.hip,
          proxy: msg.proxy,
          force: msg.force,
          in_contact: msg.in_contact,
          converged: msg.converged !== false,
          roi: msg.roi,
          mapping_version: msg.mapping_version,
          tick_mean_us: typeof msg.tick_mean_us === "number" ? msg.tick_mean_us : 0,
          tick_p99_us: typeof msg.tick_p99_us === "number" ? msg.tick_p99_us : 0,
        };
      }
      return null;
    case "ack":
      if (typeof msg.seq === "number") {
        return {
          type: "ack",
          cmd_id: typeof msg.cmd_id === "number" ? msg.cmd_id : null,
          accepted: msg.accepted !== false,
          seq: msg.seq,
          reason: typeof msg.reason === "string" ? msg.reason : undefined,
        };
      }
      return null;
    case "error":
      return {
        type: "error",
        code: String(msg.code ?? "unknown"),
        message: String(msg.message ?? ""),
        cmd_id: typeof msg.cmd_id === "number" ? msg.cmd_id : null,
      };
    default:
      return null;
  }
}

export function setHipCommand(cmdId: number, x: number, y: number, z: number): string {
  return JSON.stringify({ type: "set_hip", cmd_id: cmdId, x, y, z });
}

export function setRoiCommand(cmdId: number, roiWindow: RoiWindow): string {
  return JSON.stringify({ type: "set_roi", cmd_id: cmdId, ...roiWindow });
}

export function setLevelCommand(cmdId: number, delta: number): string {
  return JSON.stringify({ type: "set_level", cmd_id: cmdId, delta });
}

export function forceMagnitude(force: [number, number, number]): number {
  return Math.hypot(force[0], force[1], force[2]);
}
