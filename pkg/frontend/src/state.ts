// Single view-state store updated by network events; the render loop reads
// it and never mutates it. The newest received tick always wins.

import { WireMessage } from "./protocol.js";

export interface TickRecord {
  time: number;
  px: number; py: number; pz: number;
  vx: number; vy: number; vz: number;
  qw: number; qx: number; qy: number; qz: number;
  omega_com: number; v_com: number;
  omega_meas: number; v_meas: number;
  u_arms: number; u_legs: number;
  u_exec_arms: number; u_exec_legs: number;
  cross_track: number; inside: number; progress: number;
  [key: string]: number;
}

export interface CueData {
  cuePosture: number[];
  executedPosture: number[];
  uCue: [number, number];
  uExec: [number, number];
  arrowOrigin: [number, number];
  predictedHeading: number;
  desiredHeading: number;
}

export interface ScenarioInfo {
  name: string;
  start: [number, number];
  target: [number, number];
  corridor: [number, number][];
  corridorHalfWidth: number;
  captureRadius: number;
  externalInput: boolean;
  streamHz: number;
}

export interface ViewState {
  connection: "connecting" | "connected" | "rejected" | "closed";
  role: string | null;
  scenario: ScenarioInfo | null;
  lastTick: number;
  lastStateAtMs: number;
  record: TickRecord | null;
  cues: CueData | null;
  events: string[];
  metrics: Record<string, unknown> | null;
  outcome: string | null;
}

export function initialView(): ViewState {
  return {
    connection: "connecting",
    role: null,
    scenario: null,
    lastTick: -1,
    lastStateAtMs: -Infinity,
    record: null,
    cues: null,
    events: [],
    metrics: null,
    outcome: null,
  };
}

export const STALE_MS = 1000;

export function isStale(view: ViewState, nowMs: number): boolean {
  return view.record !== null && nowMs - view.lastStateAtMs > STALE_MS;
}

export function reduce(view: ViewState, msg: WireMessage, nowMs: number): void {
  switch (msg.kind) {
    case "hello": {
      const accepted = msg.payload.accepted as boolean;
      view.connection = accepted ? "connected" : "rejected";
      view.role = (msg.payload.role as string) ?? null;
      break;
    }
    case "scenario": {
      const p = msg.payload as Record<string, any>;
      view.scenario = {
        name: p.name,
        start: p.start,
        target: p.target,
        corridor: p.corridor ?? [],
        corridorHalfWidth: p.corridor_half_width ?? 10,
        captureRadius: p.capture_radius ?? 2,
        externalInput: !!p.external_input,
        streamHz: p.stream_hz ?? 60,
      };
      break;
    }
    case "state": {
      const tick = msg.tick ?? -1;
      if (tick < view.lastTick) break;          // the newest tick wins
      view.lastTick = tick;
      view.lastStateAtMs = nowMs;
      view.record = msg.payload.record as TickRecord;
      break;
    }
    case "cues": {
      const tick = msg.tick ?? -1;
      if (tick < view.lastTick) break;
      const p = msg.payload as Record<string, any>;
      view.cues = {
        cuePosture: p.cue_posture,
        executedPosture: p.executed_posture,
        uCue: p.u_cue,
        uExec: p.u_exec,
        arrowOrigin: p.arrows.origin,
        predictedHeading: p.arrows.predicted_heading,
        desiredHeading: p.arrows.desired_heading,
      };
      break;
    }
    case "event": {
      view.events.push(String(msg.payload.message ?? ""));
      if (view.events.length > 8) view.events.shift();
      break;
    }
    case "metrics": {
      view.metrics = msg.payload.metrics as Record<string, unknown>;
      view.outcome = (msg.payload.outcome as string) ?? null;
      break;
    }
  }
}

export function bodyYaw(record: TickRecord): number {
  // heading of the body x-axis from the body->inertial quaternion
  const { qw, qx, qy, qz } = record;
  const fx = 1 - 2 * (qy * qy + qz * qz);
  const fy = 2 * (qx * qy + qw * qz);
  return Math.atan2(fy, fx);
}
