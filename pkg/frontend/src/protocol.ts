// Wire protocol codec: JSON text frames, one message per frame.
// Mirrors the server schema; every frame carries the protocol version.

export const PROTOCOL_VERSION = 1;

export type Kind =
  | "hello"
  | "scenario"
  | "state"
  | "cues"
  | "input"
  | "event"
  | "metrics";

const KINDS: ReadonlySet<string> = new Set([
  "hello", "scenario", "state", "cues", "input", "event", "metrics",
]);

export interface WireMessage {
  kind: Kind;
  payload: Record<string, unknown>;
  tick?: number;
  ts_ms?: number;
}

export class ProtocolError extends Error {}

export function encode(msg: WireMessage): string {
  if (!KINDS.has(msg.kind)) throw new ProtocolError(`unknown kind ${msg.kind}`);
  if (msg.kind === "input" && msg.ts_ms === undefined) {
    throw new ProtocolError("input message needs a client timestamp");
  }
  const out: Record<string, unknown> = {
    v: PROTOCOL_VERSION,
    kind: msg.kind,
    payload: msg.payload,
  };
  if (msg.tick !== undefined) out.tick = msg.tick;
  if (msg.ts_ms !== undefined) out.ts_ms = msg.ts_ms;
  return JSON.stringify(out);
}

export function decode(text: string): WireMessage {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`malformed frame: ${err}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new ProtocolError("frame must be a JSON object");
  }
  if (raw.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(
      `protocol version mismatch: got ${raw.v}, client speaks ${PROTOCOL_VERSION}`,
    );
  }
  const kind = raw.kind as string;
  if (!KINDS.has(kind)) throw new ProtocolError(`unknown kind ${kind}`);
  if ((kind === "state" || kind === "cues") && typeof raw.tick !== "number") {
    throw new ProtocolError(`${kind} message needs a tick`);
  }
  return {
    kind: kind as Kind,
    payload: (raw.payload ?? {}) as Record<string, unknown>,
    tick: raw.tick as number | undefined,
    ts_ms: raw.ts_ms as number | undefined,
  };
}
