"""Wire protocol: one JSON text frame per message over a WebSocket.

Every message carries the protocol version; state/cues messages carry the
simulation tick they describe, input messages carry the client timestamp in
milliseconds. Unknown kinds and version mismatches are rejected at decode.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

KINDS = ("hello", "scenario", "state", "cues", "input", "event", "metrics")


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class WireMessage:
    kind: str
    payload: dict = field(default_factory=dict)
    tick: int | None = None
    timestamp_ms: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProtocolError(f"unknown message kind {self.kind!r}")
        if self.kind in ("state", "cues") and self.tick is None:
            raise ProtocolError(f"{self.kind} message needs a tick")
        if self.kind == "input" and self.timestamp_ms is None:
            raise ProtocolError("input message needs a client timestamp")


def now_ms() -> int:
    return int(time.time() * 1000)


def encode(msg: WireMessage) -> str:
    out = {"v": PROTOCOL_VERSION, "kind": msg.kind, "payload": msg.payload}
    if msg.tick is not None:
        out["tick"] = msg.tick
    if msg.timestamp_ms is not None:
        out["ts_ms"] = msg.timestamp_ms
    return json.dumps(out)


def decode(text: str) -> WireMessage:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed frame: {exc}") from None
    if not isinstance(raw, dict):
        raise ProtocolError("frame must be a JSON object")
    version = raw.get("v")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(
            f"protocol version mismatch: got {version!r}, server speaks {PROTOCOL_VERSION}"
        )
    kind = raw.get("kind")
    payload = raw.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("payload must be an object")
    return WireMessage(kind=kind, payload=payload,
                       tick=raw.get("tick"), timestamp_ms=raw.get("ts_ms"))
