"""Real-time session host.

One simulation thread owns all mutable state and runs the 240 Hz loop
against wall clock with absolute deadlines; WebSocket I/O lives on the
asyncio side and talks to the simulation only through thread-safe handoffs
(latest-input holder in, per-tick snapshots out). State and cues stream at a
decimated rate (default 60 Hz); the full-rate log is kept server side.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time

import numpy as np
import websockets

from .. import session as session_mod
from ..config import Config
from .protocol import PROTOCOL_VERSION, ProtocolError, WireMessage, decode, encode, now_ms

DEFAULT_BIND = "127.0.0.1:8700"
STREAM_DIVISOR = 4            # 240 Hz -> 60 Hz
STALE_INPUT_MS = 1000
TICK_TOLERANCE_S = 0.002


class InputHolder:
    """Latest-value-wins pattern-angle input shared with the sim thread."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = None
        self._fresh = False

    def offer(self, u_arms: float, u_legs: float):
        with self._lock:
            self._value = (float(u_arms), float(u_legs))
            self._fresh = True

    def poll(self, sim_time: float):
        with self._lock:
            if not self._fresh:
                return None
            self._fresh = False
            return self._value


class LiveSession:
    """Wall-clock paced episode with streaming taps."""

    def __init__(self, scenario: session_mod.Scenario, config: Config,
                 realtime: bool = True):
        self.scenario = scenario
        self.config = config
        self.realtime = realtime
        self.inputs = InputHolder()
        self.subscribers = []          # callables(frame_dict)
        self._lock = threading.Lock()
        self.log = None
        self.metrics = None
        self.on_time_ratio = None
        self._late = 0
        self._ticks = 0
        self._started = None
        self._dt = 1.0 / config.sample_rate()

    def subscribe(self, fn):
        with self._lock:
            self.subscribers.append(fn)

    def _emit(self, frame):
        with self._lock:
            subs = list(self.subscribers)
        for fn in subs:
            fn(frame)

    def _on_tick(self, k, row, cue_posture, executed):
        if self.realtime:
            deadline = self._started + (k + 1) * self._dt
            now = time.perf_counter()
            if now < deadline:
                time.sleep(deadline - now)
            elif now - deadline > TICK_TOLERANCE_S:
                self._late += 1
        self._ticks += 1
        if k % STREAM_DIVISOR == 0:
            record = dict(zip(session_mod.COLUMNS, row))
            self._emit({
                "tick": k,
                "record": record,
                "cue_posture": [round(float(v), 6) for v in cue_posture],
                "executed_posture": [round(float(v), 6) for v in executed],
            })

    def run(self):
        self._started = time.perf_counter()
        input_source = self.inputs if self.scenario.external_input else None
        self.log = session_mod.run_episode(self.scenario, self.config,
                                           input_source=input_source,
                                           on_tick=self._on_tick)
        self.metrics = session_mod.compute_metrics(self.log)
        self.on_time_ratio = 1.0 - (self._late / self._ticks) if self._ticks else 1.0
        return self.log


class Server:
    """WebSocket front end for one live session."""

    def __init__(self, live: LiveSession, path_waypoints=None):
        self.live = live
        self.clients = {}              # websocket -> role
        self.pilot = None
        self.loop = None
        self.queues = {}
        self.path_waypoints = path_waypoints or []
        self._sim_thread = None
        self._done = asyncio.Event()

    def _scenario_message(self):
        sc = self.live.scenario
        return WireMessage(kind="scenario", payload={
            "name": sc.name,
            "kind": sc.kind,
            "start": list(sc.start),
            "target": list(sc.target),
            "corridor_half_width": sc.corridor_half_width,
            "corridor": [[float(x), float(y)] for x, y in self.path_waypoints],
            "capture_radius": sc.capture_radius,
            "timeout": sc.timeout,
            "external_input": sc.external_input,
            "config_hash": self.live.config.config_hash,
            "rate_hz": self.live.config.sample_rate(),
            "stream_hz": self.live.config.sample_rate() / STREAM_DIVISOR,
        })

    def _broadcast_frame(self, frame):
        # called from the sim thread; hop to the asyncio loop
        if self.loop is None:
            return
        self.loop.call_soon_threadsafe(self._fanout, frame)

    def _fanout(self, frame):
        record = frame["record"]
        state_msg = encode(WireMessage(kind="state", tick=frame["tick"], payload={
            "record": record}, timestamp_ms=now_ms()))
        cues_msg = encode(WireMessage(kind="cues", tick=frame["tick"], payload={
            "cue_posture": frame["cue_posture"],
            "executed_posture": frame["executed_posture"],
            "u_cue": [record["u_arms"], record["u_legs"]],
            "u_exec": [record["u_exec_arms"], record["u_exec_legs"]],
            "arrows": {
                "origin": [record["arrow_origin_x"], record["arrow_origin_y"]],
                "predicted_heading": record["arrow_pred_heading"],
                "desired_heading": record["arrow_des_heading"],
            },
        }, timestamp_ms=now_ms()))
        for queue in list(self.queues.values()):
            self._offer(queue, state_msg)
            self._offer(queue, cues_msg)

    @staticmethod
    def _offer(queue, item):
        try:
            queue.put_nowait(item)
        except asyncio.QueueFull:
            try:
                queue.get_nowait()
                queue.put_nowait(item)
            except asyncio.QueueEmpty:
                pass

    async def _sender(self, ws, queue):
        while True:
            item = await queue.get()
            await ws.send(item)

    async def handle(self, ws):
        queue = asyncio.Queue(maxsize=256)
        sender = None
        role = None
        try:
            raw = await ws.recv()
            try:
                hello = decode(raw)
                if hello.kind != "hello":
                    raise ProtocolError("first message must be hello")
            except ProtocolError as exc:
                await ws.send(json.dumps({
                    "v": PROTOCOL_VERSION, "kind": "hello",
                    "payload": {"accepted": False, "error": str(exc),
                                "server_versions": [PROTOCOL_VERSION]},
                }))
                return
            wanted = hello.payload.get("role", "observer")
            if wanted == "pilot" and self.pilot is None:
                role = "pilot"
                self.pilot = ws
            else:
                role = "observer"
            self.clients[ws] = role
            self.queues[ws] = queue
            await ws.send(encode(WireMessage(kind="hello", payload={
                "accepted": True, "role": role,
                "server_versions": [PROTOCOL_VERSION]}, timestamp_ms=now_ms())))
            await ws.send(encode(self._scenario_message()))
            sender = asyncio.ensure_future(self._sender(ws, queue))

            async for raw in ws:
                try:
                    msg = decode(raw)
                except ProtocolError as exc:
                    await ws.send(encode(WireMessage(
                        kind="event", payload={"level": "warn", "message": str(exc)},
                        timestamp_ms=now_ms())))
                    continue
                if msg.kind != "input":
                    continue
                if now_ms() - msg.timestamp_ms > STALE_INPUT_MS:
                    await ws.send(encode(WireMessage(
                        kind="event",
                        payload={"level": "warn",
                                 "message": f"stale input discarded ({now_ms() - msg.timestamp_ms} ms old)"},
                        timestamp_ms=now_ms())))
                    continue
                if self.clients.get(ws) == "pilot":
                    self.live.inputs.offer(msg.payload.get("u_arms", 0.0),
                                           msg.payload.get("u_legs", 0.0))
        finally:
            if sender is not None:
                sender.cancel()
            self.queues.pop(ws, None)
            self.clients.pop(ws, None)
            if self.pilot is ws:
                self.pilot = None

    def _run_sim(self):
        try:
            self.live.subscribe(self._broadcast_frame)
            self.live.run()
        finally:
            if self.loop is not None:
                self.loop.call_soon_threadsafe(self._finish)

    def _finish(self):
        if self.live.metrics is not None:
            msg = encode(WireMessage(kind="metrics", payload={
                "metrics": _jsonable(self.live.metrics.as_dict()),
                "outcome": self.live.log.outcome,
                "on_time_ratio": self.live.on_time_ratio,
            }, timestamp_ms=now_ms()))
            for queue in self.queues.values():
                self._offer(queue, msg)
        self._done.set()

    async def serve(self, host: str, port: int, ready: asyncio.Event | None = None):
        self.loop = asyncio.get_running_loop()
        async with websockets.serve(self.handle, host, port, max_queue=None):
            self._sim_thread = threading.Thread(target=self._run_sim, daemon=True)
            self._sim_thread.start()
            if ready is not None:
                ready.set()
            await self._done.wait()
            # drain the outbound queues before closing
            await asyncio.sleep(0.2)


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = float(v)
        out[k] = v
    return out


def serve_blocking(scenario, config, bind: str = DEFAULT_BIND, realtime: bool = True):
    """Run one live session; returns (log, metrics, on_time_ratio)."""
    host, _, port = bind.rpartition(":")
    live = LiveSession(scenario, config, realtime=realtime)
    waypoints = []
    if scenario.kind == "approach":
        from ..guidance import plan_path
        path = plan_path(scenario.start, scenario.target,
                         cruise_speed=scenario.cruise_speed, accel=scenario.accel,
                         approach_speed=scenario.approach_speed,
                         corridor_half_width=scenario.corridor_half_width,
                         via=scenario.via)
        waypoints = path.waypoints.tolist()
    server = Server(live, path_waypoints=waypoints)
    asyncio.run(server.serve(host or "127.0.0.1", int(port)))
    return live.log, live.metrics, live.on_time_ratio
