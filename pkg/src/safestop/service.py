"""Live teleoperation websocket service.

One simulation loop is the single writer; websocket clients exchange
JSON text messages ("proto": 1) with strictly increasing sequence numbers
per direction. The latest client command is applied each tick with a
zero-order hold that decays to zero after a timeout; snapshots broadcast
at a fixed cadence and events are pushed as they happen.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import math

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .runner import RunConfig, build_scenario
from .simulator import OperatorCommand, World
from .trajectory import sample_positions

log = logging.getLogger(__name__)

PROTO_VERSION = 1
SNAPSHOT_PERIOD = 0.05      # sim seconds between snapshots (20 Hz)
MAX_OBSTACLES = 50
TRAJECTORY_SAMPLE_DT = 0.1  # s, spacing of pushed stop-trajectory samples
UNPACED_SLEEP = 0.002       # s, yield period when not wall-clock paced

CLIENT_TYPES = {"command", "reset", "toggle_monitoring"}


class ProtocolError(Exception):
    pass


class TeleopSession:
    """Single simulated vehicle shared by all connected clients."""

    def __init__(self, cfg: RunConfig, paced: bool = True):
        self.cfg = cfg
        self.paced = paced
        self.scenario = build_scenario(cfg, cfg.seed_base)
        self.clients: list[WebSocket] = []
        self._send_seq = 0
        self._command: OperatorCommand | None = None
        self._events_flushed = 0
        self._next_snapshot = 0.0
        self.reset()

    def reset(self) -> None:
        self.world = World(
            self.scenario, self.cfg.monitor, self.cfg.escape,
            self.cfg.feasibility, self.cfg.sim,
            monitoring_enabled=self.cfg.monitoring_enabled)
        self._command = None
        self._events_flushed = 0
        self._next_snapshot = 0.0

    # -- outgoing ---------------------------------------------------------

    def _next_seq(self) -> int:
        self._send_seq += 1
        return self._send_seq

    def snapshot(self) -> dict:
        w = self.world
        s = w.state
        near = w.obstacle_map.k_nearest(
            s.position, MAX_OBSTACLES, w.monitor_cfg.query_radius)
        samples = []
        traj = w.active_trajectory
        if traj is not None and traj.duration > 0:
            ts, pos = sample_positions(traj, TRAJECTORY_SAMPLE_DT)
            samples = [[float(t)] + [float(x) for x in p]
                       for t, p in zip(ts, pos)]
        cost = w._last_cost_min
        return {
            "proto": PROTO_VERSION,
            "seq": self._next_seq(),
            "type": "snapshot",
            "t": w.t,
            "mode": w.mode.value,
            "monitoring_enabled": w.monitoring_enabled,
            "state": {
                "position": [float(x) for x in s.position],
                "velocity": [float(x) for x in s.velocity],
                "yaw": float(s.yaw),
                "yaw_rate": float(s.yaw_rate),
            },
            "stop_cost_min": None if cost is None else float(cost),
            "nearest_obstacles": [[float(x) for x in p] for p, _ in near],
            "stop_trajectory": samples,
            "finished": w.finished,
        }

    def _pending_events(self) -> list[dict]:
        fresh = self.world.events[self._events_flushed:]
        self._events_flushed = len(self.world.events)
        return [{"proto": PROTO_VERSION, "seq": self._next_seq(),
                 "type": "event", **ev} for ev in fresh]

    async def _broadcast(self, message: dict) -> None:
        for ws in list(self.clients):
            try:
                await ws.send_json(message)
            except Exception:
                with contextlib.suppress(ValueError):
                    self.clients.remove(ws)

    # -- incoming ---------------------------------------------------------

    def handle_message(self, msg: dict, last_seq: int | None) -> int:
        """Validate and apply one client message; returns its seq."""
        if not isinstance(msg, dict) or msg.get("proto") != PROTO_VERSION:
            raise ProtocolError("missing or unsupported proto version")
        seq = msg.get("seq")
        if not isinstance(seq, int):
            raise ProtocolError("missing sequence number")
        if last_seq is not None and seq <= last_seq:
            raise ProtocolError("sequence number must increase")
        kind = msg.get("type")
        if kind not in CLIENT_TYPES:
            raise ProtocolError(f"unknown message type: {kind!r}")
        if kind == "command":
            cmd = msg.get("command")
            if not isinstance(cmd, dict):
                raise ProtocolError("command payload missing")
            vel = cmd.get("velocity")
            yaw_rate = cmd.get("yaw_rate", 0.0)
            if (not isinstance(vel, (list, tuple)) or len(vel) != 3
                    or not all(isinstance(v, (int, float))
                               and math.isfinite(v) for v in vel)
                    or not isinstance(yaw_rate, (int, float))
                    or not math.isfinite(yaw_rate)):
                raise ProtocolError("command must carry a finite 3-vector "
                                    "velocity and yaw_rate")
            self._command = OperatorCommand(
                np.asarray(vel, dtype=np.float64), float(yaw_rate),
                self.world.t)
        elif kind == "reset":
            self.reset()
        else:
            self.world.monitoring_enabled = not self.world.monitoring_enabled
        return seq

    # -- simulation loop --------------------------------------------------

    def _held_command(self) -> OperatorCommand:
        cmd = self._command
        hold = self.world.sim_cfg.command_hold_timeout
        if cmd is None or self.world.t - cmd.timestamp > hold:
            return OperatorCommand(np.zeros(3), 0.0, self.world.t)
        return cmd

    async def tick(self) -> None:
        if not self.world.finished:
            self.world.step(self._held_command())
        for event in self._pending_events():
            await self._broadcast(event)
        if self.world.t >= self._next_snapshot or self.world.finished:
            self._next_snapshot = self.world.t + SNAPSHOT_PERIOD
            await self._broadcast(self.snapshot())

    async def run(self) -> None:
        while True:
            await self.tick()
            if self.paced or self.world.finished:
                await asyncio.sleep(self.world.sim_cfg.dt)
            else:
                await asyncio.sleep(UNPACED_SLEEP)


def create_app(cfg: RunConfig, paced: bool = True) -> FastAPI:
    session = TeleopSession(cfg, paced=paced)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(session.run())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket):
        await websocket.accept()
        session.clients.append(websocket)
        await websocket.send_json(session.snapshot())
        last_seq: int | None = None
        try:
            while True:
                msg = await websocket.receive_json()
                try:
                    last_seq = session.handle_message(msg, last_seq)
                except ProtocolError as exc:
                    log.warning("protocol violation: %s", exc)
                    await websocket.send_json({
                        "proto": PROTO_VERSION,
                        "seq": session._next_seq(),
                        "type": "error",
                        "notice": str(exc),
                    })
                    await websocket.close(code=1002)
                    return
        except WebSocketDisconnect:
            pass
        finally:
            with contextlib.suppress(ValueError):
                session.clients.remove(websocket)

    return app
