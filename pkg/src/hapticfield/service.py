"""Live session service: one engine per client, snapshots over WebSocket.

The haptic loop ticks at a simulated 1 kHz inside an asyncio task; snapshots
are decimated to the configured stream rate (60 Hz by default), mirroring
the split between the haptic and the visual update loops.  Commands arrive
as JSON over the socket and are applied at tick boundaries; HIP targets are
latest-wins, so a slow pointer can never back up the engine.  Each
subscriber holds exactly one pending snapshot (latest-wins): a stalled
client drops frames, the tick owner never waits.

HTTP surface:
  GET  /assets                         list loaded assets
  GET  /assets/{id}/levels/{l}/grid    binary .mhdf of one pyramid level
  POST /sessions                       open a session, start its loop
  WS   /ws/{session_id}                snapshot stream + command channel
"""

from __future__ import annotations

import asyncio
import itertools
import json
import math
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .engine import EngineSession
from .errors import RoiSelectionError
from .fixtures import dome_field, flat_field, relief_field
from .io import fill_holes, load_depth_grid, mhdf_bytes
from .pyramid import DepthPyramid, build_pyramid
from .renderer import RenderParams
from .surface import DepthField
from .workspace import RoiSelection


class Asset:
    def __init__(self, asset_id: str, name: str, field: DepthField, n_levels: int = 3):
        self.id = asset_id
        self.name = name
        self.field = field
        self._n_levels = n_levels
        self._pyramid: Optional[DepthPyramid] = None

    @property
    def pyramid(self) -> DepthPyramid:
        if self._pyramid is None:
            levels = 1
            w, h = self.field.width, self.field.height
            while levels < self._n_levels and w >= 5 and h >= 5:
                w = (w - 1) // 2 + 1
                h = (h - 1) // 2 + 1
                levels += 1
            self._pyramid = build_pyramid(self.field, levels)
        return self._pyramid

    def describe(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "width": self.field.width,
            "height": self.field.height,
            "spacing": self.field.spacing,
            "levels": self.pyramid.n_levels,
        }


def _demo_assets() -> dict[str, Asset]:
    return {
        "flat": Asset("flat", "Flat plane (10 mm)", flat_field(10.0, size=129), 3),
        "dome": Asset("dome", "Convex dome", dome_field(size=129, spacing=1.0, curvature=0.005), 3),
        "relief": Asset("relief", "Rolling relief", relief_field(257, seed=4), 3),
    }


class ParamsIn(BaseModel):
    stiffness_k: float = Field(default=0.5, ge=0.0)
    delta_n: float = Field(default=0.1, gt=0.0)
    eps_surface: float = Field(default=1e-3, gt=0.0)
    eps_converge: float = Field(default=1e-3, gt=0.0)
    max_iters: int = Field(default=50, ge=1)
    tick_budget_us: float = Field(default=1000.0, gt=0.0)

    def to_params(self) -> RenderParams:
        return RenderParams(**self.model_dump())


class WindowIn(BaseModel):
    x: int
    y: int
    w: int
    h: int


class SessionRequest(BaseModel):
    asset_id: str
    params: ParamsIn = ParamsIn()
    level: Optional[int] = None
    window: Optional[WindowIn] = None


class _Subscriber:
    __slots__ = ("latest", "event")

    def __init__(self):
        self.latest: Optional[dict] = None
        self.event = asyncio.Event()

    def push(self, snap: dict) -> None:
        self.latest = snap  # latest-wins: unread frames are simply replaced
        self.event.set()


class SessionRuntime:
    def __init__(self, session_id: str, engine: EngineSession, snapshot_hz: float):
        self.id = session_id
        self.engine = engine
        self.period = 1.0 / snapshot_hz
        self.subscribers: list[_Subscriber] = []
        self.task: Optional[asyncio.Task] = None
        self.closed = False

    async def loop(self) -> None:
        carry = 0.0
        loop = asyncio.get_running_loop()
        last = loop.time()
        while not self.closed:
            await asyncio.sleep(self.period)
            now = loop.time()
            carry += (now - last) * 1000.0
            last = now
            ticks = int(carry)
            carry -= ticks
            # cap the catch-up batch so a long stall cannot livelock the loop
            self.engine.run_ticks(min(ticks, 200))
            snap = self.engine.snapshot().to_dict()
            snap["type"] = "snapshot"
            for sub in self.subscribers:
                sub.push(snap)

    def start(self) -> None:
        self.task = asyncio.create_task(self.loop())

    def stop(self) -> None:
        self.closed = True
        if self.task is not None:
            self.task.cancel()


def create_app(
    asset_dir: Optional[str] = None,
    snapshot_hz: float = 60.0,
    static_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="hapticfield session service")
    assets = _demo_assets()
    if asset_dir:
        for path in sorted(Path(asset_dir).glob("*")):
            if path.suffix.lower() not in (".mhdf", ".csv"):
                continue
            field = fill_holes(load_depth_grid(path))
            assets[path.stem] = Asset(path.stem, path.name, field)
    sessions: dict[str, SessionRuntime] = {}
    ids = itertools.count(1)

    @app.get("/assets")
    def list_assets():
        return [a.describe() for a in assets.values()]

    @app.get("/assets/{asset_id}/levels/{level}/grid")
    def level_grid(asset_id: str, level: int):
        asset = assets.get(asset_id)
        if asset is None:
            raise HTTPException(status_code=404, detail=f"unknown asset {asset_id!r}")
        pyr = asset.pyramid
        if not (0 <= level < pyr.n_levels):
            raise HTTPException(status_code=404, detail=f"level {level} out of range")
        return Response(
            content=mhdf_bytes(pyr.levels[level]), media_type="application/octet-stream"
        )

    @app.post("/sessions")
    async def open_session(req: SessionRequest):
        asset = assets.get(req.asset_id)
        if asset is None:
            raise HTTPException(status_code=404, detail=f"unknown asset {req.asset_id!r}")
        pyr = asset.pyramid
        roi = None
        if req.level is not None or req.window is not None:
            level = req.level if req.level is not None else pyr.n_levels - 1
            if req.window is not None:
                roi = RoiSelection(level=level, x=req.window.x, y=req.window.y,
                                   w=req.window.w, h=req.window.h)
            else:
                grid = pyr.levels[level] if 0 <= level < pyr.n_levels else None
                if grid is None:
                    raise HTTPException(status_code=422, detail=f"level {level} out of range")
                roi = RoiSelection(level=level, x=0, y=0, w=grid.width, h=grid.height)
        try:
            engine = EngineSession(pyr, params=req.params.to_params(), roi=roi)
        except RoiSelectionError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session_id = f"s{next(ids)}"
        runtime = SessionRuntime(session_id, engine, snapshot_hz)
        sessions[session_id] = runtime
        runtime.start()
        snap = engine.snapshot()
        return {
            "session_id": session_id,
            "snapshot_hz": snapshot_hz,
            "workspace_extent": engine.workspace_extent,
            "asset": asset.describe(),
            "roi": snap.to_dict()["roi"],
            "seq": snap.seq,
        }

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        runtime = sessions.pop(session_id, None)
        if runtime is None:
            raise HTTPException(status_code=410, detail="session gone")
        runtime.stop()
        return {"closed": session_id}

    def _handle_command(runtime: SessionRuntime, msg: dict) -> dict:
        engine = runtime.engine
        cmd_id = msg.get("cmd_id")
        kind = msg.get("type")
        if kind == "set_hip":
            try:
                target = (float(msg["x"]), float(msg["y"]), float(msg["z"]))
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "code": "bad_command",
                        "message": "set_hip needs numeric x, y, z", "cmd_id": cmd_id}
            if not all(math.isfinite(c) for c in target):
                return {"type": "error", "code": "bad_command",
                        "message": "set_hip coordinates must be finite", "cmd_id": cmd_id}
            engine.set_hip(target)
            return {"type": "ack", "cmd_id": cmd_id, "accepted": True, "seq": engine.seq + 1}
        if kind == "set_roi":
            try:
                sel = RoiSelection(level=int(msg["level"]), x=int(msg["x"]),
                                   y=int(msg["y"]), w=int(msg["w"]), h=int(msg["h"]))
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "code": "bad_command",
                        "message": "set_roi needs integer level, x, y, w, h", "cmd_id": cmd_id}
            try:
                sel.validate(engine.pyramid)
            except RoiSelectionError as exc:
                return {"type": "ack", "cmd_id": cmd_id, "accepted": False,
                        "seq": engine.seq, "reason": str(exc)}
            engine.queue_roi(sel)
            return {"type": "ack", "cmd_id": cmd_id, "accepted": True, "seq": engine.seq + 1}
        if kind == "set_level":
            try:
                delta = int(msg["delta"])
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "code": "bad_command",
                        "message": "set_level needs integer delta", "cmd_id": cmd_id}
            new_level = engine.roi.level + delta
            if not (0 <= new_level < engine.pyramid.n_levels):
                return {"type": "ack", "cmd_id": cmd_id, "accepted": False,
                        "seq": engine.seq, "reason": f"no level {new_level}"}
            engine.queue_level(delta)
            return {"type": "ack", "cmd_id": cmd_id, "accepted": True, "seq": engine.seq + 1}
        return {"type": "error", "code": "unknown_command",
                "message": f"unknown command type {kind!r}", "cmd_id": cmd_id}

    @app.websocket("/ws/{session_id}")
    async def session_socket(ws: WebSocket, session_id: str):
        await ws.accept()
        runtime = sessions.get(session_id)
        if runtime is None or runtime.closed:
            await ws.send_json({"type": "error", "code": "gone",
                                "message": f"session {session_id!r} is not live"})
            await ws.close()
            return
        sub = _Subscriber()
        runtime.subscribers.append(sub)

        async def sender():
            while True:
                await sub.event.wait()
                sub.event.clear()
                snap = sub.latest
                if snap is not None:
                    await ws.send_json(snap)

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "code": "bad_json",
                                        "message": "commands must be JSON objects"})
                    continue
                if not isinstance(msg, dict):
                    await ws.send_json({"type": "error", "code": "bad_json",
                                        "message": "commands must be JSON objects"})
                    continue
                await ws.send_json(_handle_command(runtime, msg))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            if sub in runtime.subscribers:
                runtime.subscribers.remove(sub)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
