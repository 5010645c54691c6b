"""Interactive session server.

One WebSocket client at a time; each text message is one protocol line:

  client -> engine : HELLO | EVT <trace-line> | BYE
  engine -> client : SCENE <scene document> | STATE <trajectory line> | ERR <message>

Events are processed strictly in arrival order by a single engine session;
disconnecting discards the session state.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import EngineConfig
from .harness import TraceError, format_sample, parse_trace_line
from .scene import parse_scene, serialize_scene
from .session import EngineSession


def create_app(scene_text: str, config: Optional[EngineConfig] = None) -> FastAPI:
    parse_scene(scene_text)  # validate up front so startup fails loudly
    app = FastAPI()
    app.state.busy = False

    @app.websocket("/session")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        if app.state.busy:
            await ws.send_text("ERR session busy: one client at a time")
            await ws.close()
            return
        app.state.busy = True
        session: Optional[EngineSession] = None
        last_t: Optional[int] = None
        try:
            while True:
                try:
                    message = await ws.receive_text()
                except WebSocketDisconnect:
                    break
                for line in message.splitlines():
                    line = line.strip("\r")
                    if not line:
                        continue
                    if line == "HELLO":
                        session = EngineSession(parse_scene(scene_text), config)
                        last_t = None
                        await ws.send_text("SCENE " + serialize_scene(session.scene))
                    elif line == "BYE":
                        await ws.close()
                        return
                    elif line.startswith("EVT "):
                        if session is None:
                            await ws.send_text("ERR no session: send HELLO first")
                            continue
                        try:
                            event = parse_trace_line(line[4:], 1, last_t)
                        except TraceError as e:
                            await ws.send_text(f"ERR {e}")
                            continue
                        if event is None:
                            await ws.send_text("ERR empty event line")
                            continue
                        last_t = event.t
                        sample = session.process(event)
                        await ws.send_text("STATE " + format_sample(sample))
                    else:
                        await ws.send_text(f"ERR unknown message {line.split(' ', 1)[0]!r}")
        except WebSocketDisconnect:
            pass
        finally:
            app.state.busy = False

    return app


def serve(scene_text: str, port: int, config: Optional[EngineConfig] = None,
          host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(scene_text, config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
