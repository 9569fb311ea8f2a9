"""Shared-session service: one document, many editors, broadcast evals.

WebSocket endpoint at /session speaks JSON text frames:

  client -> server
    {"type": "hello", "name": ...}
    {"type": "op", "base": v, "ops": [["r",n]|["i",text]|["d",n]], "cid": ...}
    {"type": "eval", "base": v}
  server -> client
    {"type": "welcome", "cid": ..., "doc": ..., "version": v}
    {"type": "op", "version": v, "ops": [...], "cid": ...}
    {"type": "eval", "version": v, "errors": [...]}
    {"type": "error", "code": ..., "message": ...}

Plain HTTP on the same port serves the editor bundle at / and the
current engine dump at /dump. Evals are fail-safe: a buffer that does
not parse reports errors and leaves the running engine untouched.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
from http import HTTPStatus
from pathlib import Path

from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from .errors import VivaceError
from .interp import EngineState, dump_json, eval_program
from .parser import parse
from .session import (
    DocOp,
    SessionState,
    components_from_wire,
    components_to_wire,
    doc_at,
    eval_notice,
    server_apply,
)


class SessionServer:
    """Holds the authoritative document and serializes all edits."""

    def __init__(self, initial_doc: str = "", static_dir: Path | None = None):
        self.state = SessionState()
        if initial_doc:
            seeded, _ = server_apply(self.state, DocOp((initial_doc,), 0, "server"))
            self.state = seeded
        self.engine = EngineState()
        self.static_dir = static_dir
        self.connections = {}  # websocket -> client id
        self.lock = asyncio.Lock()
        self._next_client = 1

    # -- protocol ---------------------------------------------------------

    async def handle(self, websocket) -> None:
        try:
            async for raw in websocket:
                await self.dispatch(websocket, raw)
        except ConnectionClosed:
            pass
        finally:
            async with self.lock:
                cid = self.connections.pop(websocket, None)
                if cid is not None:
                    clients = dict(self.state.clients)
                    clients.pop(cid, None)
                    self.state = SessionState(
                        self.state.doc, self.state.version, self.state.history, clients
                    )

    async def dispatch(self, websocket, raw: str) -> None:
        try:
            message = json.loads(raw)
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as err:
            await self._error(websocket, "bad_message", str(err))
            return
        kind = message.get("type")
        if kind == "hello":
            await self.on_hello(websocket, message)
        elif kind == "op":
            await self.on_op(websocket, message)
        elif kind == "eval":
            await self.on_eval(websocket, message)
        else:
            await self._error(websocket, "bad_type", f"unknown message type {kind!r}")

    async def on_hello(self, websocket, message) -> None:
        async with self.lock:
            cid = self.connections.get(websocket)
            if cid is None:
                cid = f"c{self._next_client}"
                self._next_client += 1
                self.connections[websocket] = cid
            clients = dict(self.state.clients)
            clients[cid] = str(message.get("name", cid))
            self.state = SessionState(
                self.state.doc, self.state.version, self.state.history, clients
            )
            reply = {
                "type": "welcome",
                "cid": cid,
                "doc": self.state.doc,
                "version": self.state.version,
            }
        await websocket.send(json.dumps(reply))

    async def on_op(self, websocket, message) -> None:
        cid = self.connections.get(websocket)
        if cid is None:
            await self._error(websocket, "not_registered", "send hello first")
            return
        if message.get("cid") != cid:
            await self._error(websocket, "bad_client_id", f"connection is {cid}")
            return
        try:
            base = int(message["base"])
            components = components_from_wire(message["ops"])
        except (KeyError, TypeError, ValueError) as err:
            await self._error(websocket, "bad_message", f"malformed op: {err}")
            return
        async with self.lock:
            try:
                new_state, applied = server_apply(
                    self.state, DocOp(components, base, cid)
                )
            except VivaceError as err:
                await self._error(websocket, _error_code(err), str(err))
                return
            self.state = new_state
            broadcast = {
                "type": "op",
                "version": new_state.version,
                "ops": components_to_wire(applied.components),
                "cid": cid,
            }
            targets = list(self.connections)
        await self._broadcast(targets, broadcast)

    async def on_eval(self, websocket, message) -> None:
        if self.connections.get(websocket) is None:
            await self._error(websocket, "not_registered", "send hello first")
            return
        async with self.lock:
            try:
                version = int(message.get("base", self.state.version))
                notice = eval_notice(self.state, version)
            except (TypeError, ValueError, VivaceError) as err:
                await self._error(websocket, _error_code(err), str(err))
                return
            if notice.ok:
                result = eval_program(self.engine, parse(doc_at(self.state, version)).program)
                self.engine = result.state
            payload = {
                "type": "eval",
                "version": notice.version,
                "errors": list(notice.errors),
            }
            targets = list(self.connections)
        await self._broadcast(targets, payload)

    async def _broadcast(self, targets, payload) -> None:
        data = json.dumps(payload)
        for websocket in targets:
            try:
                await websocket.send(data)
            except ConnectionClosed:
                pass

    async def _error(self, websocket, code, message) -> None:
        try:
            await websocket.send(
                json.dumps({"type": "error", "code": code, "message": message})
            )
        except ConnectionClosed:
            pass

    # -- plain HTTP ---------------------------------------------------------

    def process_request(self, connection, request):
        if request.path.split("?")[0] == "/session":
            return None  # proceed with the WebSocket handshake
        return self.http_response(request.path)

    def http_response(self, path: str) -> Response:
        path = path.split("?")[0]
        if path == "/dump":
            return _http(HTTPStatus.OK, "application/json", dump_json(self.engine) + "\n")
        if path == "/doc":
            body = json.dumps({"doc": self.state.doc, "version": self.state.version})
            return _http(HTTPStatus.OK, "application/json", body + "\n")
        if self.static_dir is not None:
            if path == "/":
                path = "/index.html"
            root = self.static_dir.resolve()
            target = (root / path.lstrip("/")).resolve()
            if target.is_relative_to(root) and target.is_file():
                ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
                return _http(HTTPStatus.OK, ctype, target.read_bytes())
        return _http(HTTPStatus.NOT_FOUND, "text/plain", "not found\n")

    def snapshot(self) -> dict:
        return {"doc": self.state.doc, "version": self.state.version}


def _error_code(err) -> str:
    name = type(err).__name__
    if name == "StaleVersion":
        return "stale_version"
    if name == "SpanMismatch":
        return "span_mismatch"
    return "error"


def _http(status, content_type, body) -> Response:
    if isinstance(body, str):
        body = body.encode()
    headers = Headers(
        [("Content-Type", content_type), ("Content-Length", str(len(body)))]
    )
    return Response(status.value, status.phrase, headers, body)


async def run_server(
    server: SessionServer,
    host: str = "127.0.0.1",
    port: int = 8765,
    ready: asyncio.Event | None = None,
) -> None:
    async with serve(
        server.handle, host, port, process_request=server.process_request
    ):
        if ready is not None:
            ready.set()
        await asyncio.Future()  # run until cancelled
