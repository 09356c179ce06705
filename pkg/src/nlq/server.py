"""HTTP JSON API and static-file host for the chat client.

Endpoints: POST /api/turn, POST /api/session/reset, GET /api/schema,
GET /api/health; anything else under / serves the built chat UI when a
static directory is configured.  Sessions are keyed by caller-chosen ids,
auto-created on first use, and expire after an idle timeout.

Pipeline failures are not transport failures: they return 422 with the
failing stage in the ``error`` field.  400 covers malformed requests and
500 everything else.

Concurrency: requests run on one thread each; a session's turns serialize
on a per-session lock, reads share the store lock, and mutating turns take
it exclusively.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .classify import predict
from .dialogue import Assets, DialogueContext, handle_turn, new_context
from .sqlast import StatementType, serialize
from .templates import Target

log = logging.getLogger(__name__)

DEFAULT_IDLE_TIMEOUT = 30 * 60.0  # seconds

_READ_KINDS = (StatementType.SELECT.name, StatementType.SELECT_AGG.name)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".txt": "text/plain; charset=utf-8",
}

_PLACEHOLDER_PAGE = (
    "<!doctype html><meta charset='utf-8'><title>nlq</title>"
    "<p>API is up. No chat UI build configured; see GET /api/health, "
    "GET /api/schema, POST /api/turn.</p>"
)


class _ReadWriteLock:
    """Writer-preferring read/write lock for the table store."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()


@dataclass
class _Session:
    ctx: DialogueContext
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)


class SessionRegistry:
    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT) -> None:
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()
        self._idle_timeout = idle_timeout

    def _prune(self, now: float) -> None:
        dead = [
            sid
            for sid, s in self._sessions.items()
            if now - s.last_access > self._idle_timeout
        ]
        for sid in dead:
            del self._sessions[sid]

    def get_or_create(self, session_id: str) -> _Session:
        now = time.monotonic()
        with self._lock:
            self._prune(now)
            session = self._sessions.get(session_id)
            if session is None:
                session = _Session(ctx=new_context(session_id))
                self._sessions[session_id] = session
            session.last_access = now
            return session

    def reset(self, session_id: str) -> None:
        now = time.monotonic()
        with self._lock:
            self._prune(now)
            self._sessions[session_id] = _Session(ctx=new_context(session_id))

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def _schema_payload(assets: Assets) -> dict:
    tables = []
    for name in assets.catalog.table_names:
        schema = assets.catalog.table(name)
        tables.append(
            {
                "name": schema.name,
                "columns": [
                    {"name": c.name, "type": c.type.name.lower()} for c in schema.columns
                ],
            }
        )
    return {"database": assets.name, "tables": tables}


def make_handler(
    assets: Assets,
    registry: SessionRegistry,
    static_dir: Path | None,
    store_lock: _ReadWriteLock,
) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format: str, *args) -> None:
            log.debug("%s - %s", self.address_string(), format % args)

        # -- helpers -----------------------------------------------------
        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict | None:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                return None
            return payload if isinstance(payload, dict) else None

        # -- endpoints ---------------------------------------------------
        def do_GET(self) -> None:
            try:
                path = self.path.split("?", 1)[0]
                if path == "/api/health":
                    self._send_json(200, {"status": "ok"})
                elif path == "/api/schema":
                    self._send_json(200, _schema_payload(assets))
                elif path.startswith("/api/"):
                    self._send_json(404, {"error": {"stage": "http", "message": "not found"}})
                else:
                    self._serve_static(path)
            except Exception:
                log.exception("GET %s failed", self.path)
                self._send_json(500, {"error": {"stage": "http", "message": "internal error"}})

        def do_POST(self) -> None:
            try:
                path = self.path.split("?", 1)[0]
                if path == "/api/turn":
                    self._api_turn()
                elif path == "/api/session/reset":
                    self._api_reset()
                else:
                    self._send_json(404, {"error": {"stage": "http", "message": "not found"}})
            except Exception:
                log.exception("POST %s failed", self.path)
                self._send_json(500, {"error": {"stage": "http", "message": "internal error"}})

        def _api_turn(self) -> None:
            payload = self._read_json()
            if payload is None:
                self._send_json(400, {"error": {"stage": "http", "message": "malformed JSON body"}})
                return
            session_id = payload.get("session_id")
            text = payload.get("text")
            if not isinstance(session_id, str) or not session_id or not isinstance(text, str) or not text.strip():
                self._send_json(
                    400,
                    {"error": {"stage": "http", "message": "session_id and text must be nonempty strings"}},
                )
                return
            session = registry.get_or_create(session_id)
            label, _ = predict(assets.stmt_model, text)
            mutating = label not in _READ_KINDS
            with session.lock:
                if mutating:
                    store_lock.acquire_write()
                else:
                    store_lock.acquire_read()
                try:
                    outcome, session.ctx = handle_turn(session.ctx, text, assets)
                finally:
                    store_lock.release_write() if mutating else store_lock.release_read()
            if not outcome.ok:
                self._send_json(
                    422,
                    {
                        "error": {"stage": outcome.error_stage, "message": outcome.error_message},
                        "elapsed_ms": outcome.elapsed_ms,
                    },
                )
                return
            assert outcome.sql is not None and outcome.result is not None
            self._send_json(
                200,
                {
                    "sql": serialize(outcome.sql),
                    "target": "previous_result" if outcome.target == Target.PREVIOUS_RESULT else "database",
                    "answer": outcome.answer,
                    "columns": list(outcome.result.columns),
                    "rows": [list(row) for row in outcome.result.rows],
                    "elapsed_ms": outcome.elapsed_ms,
                },
            )

        def _api_reset(self) -> None:
            payload = self._read_json()
            if payload is None or not isinstance(payload.get("session_id"), str) or not payload["session_id"]:
                self._send_json(400, {"error": {"stage": "http", "message": "session_id must be a nonempty string"}})
                return
            registry.reset(payload["session_id"])
            self._send_json(200, {"status": "ok"})

        # -- static files --------------------------------------------------
        def _serve_static(self, path: str) -> None:
            if static_dir is None:
                body = _PLACEHOLDER_PAGE.encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
            rel = path.lstrip("/") or "index.html"
            root = static_dir.resolve()
            candidate = (root / rel).resolve()
            if not str(candidate).startswith(str(root)) or not candidate.is_file():
                self._send_json(404, {"error": {"stage": "http", "message": "not found"}})
                return
            body = candidate.read_bytes()
            ctype = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def create_server(
    assets: Assets,
    port: int = 0,
    *,
    static_dir: str | Path | None = None,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    registry = SessionRegistry(idle_timeout=idle_timeout)
    store_lock = _ReadWriteLock()
    handler = make_handler(
        assets,
        registry,
        Path(static_dir) if static_dir is not None else None,
        store_lock,
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(
    assets: Assets,
    port: int,
    *,
    static_dir: str | Path | None = None,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
) -> None:
    """Run the API until interrupted."""
    httpd = create_server(assets, port, static_dir=static_dir, idle_timeout=idle_timeout)
    host, actual_port = httpd.server_address[:2]
    log.info("serving %s on http://%s:%s/", assets.name, host, actual_port)
    print(f"serving database '{assets.name}' on http://{host}:{actual_port}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
