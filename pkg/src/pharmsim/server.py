"""Local HTTP control API.

Runs simulation sessions over JSON endpoints, including an interactive mode
where the engine pauses each quarter until a human posts the regulator
decision.  Sessions live in memory; each serializes its own transitions, so
concurrent sessions never block each other.

Endpoints:
    GET  /health
    POST /sessions                      create from {"config": ..., "mode": ...}
    GET  /sessions/{id}                 status plus the latest record
    POST /sessions/{id}/step            advance one quarter (auto mode)
    POST /sessions/{id}/fda-decision    supply the pending decision (human mode)
    GET  /sessions/{id}/trajectory      records so far as JSON lines
"""

from __future__ import annotations

import json
import re
import secrets
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .agents import RulePolicy, ScriptedPolicy, ValidationFailed, validate_decision
from .config import ConfigInvalid, SimConfig
from .engine import PolicySet, SimulationSession

MODES = ("auto", "human_fda")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class Session:
    """One simulation plus the bookkeeping the API needs."""

    def __init__(self, sim: SimulationSession, mode: str):
        self.id = secrets.token_hex(8)
        self.sim = sim
        self.mode = mode
        self.lock = threading.Lock()
        if mode == "human_fda":
            sim.begin_period()

    @property
    def status(self) -> str:
        if self.sim.finished:
            return "finished"
        if self.sim.awaiting_fda:
            return "awaiting_fda"
        return "running"

    def view(self) -> dict:
        # Reads take the session lock so an auto session never shows the
        # transient mid-step awaiting state.
        with self.lock:
            return self._view_locked()

    def _view_locked(self) -> dict:
        latest = self.sim.records[-1].to_dict() if self.sim.records else None
        return {
            "id": self.id,
            "mode": self.mode,
            "status": self.status,
            "period": self.sim.period,
            "horizon": self.sim.cfg.horizon,
            "pending_decision": self.status == "awaiting_fda",
            "config": self.sim.cfg.to_dict(),
            "latest_record": latest,
        }


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        return session


def create_session(store: SessionStore, payload: dict) -> Session:
    if not isinstance(payload, dict):
        raise ApiError(400, "bad_request", "body must be a JSON object")
    mode = payload.get("mode", "auto")
    if mode not in MODES:
        raise ApiError(400, "bad_mode", f"mode must be one of {MODES}")
    policies_name = payload.get("policies", "rule")
    if policies_name != "rule":
        raise ApiError(400, "bad_policies",
                       "only the deterministic rule policies are served over HTTP")
    try:
        cfg = SimConfig.from_dict(payload.get("config", {}))
    except ConfigInvalid as exc:
        raise ApiError(400, "bad_config", str(exc)) from exc
    policies = PolicySet.rule()
    script = payload.get("fda_script")
    if script is not None:
        # A per-quarter regulator script turns an auto session into the exact
        # counterpart of an interactive one (substitution checks, replays).
        if mode != "auto":
            raise ApiError(400, "bad_request",
                           "fda_script applies to auto sessions only")
        if not isinstance(script, list) or len(script) < cfg.horizon:
            raise ApiError(400, "bad_request",
                           "fda_script must list one decision per quarter")
        for entry in script:
            try:
                validate_decision(dict(entry), "fda", cfg)
            except (ValidationFailed, TypeError) as exc:
                raise ApiError(400, "invalid_decision", str(exc)) from exc
        scripted = ScriptedPolicy({
            ("fda", None, t + 1): dict(script[t]) for t in range(cfg.horizon)
        })
        policies = PolicySet(fda=scripted, manufacturer=RulePolicy(),
                             buyer=RulePolicy(), label="script")
    session = Session(SimulationSession(cfg, policies), mode)
    store.add(session)
    return session


def handle_step(session: Session) -> dict:
    with session.lock:
        if session.mode != "auto":
            raise ApiError(409, "awaiting_fda",
                           "interactive session: post the regulator decision instead")
        if session.sim.finished:
            raise ApiError(409, "finished", "session already finished")
        record = session.sim.step()
        return {"record": record.to_dict(), "status": session.status,
                "period": session.sim.period}


def handle_fda_decision(session: Session, payload: dict) -> dict:
    with session.lock:
        if session.mode != "human_fda":
            raise ApiError(409, "not_interactive", "session runs its own regulator policy")
        if session.sim.finished:
            raise ApiError(409, "finished", "session already finished")
        if not session.sim.awaiting_fda:
            raise ApiError(409, "not_pending", "quarter already decided")
        try:
            decision, warnings = validate_decision(dict(payload), "fda", session.sim.cfg)
        except ValidationFailed as exc:
            raise ApiError(400, "invalid_decision",
                           f"offending keys: {exc.keys}") from exc
        except (TypeError, AttributeError) as exc:
            raise ApiError(400, "bad_request", str(exc)) from exc
        record = session.sim.complete_period(decision)
        if not session.sim.finished:
            session.sim.begin_period()
        return {"record": record.to_dict(), "status": session.status,
                "period": session.sim.period, "warnings": warnings}


def trajectory_ndjson(session: Session) -> str:
    with session.lock:
        return "".join(
            json.dumps(r.to_dict(), separators=(",", ":")) + "\n"
            for r in session.sim.records
        )


_ROUTES = [
    ("GET", re.compile(r"^/health$")),
    ("POST", re.compile(r"^/sessions$")),
    ("GET", re.compile(r"^/sessions/(?P<id>[0-9a-f]+)$")),
    ("POST", re.compile(r"^/sessions/(?P<id>[0-9a-f]+)/step$")),
    ("POST", re.compile(r"^/sessions/(?P<id>[0-9a-f]+)/fda-decision$")),
    ("GET", re.compile(r"^/sessions/(?P<id>[0-9a-f]+)/trajectory$")),
]


def make_handler(store: SessionStore, static_dir: Path | None = None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send(self, status: int, body: str, content_type="application/json"):
            data = body.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(data)

        def _send_json(self, status: int, payload: dict):
            self._send(status, json.dumps(payload))

        def _error(self, err: ApiError):
            self._send_json(err.status, {"error": {"code": err.code,
                                                   "message": err.message}})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                return json.loads(raw or b"{}")
            except json.JSONDecodeError as exc:
                raise ApiError(400, "bad_json", f"request body is not JSON: {exc}")

        def do_OPTIONS(self):
            self._send(204, "")

        def do_GET(self):
            try:
                if self.path == "/health":
                    return self._send_json(200, {"status": "ok"})
                m = re.match(r"^/sessions/([0-9a-f]+)$", self.path)
                if m:
                    return self._send_json(200, store.get(m.group(1)).view())
                m = re.match(r"^/sessions/([0-9a-f]+)/trajectory$", self.path)
                if m:
                    body = trajectory_ndjson(store.get(m.group(1)))
                    return self._send(200, body, content_type="application/x-ndjson")
                if static_dir is not None:
                    return self._static()
                raise ApiError(404, "not_found", self.path)
            except ApiError as err:
                self._error(err)

        def do_POST(self):
            try:
                body = self._body()
                if self.path == "/sessions":
                    session = create_session(store, body)
                    return self._send_json(201, session.view())
                m = re.match(r"^/sessions/([0-9a-f]+)/step$", self.path)
                if m:
                    return self._send_json(200, handle_step(store.get(m.group(1))))
                m = re.match(r"^/sessions/([0-9a-f]+)/fda-decision$", self.path)
                if m:
                    return self._send_json(
                        200, handle_fda_decision(store.get(m.group(1)), body))
                raise ApiError(404, "not_found", self.path)
            except ApiError as err:
                self._error(err)

        def _static(self):
            rel = self.path.lstrip("/") or "index.html"
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                raise ApiError(404, "not_found", self.path)
            types = {".html": "text/html", ".js": "text/javascript",
                     ".css": "text/css", ".map": "application/json"}
            self._send(200, target.read_text(encoding="utf-8"),
                       content_type=types.get(target.suffix, "text/plain"))

    return Handler


def make_server(host="127.0.0.1", port=0, static_dir: str | Path | None = None):
    """Build the threaded HTTP server; port 0 picks a free port."""
    store = SessionStore()
    static = Path(static_dir) if static_dir else None
    server = ThreadingHTTPServer((host, port), make_handler(store, static))
    server.store = store
    return server


def serve(host="127.0.0.1", port=8000, static_dir=None):
    server = make_server(host, port, static_dir)
    print(f"control API listening on http://{host}:{server.server_address[1]}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
