"""Loopback JSON service over a single organigram snapshot.

One model per server. Reads grab an immutable (model, revision) snapshot;
PUT /api/model swaps it atomically under a lock, bumping the revision, with
optional optimistic concurrency via the ``If-Match`` header. Every
analytical response carries the revision it was computed against; the
render endpoints return the documents unchanged (byte-identical with the
command line emitters) and carry the revision in the ``X-Model-Revision``
header instead.

Routes (all JSON unless noted):

    GET  /api/model           model projection + revision
    PUT  /api/model           replace model (DSL text or JSON body)
    POST /api/propagate       scenario JSON -> propagation trace
    POST /api/whatif          named scenarios -> comparison
    GET  /api/rank            influence ranking (?threshold=N&mode=adopt)
    GET  /api/access?entry=A  access report for the entry set
    GET  /api/render.svg      SVG document (?moods=0&informal=0)
    GET  /api/render.dot      DOT document (text/plain)

The server binds the loopback interface unless explicitly told otherwise.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from . import dsl, jsonio
from .analysis import PropagationParams, InfluenceMode, access_report, influence_rank, propagate, whatif
from .model import OrgError, OrgModel, Severity, validate
from .render import RenderOptions, to_dot, to_svg

DEFAULT_PORT = 7341

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>polorg</title></head>
<body><h1>polorg API</h1>
<p>No UI assets configured. The JSON API lives under <code>/api</code>:
<code>/api/model</code>, <code>/api/propagate</code>, <code>/api/whatif</code>,
<code>/api/rank</code>, <code>/api/access</code>, <code>/api/render.svg</code>,
<code>/api/render.dot</code>.</p></body></html>
"""


class ApiSession:
    """Single-writer, many-reader holder of the current model snapshot."""

    def __init__(self, model: OrgModel):
        self._lock = threading.Lock()
        self._model = model
        self._revision = 1

    def snapshot(self) -> tuple[OrgModel, int]:
        with self._lock:
            return self._model, self._revision

    def replace(self, model: OrgModel, expected_revision: int | None = None) -> int:
        """Swap in a new model; raises ``StaleRevision`` on a failed precondition."""
        with self._lock:
            if expected_revision is not None and expected_revision != self._revision:
                raise StaleRevision(self._revision)
            self._model = model
            self._revision += 1
            return self._revision


class StaleRevision(Exception):
    def __init__(self, current: int):
        super().__init__(f"revision precondition failed; current revision is {current}")
        self.current = current


def _render_options(query: dict[str, list[str]], fmt: str) -> RenderOptions:
    def flag(name: str, default: bool) -> bool:
        if name not in query:
            return default
        return query[name][-1] not in ("0", "false", "no")

    return RenderOptions(
        format=fmt,
        show_moods=flag("moods", True),
        show_informal=flag("informal", True),
    )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "polorg"

    # set by make_server
    session: ApiSession
    ui_dir: Path | None

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        pass

    # -- helpers -----------------------------------------------------------

    def _send(self, status: int, body: bytes, content_type: str, extra: dict[str, str] | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        for key, value in (extra or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict) -> None:
        self._send(status, jsonio.dumps(payload).encode("utf-8"), "application/json")

    def _send_diagnostics(self, diags) -> None:
        self._send_json(422, {"diagnostics": jsonio.diagnostics_to_json(diags)})

    def _send_error_code(self, err: OrgError) -> None:
        self._send_diagnostics([err.to_diagnostic()])

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json(self):
        raw = self._read_body()
        try:
            return json.loads(raw.decode("utf-8")) if raw else None
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise OrgError("E-SYNTAX", f"request body is not valid JSON: {e}") from None

    # -- routing -----------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 - stdlib casing
        url = urlsplit(self.path)
        query = parse_qs(url.query)
        model, revision = self.session.snapshot()
        try:
            if url.path == "/api/model":
                self._send_json(200, {"revision": revision, "model": jsonio.model_to_json(model)})
            elif url.path == "/api/rank":
                params = self._params_from_query(query)
                ranking = influence_rank(model, params)
                self._send_json(200, {"revision": revision, "ranking": jsonio.rank_to_json(ranking)})
            elif url.path == "/api/access":
                raw = ",".join(query.get("entry", []))
                entries = {e for e in raw.split(",") if e}
                report = access_report(model, entries)
                self._send_json(200, {"revision": revision, "access": jsonio.access_to_json(report)})
            elif url.path == "/api/render.svg":
                doc = to_svg(model, _render_options(query, "svg"))
                self._send(200, doc.encode("utf-8"), "image/svg+xml", {"X-Model-Revision": str(revision)})
            elif url.path == "/api/render.dot":
                doc = to_dot(model, _render_options(query, "dot"))
                self._send(200, doc.encode("utf-8"), "text/plain; charset=utf-8", {"X-Model-Revision": str(revision)})
            elif url.path.startswith("/api"):
                self._send_json(404, {"error": "unknown route"})
            else:
                self._serve_static(url.path)
        except OrgError as e:
            self._send_error_code(e)

    def do_POST(self) -> None:  # noqa: N802
        url = urlsplit(self.path)
        model, revision = self.session.snapshot()
        try:
            if url.path == "/api/propagate":
                scenario = jsonio.scenario_from_json(self._read_json())
                trace = propagate(model, scenario)
                self._send_json(200, {"revision": revision, "trace": jsonio.trace_to_json(trace)})
            elif url.path == "/api/whatif":
                body = self._read_json()
                if not isinstance(body, dict) or not isinstance(body.get("scenarios"), list):
                    raise OrgError("E-SYNTAX", "whatif body must be {\"scenarios\": [...]}")
                named = []
                for spec in body["scenarios"]:
                    if not isinstance(spec, dict) or not isinstance(spec.get("name"), str):
                        raise OrgError("E-SYNTAX", "each scenario needs a string name")
                    named.append((spec["name"], jsonio.scenario_from_json(spec)))
                result = whatif(model, named)
                self._send_json(200, {"revision": revision, "whatif": jsonio.whatif_to_json(result)})
            else:
                self._send_json(404, {"error": "unknown route"})
        except OrgError as e:
            self._send_error_code(e)

    def do_PUT(self) -> None:  # noqa: N802
        url = urlsplit(self.path)
        if url.path != "/api/model":
            self._send_json(404, {"error": "unknown route"})
            return
        expected = None
        if "If-Match" in self.headers:
            try:
                expected = int(self.headers["If-Match"].strip().strip('"'))
            except ValueError:
                self._send_json(409, {"error": "If-Match must be a revision integer"})
                return
        content_type = (self.headers.get("Content-Type") or "").split(";")[0].strip()
        try:
            if content_type == "application/json":
                candidate = jsonio.model_from_json(self._read_json())
                diagnostics = validate(candidate)
                if any(d.severity is Severity.ERROR for d in diagnostics):
                    self._send_diagnostics(diagnostics)
                    return
                model, warnings = candidate, diagnostics
            else:
                result = dsl.parse(self._read_body().decode("utf-8", errors="replace"))
                if result.model is None:
                    self._send_diagnostics(result.diagnostics)
                    return
                model, warnings = result.model, result.diagnostics
        except OrgError as e:
            self._send_error_code(e)
            return
        try:
            revision = self.session.replace(model, expected)
        except StaleRevision as e:
            self._send_json(409, {"error": str(e), "revision": e.current})
            return
        self._send_json(200, {"revision": revision, "diagnostics": jsonio.diagnostics_to_json(warnings)})

    # -- misc ----------------------------------------------------------------

    def _params_from_query(self, query: dict[str, list[str]]) -> PropagationParams:
        threshold = 2
        if "threshold" in query:
            try:
                threshold = int(query["threshold"][-1])
            except ValueError:
                raise OrgError("E-SYNTAX", "threshold must be an integer") from None
            if threshold < 1:
                raise OrgError("E-SYNTAX", "threshold must be >= 1")
        mode_raw = query.get("mode", ["adopt"])[-1]
        try:
            mode = InfluenceMode(mode_raw)
        except ValueError:
            raise OrgError("E-SYNTAX", f"invalid mode {mode_raw!r}") from None
        return PropagationParams(threshold, mode)

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            if path == "/":
                self._send(200, _FALLBACK_PAGE.encode("utf-8"), "text/html; charset=utf-8")
            else:
                self._send_json(404, {"error": "unknown route"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        root = self.ui_dir.resolve()
        if root not in target.parents and target != root:
            self._send_json(404, {"error": "unknown route"})
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json(404, {"error": "unknown route"})
            return
        ctype = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)


def make_server(
    session: ApiSession,
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Create (but do not start) the HTTP server. Binds loopback by default."""
    handler = type("BoundHandler", (_Handler,), {"session": session, "ui_dir": Path(ui_dir) if ui_dir else None})
    return ThreadingHTTPServer((host, port), handler)
