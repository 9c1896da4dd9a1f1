#!/usr/bin/env python3
"""Record API responses used by the UI tests.

Boots the real HTTP server on an ephemeral loopback port, drives it with
plain HTTP, and writes the raw response bodies into tests/fixtures/.
Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import threading
import urllib.request
from pathlib import Path

from polorg import parse
from polorg.api import ApiSession, make_server

ROOT = Path(__file__).resolve().parent.parent
FIXDIR = ROOT / "tests" / "fixtures"
POG = ROOT.parent / "fixtures"


def call(base: str, method: str, path: str, body: bytes | None = None, ctype: str = "application/json") -> bytes:
    req = urllib.request.Request(f"{base}{path}", data=body, method=method)
    if body is not None:
        req.add_header("Content-Type", ctype)
    with urllib.request.urlopen(req) as resp:
        return resp.read()


def record(name: str, payload: bytes) -> None:
    FIXDIR.mkdir(parents=True, exist_ok=True)
    (FIXDIR / name).write_bytes(payload)
    print(f"recorded {name} ({len(payload)} bytes)")


def main() -> None:
    model = parse((POG / "example.pog").read_text(encoding="utf-8")).model
    assert model is not None
    server = make_server(ApiSession(model), port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_port}"
    try:
        record("model.json", call(base, "GET", "/api/model"))
        record("rank.json", call(base, "GET", "/api/rank"))
        leak = {"activations": [{"source": "D", "target": "A", "active": True}]}
        record("trace-leak.json", call(base, "POST", "/api/propagate", json.dumps(leak).encode()))

        conflict_text = (POG / "conflict.pog").read_bytes()
        call(base, "PUT", "/api/model", conflict_text, "text/plain")
        record("model-conflict.json", call(base, "GET", "/api/model"))
        record("trace-conflict.json", call(base, "POST", "/api/propagate", b"{}"))

        blocked_text = (POG / "blocked.pog").read_bytes()
        call(base, "PUT", "/api/model", blocked_text, "text/plain")
        record("access-workaround.json", call(base, "GET", "/api/access?entry=R"))
        no_informal = b"".join(
            line for line in blocked_text.splitlines(keepends=True) if not line.startswith(b"informal")
        )
        call(base, "PUT", "/api/model", no_informal, "text/plain")
        record("access-blocked.json", call(base, "GET", "/api/access?entry=R"))
    finally:
        server.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
