"""JSON-over-HTTP front end: the same documents as the CLI, plus optional
static serving of the companion single-page calculator.

Stateless by construction; every request is handled in its own thread with no
shared mutable state, so concurrent requests are isolated.
"""

import json
import mimetypes
import os
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import report
from .errors import PayloadError

DEFAULT_BIND = "127.0.0.1:8750"
BIND_ENV_VAR = "SURVPOWER_BIND"


def parse_bind(bind):
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    return host, int(port)


class _Handler(BaseHTTPRequestHandler):
    server_version = "survpower"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send(self, status, body, content_type="application/json"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_doc(self, status, doc):
        self._send(status, report.render(doc))

    def do_GET(self):
        if self.path == "/api/health":
            self._send_doc(200, report.health_document())
            return
        ui_dir = getattr(self.server, "ui_dir", None)
        if ui_dir:
            rel = self.path.lstrip("/") or "index.html"
            full = os.path.normpath(os.path.join(ui_dir, rel))
            if full.startswith(os.path.abspath(ui_dir)) and os.path.isfile(full):
                ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
                with open(full, "rb") as fh:
                    self._send(200, fh.read(), ctype)
                return
        doc, _, status = report.error_document(
            PayloadError(f"no such resource {self.path!r}", field="path")
        )
        self._send_doc(404 if status == 400 else status, doc)

    def do_POST(self):
        if not self.path.startswith("/api/"):
            doc, _, _ = report.error_document(
                PayloadError(f"no such endpoint {self.path!r}", field="path")
            )
            self._send_doc(404, doc)
            return
        command = self.path[len("/api/"):]
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise PayloadError(f"malformed JSON body: {exc}", field="(body)")
            if isinstance(payload, dict) and "taus_csv" in payload:
                # server-side file writes are CLI-only; use keep_taus over HTTP
                raise PayloadError("'taus_csv' is not accepted over HTTP",
                                   field="taus_csv")
            doc = report.dispatch(command, payload)
        except Exception as exc:  # noqa: BLE001 - mapped to a structured body
            body, _, status = report.error_document(exc)
            self._send_doc(status, body)
            return
        self._send_doc(200, doc)


def make_server(bind=None, ui_dir=None, verbose=False):
    bind = bind or os.environ.get(BIND_ENV_VAR, DEFAULT_BIND)
    host, port = parse_bind(bind)
    server = ThreadingHTTPServer((host, port), _Handler)
    server.ui_dir = os.path.abspath(ui_dir) if ui_dir else None
    server.verbose = verbose
    return server


def serve(bind=None, ui_dir=None, verbose=True):
    """Run the JSON API (and the UI, if ``ui_dir`` is given) until interrupted."""
    server = make_server(bind, ui_dir, verbose)
    host, port = server.server_address[:2]
    print(f"survpower API listening on http://{host}:{port}/api/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
