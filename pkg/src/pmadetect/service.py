"""HTTP front end: ``POST /classify`` and ``GET /health``.

Request bodies are JSON, either ``{"fixture": {...}}`` or
``{"tx_hash": "0x...", "rpc": "http://node:8545"}``.  Responses mirror
:class:`ClassifyResponse`; failures return ``{"error": {"phase", "type", "message"}}``.
"""

from __future__ import annotations

import json
import logging
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import NetworkError, NotFound, PMAError, UnsupportedNode
from .pipeline import Classifier, error_document
from .txparse import transaction_from_dict

log = logging.getLogger(__name__)

DEFAULT_MAX_BODY = 4 * 1024 * 1024


def _status_for(exc: BaseException) -> HTTPStatus:
    if isinstance(exc, NotFound):
        return HTTPStatus.NOT_FOUND
    if isinstance(exc, (NetworkError, UnsupportedNode)):
        return HTTPStatus.BAD_GATEWAY
    if getattr(exc, "phase", None) == "parse":
        return HTTPStatus.BAD_REQUEST
    return HTTPStatus.INTERNAL_SERVER_ERROR


class ClassifyHandler(BaseHTTPRequestHandler):
    server: "ClassifyServer"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("%s - " + fmt, self.address_string(), *args)

    def _send(self, status: HTTPStatus, doc: dict) -> None:
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _parse_error(self, message: str) -> None:
        self._send(HTTPStatus.BAD_REQUEST, {"error": {"phase": "parse", "type": "ParseError", "message": message}})

    def do_GET(self):
        if self.path.rstrip("/") == "/health":
            self._send(HTTPStatus.OK, self.server.health())
        else:
            self._send(HTTPStatus.NOT_FOUND, {"error": {"phase": "route", "type": "NotFound", "message": self.path}})

    def do_POST(self):
        if self.path.rstrip("/") != "/classify":
            self._send(HTTPStatus.NOT_FOUND, {"error": {"phase": "route", "type": "NotFound", "message": self.path}})
            return
        try:
            length = int(self.headers.get("Content-Length", ""))
        except ValueError:
            self.close_connection = True
            self._send(HTTPStatus.LENGTH_REQUIRED, {"error": {"phase": "parse", "type": "LengthRequired", "message": "Content-Length required"}})
            return
        if length > self.server.max_body:
            self.close_connection = True
            self._send(
                HTTPStatus.REQUEST_ENTITY_TOO_LARGE,
                {"error": {"phase": "parse", "type": "PayloadTooLarge", "message": f"body exceeds {self.server.max_body} bytes"}},
            )
            return
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._parse_error(f"request body is not JSON: {exc}")
            return
        if not isinstance(doc, dict):
            self._parse_error("request body must be a JSON object")
            return
        clf = self.server.classifier
        try:
            if "fixture" in doc:
                response = clf.classify_transaction(transaction_from_dict(doc["fixture"]))
            elif "tx_hash" in doc:
                response = clf.classify_hash(doc["tx_hash"], doc.get("rpc"), doc.get("chain", "ethereum"))
            else:
                self._parse_error("body needs either 'fixture' or 'tx_hash'")
                return
        except PMAError as exc:
            self._send(_status_for(exc), error_document(exc))
            return
        except Exception as exc:  # keep the service up on unexpected failures
            log.exception("classification failed")
            self._send(HTTPStatus.INTERNAL_SERVER_ERROR, error_document(exc, "internal"))
            return
        self._send(HTTPStatus.OK, response.to_dict())


class ClassifyServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, classifier: Classifier, max_body: int = DEFAULT_MAX_BODY):
        super().__init__(address, ClassifyHandler)
        self.classifier = classifier
        self.max_body = max_body
        self._identity = {
            "status": "ok",
            "model": {
                **classifier.checkpoint.config.to_dict(),
                "seed": classifier.checkpoint.params.seed,
                "sha256": classifier.checkpoint.digest(),
            },
            "account_db_entries": len(classifier.db),
            "rpc": classifier.rpc is not None,
        }

    def health(self) -> dict:
        return self._identity


def make_server(host: str, port: int, classifier: Classifier, max_body: int = DEFAULT_MAX_BODY) -> ClassifyServer:
    return ClassifyServer((host, port), classifier, max_body)


def serve_in_thread(server: ClassifyServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
