"""In-process JSON-RPC stub answering the two archive-node calls."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from pmadetect.txparse import TRANSFER_SIG


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        node = self.server.node
        node.requests.append(body)
        if node.http_status != 200:
            self.send_response(node.http_status)
            self.end_headers()
            return
        method, params = body["method"], body["params"]
        reply = {"jsonrpc": "2.0", "id": body["id"]}
        handler = node.handlers.get(method)
        if handler is None:
            reply["error"] = {"code": -32601, "message": f"the method {method} does not exist/is not available"}
        else:
            result = handler(params)
            if isinstance(result, dict) and "__error__" in result:
                reply["error"] = result["__error__"]
            else:
                reply["result"] = result
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class MockNode:
    def __init__(self, transactions: dict):
        """``transactions`` maps hash -> (callTracer frame, receipt logs)."""
        self.requests = []
        self.http_status = 200
        self.transactions = transactions
        self.handlers = {
            "eth_getTransactionReceipt": self._receipt,
            "debug_traceTransaction": self._trace,
        }
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.server.node = self
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self):
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def _receipt(self, params):
        tx = self.transactions.get(params[0])
        return None if tx is None else {"transactionHash": params[0], "logs": tx[1]}

    def _trace(self, params):
        tx = self.transactions.get(params[0])
        if tx is None:
            return {"__error__": {"code": -32000, "message": "transaction not found"}}
        return tx[0]

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def word(address):
    return "0x" + "00" * 12 + address[2:]


def transfer_log(token, src, dst, amount):
    return {
        "address": token,
        "topics": ["0x" + TRANSFER_SIG.hex(), word(src), word(dst)],
        "data": "0x" + amount.to_bytes(32, "big").hex(),
    }
