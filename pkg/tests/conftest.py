from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


class _Server:
    """Local HTTP server standing in for the reader endpoint and for source pages.

    ``routes`` maps a request path to a str body (200), an int status, or a
    ``("slow", seconds, body)`` tuple.
    """

    def __init__(self):
        self.routes: dict[str, object] = {}
        self.posts: list = []
        self.post_replies: list = []
        self.hits: list[str] = []
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status, body, ctype="text/plain; charset=utf-8"):
                data = body.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                with outer._lock:
                    outer.hits.append(self.path)
                route = outer.routes.get(self.path, 404)
                if isinstance(route, tuple) and route[0] == "slow":
                    time.sleep(route[1])
                    route = route[2]
                if isinstance(route, int):
                    self._send(route, f"error {route}")
                elif isinstance(route, dict):
                    self._send(route.get("status", 200), route["body"], route.get("type", "text/plain; charset=utf-8"))
                else:
                    self._send(200, str(route))

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with outer._lock:
                    outer.posts.append({"body": body, "auth": self.headers.get("Authorization")})
                    reply = outer.post_replies.pop(0) if outer.post_replies else ""
                if isinstance(reply, int):
                    self._send(reply, "busy")
                    return
                payload = {"choices": [{"message": {"role": "assistant", "content": reply}}]}
                self._send(200, json.dumps(payload), "application/json")

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.base = f"http://127.0.0.1:{self.httpd.server_address[1]}"
        self.thread = threading.Thread(target=self.httpd.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)
        self.thread.start()

    def serve_reader_pages(self, pages: dict[str, object]) -> None:
        for url, body in pages.items():
            self.routes[f"/{url}"] = body

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def http_server():
    server = _Server()
    yield server
    server.close()


@pytest.fixture
def e2e_dir() -> Path:
    return DATA / "e2e"


def _cells(rows: int, cols: int, ones) -> np.ndarray:
    m = np.zeros((rows, cols), dtype=np.uint8)
    for r, c in ones:
        m[r - 1, c - 1] = 1
    return m


# Worked example: 7 statements, 6 relevant, 5 listed sources.
# Citations: accurate (1,1) (2,2) (4,2) (5,5); inaccurate (3,1) (3,3) (6,4).
# Support: row 1 = {1, 4}, row 3 empty, ten links, minimum covers {1,2,3} and {2,3,4}.
WORKED_CITATION = _cells(6, 5, [(1, 1), (2, 2), (4, 2), (5, 5), (3, 1), (3, 3), (6, 4)])
WORKED_SUPPORT = _cells(6, 5, [(1, 1), (1, 4), (2, 2), (2, 5), (4, 1), (4, 2), (5, 3), (5, 5), (6, 2), (6, 3)])
WORKED_STANCES = ["pro", "pro", "con", "pro", "con", "neutral"]


@pytest.fixture
def worked_example():
    return {
        "citation": WORKED_CITATION.copy(),
        "support": WORKED_SUPPORT.copy(),
        "stances": list(WORKED_STANCES),
        "n_total": 7,
        "n_listed": 5,
    }
