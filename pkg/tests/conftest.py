from __future__ import annotations

import numpy as np
import pytest

from wearqc.synthetic import DEFAULT_START, synthetic_session

T0 = DEFAULT_START


@pytest.fixture(scope="session")
def synth_2h():
    return synthetic_session(2.0, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class StubServer:
    """Local HTTP endpoint answering POSTs with a scripted list of status codes."""

    def __init__(self):
        import http.server
        import threading

        self.statuses: list[int] = [200]
        self.bodies: list[bytes] = []
        stub = self

        class Handler(http.server.BaseHTTPRequestHandler):
            def do_POST(self):
                n = int(self.headers.get("Content-Length", 0))
                stub.bodies.append(self.rfile.read(n))
                i = min(len(stub.bodies) - 1, len(stub.statuses) - 1)
                self.send_response(stub.statuses[i])
                self.send_header("Content-Length", "0")
                self.end_headers()

            def log_message(self, *args):
                pass

        self.httpd = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}/hook"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def hits(self) -> int:
        return len(self.bodies)

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    s = StubServer()
    yield s
    s.close()


@pytest.fixture
def no_sleep(monkeypatch):
    """Record webhook backoff waits instead of sleeping."""
    waits: list[float] = []
    monkeypatch.setattr("wearqc.webhook.time.sleep", waits.append)
    return waits


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """``report(n, ok, detail)`` records one PASS/FAIL line and fails the test when not ok."""
    def report(n: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}"
        _CRITERIA[n] = line
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
