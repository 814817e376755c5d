from __future__ import annotations

import json
import socket

import pytest

from wearqc.compliance import AlertRule, evaluate_alerts
from wearqc.intervals import IntervalSet
from wearqc.webhook import post_webhook, validate_url


@pytest.fixture
def alert():
    return evaluate_alerts(IntervalSet([(0.0, 3600.0)]), 86400.0, AlertRule(), "p3")[0]


def test_success(stub_server, alert, no_sleep):
    res = post_webhook(alert, stub_server.url)
    assert res.ok and res.attempts == 1 and res.status == 200 and no_sleep == []
    body = json.loads(stub_server.bodies[0])
    assert set(body) == {"participant_id", "evaluated_at", "hours_in_lookback", "rule", "message"}
    assert body["hours_in_lookback"] == 1.0 and body["rule"] == {"min_hours": 8.0, "lookback_h": 24.0}


def test_three_500s(stub_server, alert, no_sleep):
    stub_server.statuses = [500]
    res = post_webhook(alert, stub_server.url)
    assert not res.ok and res.attempts == 3 and res.status == 500
    assert stub_server.hits == 3
    assert no_sleep == [1.0, 2.0]


def test_recovers_on_retry(stub_server, alert, no_sleep):
    stub_server.statuses = [503, 429, 204]
    res = post_webhook(alert, stub_server.url)
    assert res.ok and res.attempts == 3 and stub_server.hits == 3


def test_client_error_not_retried(stub_server, alert, no_sleep):
    stub_server.statuses = [404]
    res = post_webhook(alert, stub_server.url)
    assert not res.ok and res.attempts == 1 and res.status == 404 and stub_server.hits == 1


@pytest.mark.parametrize("url", ["", "not a url", "ftp://host/x", "http://", "http://host:port/x",
                                 "http://exa mple.com/"])
def test_malformed_rejected_before_network(url, alert, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("network touched")
    monkeypatch.setattr("urllib.request.urlopen", boom)
    assert validate_url(url) is not None
    res = post_webhook(alert, url)
    assert not res.ok and res.attempts == 0 and res.error


def test_connection_refused(alert, no_sleep):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    res = post_webhook(alert, f"http://127.0.0.1:{port}/", timeout_s=2)
    assert not res.ok and res.attempts == 3 and res.status is None and res.error
