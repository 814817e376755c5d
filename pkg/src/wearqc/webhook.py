"""Webhook delivery of compliance alerts with bounded retries."""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass

__all__ = ["DeliveryResult", "alert_payload", "validate_url", "post_webhook"]


@dataclass(frozen=True)
class DeliveryResult:
    ok: bool
    attempts: int
    status: int | None = None
    error: str | None = None


def validate_url(url) -> str | None:
    """Reason the URL is unusable, or None when it is a well-formed http(s) URL."""
    if not isinstance(url, str) or not url.strip():
        return "empty URL"
    try:
        parts = urllib.parse.urlsplit(url)
        parts.port  # raises on a non-numeric port
    except ValueError as exc:
        return f"malformed URL: {exc}"
    if parts.scheme not in ("http", "https"):
        return f"unsupported URL scheme {parts.scheme!r}"
    if not parts.hostname:
        return "URL has no host"
    if any(c.isspace() for c in url):
        return "URL contains whitespace"
    return None


def alert_payload(alert) -> dict:
    return {
        "participant_id": alert.participant_id,
        "evaluated_at": alert.evaluated_at,
        "hours_in_lookback": alert.hours_in_lookback,
        "rule": {"min_hours": alert.rule.min_hours, "lookback_h": alert.rule.lookback_h},
        "message": alert.message,
    }


def _retryable(status: int) -> bool:
    return status >= 500 or status in (408, 429)


def post_webhook(alert, url: str, timeout_s: float = 10.0, attempts: int = 3,
                 backoff_s: float = 1.0, sleep=None) -> DeliveryResult:
    """POST the alert as JSON. Never raises.

    Up to ``attempts`` tries, waiting ``backoff_s * 2**i`` between them.
    Other 4xx answers are final: retrying cannot fix the request.
    """
    reason = validate_url(url)
    if reason is not None:
        return DeliveryResult(False, 0, None, reason)
    sleep = sleep or time.sleep
    body = json.dumps(alert_payload(alert), sort_keys=True).encode("utf-8")
    status, error = None, None
    for i in range(attempts):
        if i:
            sleep(backoff_s * 2 ** (i - 1))
        req = urllib.request.Request(url, data=body, method="POST",
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=timeout_s) as resp:
                status = resp.status
            if 200 <= status < 300:
                return DeliveryResult(True, i + 1, status, None)
            error = f"HTTP {status}"
        except urllib.error.HTTPError as exc:
            status, error = exc.code, f"HTTP {exc.code}"
            if not _retryable(exc.code):
                return DeliveryResult(False, i + 1, status, error)
        except (urllib.error.URLError, OSError, ValueError) as exc:
            status, error = None, str(getattr(exc, "reason", exc))
    return DeliveryResult(False, attempts, status, error)
