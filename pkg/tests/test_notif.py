import pytest
import requests

import voldecomp.notif as notif
from voldecomp import settings
from voldecomp.notif import Severity, send_notification_to_slack


class DummyResponse:
    def __init__(self, status_code: int, text: str = "ok", headers: dict | None = None):
        self.status_code = status_code
        self.text = text
        self.headers = headers or {}


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    monkeypatch.setattr(settings, "_ensure_dotenv_loaded", lambda: None)
    monkeypatch.delenv("PYTHON_ENV", raising=False)
    monkeypatch.delenv("SLACK_NOTIFY_IN_DEV", raising=False)
    monkeypatch.setenv("SLACK_WEBHOOK_URL", "https://example.com/webhook")


def test_missing_webhook_skips(monkeypatch):
    monkeypatch.delenv("SLACK_WEBHOOK_URL", raising=False)

    called = {"value": False}

    def fake_post(*_args, **_kwargs):
        called["value"] = True
        return DummyResponse(200)

    monkeypatch.setattr(notif.requests, "post", fake_post)

    status = send_notification_to_slack(Severity.Info, "hello")
    assert status == 0
    assert called["value"] is False


def test_dev_environment_is_quiet_unless_opted_in(monkeypatch):
    monkeypatch.setenv("PYTHON_ENV", "dev")
    monkeypatch.setattr(notif.requests, "post", lambda *_a, **_k: DummyResponse(200))
    assert send_notification_to_slack(Severity.Info, "hello") == 0

    monkeypatch.setenv("SLACK_NOTIFY_IN_DEV", "1")
    assert send_notification_to_slack(Severity.Info, "hello", max_attempts=1) == 200


def test_success_posts_json(monkeypatch):
    captured = {}

    def fake_post(url, json=None, timeout=None):
        captured["url"] = url
        captured["json"] = json
        captured["timeout"] = timeout
        return DummyResponse(200)

    monkeypatch.setattr(notif.requests, "post", fake_post)

    status = send_notification_to_slack(Severity.Warn, "battery done", max_attempts=1)
    assert status == 200
    assert captured["url"] == "https://example.com/webhook"
    assert captured["timeout"] == notif.DEFAULT_TIMEOUT_SECONDS
    assert captured["json"]["text"].startswith("[WARNING]")
    assert "battery done" in captured["json"]["text"]


def test_rate_limit_retries(monkeypatch):
    calls = {"count": 0}

    def fake_post(_url, json=None, timeout=None):
        calls["count"] += 1
        if calls["count"] == 1:
            return DummyResponse(429, text="rate limited")
        return DummyResponse(200)

    monkeypatch.setattr(notif.requests, "post", fake_post)

    status = send_notification_to_slack(Severity.Info, "hi", max_attempts=2, retry_wait_seconds=0)
    assert status == 200
    assert calls["count"] == 2


@pytest.mark.parametrize(("header", "expected"), [("7", 7.0), ("soon", 0.0), (None, 0.0)])
def test_rate_limit_honours_retry_after(monkeypatch, header, expected):
    responses = iter([
        DummyResponse(429, headers={} if header is None else {"Retry-After": header}),
        DummyResponse(200),
    ])
    slept = []
    monkeypatch.setattr(notif.requests, "post", lambda *_a, **_k: next(responses))
    monkeypatch.setattr(notif.time, "sleep", slept.append)

    assert send_notification_to_slack(Severity.Info, "hi", max_attempts=2, retry_wait_seconds=0) == 200
    assert slept == [expected]


def test_client_error_is_not_retried(monkeypatch):
    calls = {"count": 0}

    def fake_post(_url, json=None, timeout=None):
        calls["count"] += 1
        return DummyResponse(404, text="no_service")

    monkeypatch.setattr(notif.requests, "post", fake_post)

    assert send_notification_to_slack(Severity.Crit, "hi", max_attempts=3, retry_wait_seconds=0) is None
    assert calls["count"] == 1


def test_network_errors_give_up_after_all_attempts(monkeypatch):
    calls = {"count": 0}

    def fake_post(_url, json=None, timeout=None):
        calls["count"] += 1
        raise requests.ConnectionError("unreachable")

    monkeypatch.setattr(notif.requests, "post", fake_post)

    assert send_notification_to_slack(Severity.Crit, "hi", max_attempts=3, retry_wait_seconds=0) is None
    assert calls["count"] == 3
