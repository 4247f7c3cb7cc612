import pytest

from voldecomp import UsageError, settings


@pytest.fixture(autouse=True)
def _no_dotenv(monkeypatch):
    monkeypatch.setattr(settings, "_ensure_dotenv_loaded", lambda: None)
    monkeypatch.delenv(settings.WORKERS_ENV, raising=False)


def test_worker_count_defaults_to_one():
    assert settings.worker_count() == settings.DEFAULT_WORKERS == 1


def test_worker_count_reads_the_environment(monkeypatch):
    monkeypatch.setenv(settings.WORKERS_ENV, " 4 ")
    assert settings.worker_count() == 4


def test_override_wins_over_environment(monkeypatch):
    monkeypatch.setenv(settings.WORKERS_ENV, "4")
    assert settings.worker_count(2) == 2


@pytest.mark.parametrize("raw", ["zero", "0", "-3", "1.5"])
def test_invalid_environment_value(monkeypatch, raw):
    monkeypatch.setenv(settings.WORKERS_ENV, raw)
    with pytest.raises(UsageError, match=settings.WORKERS_ENV):
        settings.worker_count()


def test_invalid_override():
    with pytest.raises(UsageError):
        settings.worker_count(0)


def test_webhook_url_is_optional(monkeypatch):
    monkeypatch.delenv("SLACK_WEBHOOK_URL", raising=False)
    assert settings.slack_webhook_url() is None
    monkeypatch.setenv("SLACK_WEBHOOK_URL", "  https://example.com/hook ")
    assert settings.slack_webhook_url() == "https://example.com/hook"


def test_notifications_in_dev_need_opt_in(monkeypatch):
    monkeypatch.setenv("PYTHON_ENV", "dev")
    monkeypatch.delenv("SLACK_NOTIFY_IN_DEV", raising=False)
    assert settings.notifications_enabled() is False
    monkeypatch.setenv("SLACK_NOTIFY_IN_DEV", "yes")
    assert settings.notifications_enabled() is True
    monkeypatch.setenv("PYTHON_ENV", "production")
    monkeypatch.delenv("SLACK_NOTIFY_IN_DEV")
    assert settings.notifications_enabled() is True
