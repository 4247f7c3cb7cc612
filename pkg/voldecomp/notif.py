import logging
import time
from enum import StrEnum

import requests
from requests.exceptions import RequestException
from tenacity import (
    RetryCallState,
    RetryError,
    Retrying,
    retry_if_exception,
    stop_after_attempt,
)

from voldecomp import settings

logger = logging.getLogger(__name__)


class Severity(StrEnum):
    Info = '[INFO]'
    Warn = '[WARNING]'
    Crit = '[CRIT]'


TOO_MANY_REQUESTS_ERR_CODE = 429
DEFAULT_RETRY_ATTEMPTS = 3
DEFAULT_RETRY_WAIT_SECONDS = 5
DEFAULT_TIMEOUT_SECONDS = 10


class _RetryableStatus(Exception):
    def __init__(self, status: int, retry_after: int | None = None) -> None:
        super().__init__(f"Slack HTTP {status}")
        self.status = status
        self.retry_after = retry_after


def _parse_retry_after(value: str | None) -> int | None:
    if value is None:
        return None
    try:
        return max(0, int(value))
    except ValueError:
        return None


def _is_retryable(exc: BaseException) -> bool:
    return isinstance(exc, (RequestException, _RetryableStatus))


def _wait_with_retry_after(fallback_seconds: int):
    """Honour a 429 Retry-After header; otherwise wait the fixed fallback."""

    def wait(state: RetryCallState) -> float:
        exc = state.outcome.exception() if state.outcome else None
        if isinstance(exc, _RetryableStatus) and exc.retry_after is not None:
            return float(exc.retry_after)
        return float(fallback_seconds)

    return wait


def _post_once(webhook_url: str, payload: dict, timeout_seconds: int) -> int | None:
    response = requests.post(webhook_url, json=payload, timeout=timeout_seconds)
    status = response.status_code
    if status == TOO_MANY_REQUESTS_ERR_CODE:
        raise _RetryableStatus(status, _parse_retry_after(response.headers.get("Retry-After")))
    if status >= 500:
        raise _RetryableStatus(status)
    if 400 <= status < 500:
        details = (response.text or "").strip()[:200]
        logger.warning("Slack HTTP %s; not retrying%s", status, f" | {details}" if details else "")
        return None
    return status


def send_notification_to_slack(
    severity: Severity,
    message: str,
    *,
    webhook_url: str | None = None,
    max_attempts: int = DEFAULT_RETRY_ATTEMPTS,
    retry_wait_seconds: int = DEFAULT_RETRY_WAIT_SECONDS,
    timeout_seconds: int = DEFAULT_TIMEOUT_SECONDS,
) -> int | None:
    """
    Post `severity` + `message` to the configured webhook.

    Returns the HTTP status on success, 0 when no webhook is configured or
    notifications are disabled, and None when delivery failed.
    """
    if not settings.notifications_enabled():
        logger.info("notifications disabled in dev; skipping Slack notification")
        return 0
    webhook_url = webhook_url or settings.slack_webhook_url()
    if not webhook_url:
        logger.info("SLACK_WEBHOOK_URL not set; skipping Slack notification")
        return 0

    payload = {"text": severity + '\n' + message}
    retrying = Retrying(
        stop=stop_after_attempt(max_attempts),
        wait=_wait_with_retry_after(retry_wait_seconds),
        sleep=time.sleep,
        retry=retry_if_exception(_is_retryable),
        before_sleep=lambda state: logger.warning(
            "Slack delivery failed (attempt %d/%d): %s",
            state.attempt_number,
            max_attempts,
            state.outcome.exception(),
        ),
    )
    try:
        status = retrying(_post_once, webhook_url, payload, timeout_seconds)
    except RetryError as exc:
        logger.warning("Slack delivery gave up after %d attempts: %s", max_attempts, exc.last_attempt.exception())
        return None
    if status is not None:
        logger.info("Slack notification sent")
    return status
