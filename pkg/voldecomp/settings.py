import os
from pathlib import Path

from dotenv import load_dotenv

from voldecomp import UsageError

_DOTENV_LOADED = False

WORKERS_ENV = "VOLDECOMP_WORKERS"
DEFAULT_WORKERS = 1


def _find_env_path() -> Path | None:
    for parent in Path(__file__).resolve().parents:
        candidate = parent / ".env"
        if candidate.exists():
            return candidate
    return None


def _ensure_dotenv_loaded() -> None:
    global _DOTENV_LOADED
    if _DOTENV_LOADED:
        return
    env_path = _find_env_path()
    if env_path is not None:
        load_dotenv(env_path)
    _DOTENV_LOADED = True


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in {"1", "true", "yes", "on"}


def worker_count(override: int | None = None) -> int:
    """Effective worker count: CLI override first, then VOLDECOMP_WORKERS, then 1."""
    if override is not None:
        if override < 1:
            raise UsageError(f"--workers must be a positive integer, got {override}")
        return override

    # Keep env access lazy so importing the package never depends on the environment.
    _ensure_dotenv_loaded()
    raw = os.getenv(WORKERS_ENV, "").strip()
    if not raw:
        return DEFAULT_WORKERS
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def slack_webhook_url() -> str | None:
    _ensure_dotenv_loaded()
    return os.getenv("SLACK_WEBHOOK_URL", "").strip() or None


def notifications_enabled() -> bool:
    _ensure_dotenv_loaded()
    if os.getenv("PYTHON_ENV", "").strip().lower() == "dev":
        return _env_flag("SLACK_NOTIFY_IN_DEV")
    return True
