"""Layered JSON settings, logging setup and worker-count policy."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
import sys
from typing import Any, Mapping, Optional, TextIO


THREADS_ENV = "HYPERFRAC_THREADS"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(funcName)s -  %(message)s"
LOG_DATEFMT = "%Y.%m.%d %H:%M:%S"
NOISY_LOGGERS = ("numexpr", "matplotlib")


def _resolve_root_path() -> Path:
    here = Path(__file__).resolve()
    for parent in [here.parent, *here.parents]:
        if (parent / "settings.default.json").is_file():
            return parent
    return here.parent


ROOT_PATH = _resolve_root_path()


def as_bool(value, default: bool = False) -> bool:
    """Normalize JSON/CLI boolean values consistently."""

    if value is None:
        return default
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    if isinstance(value, str):
        normalized = value.strip().lower()
        if normalized in ("1", "true", "yes", "on"):
            return True
        if normalized in ("0", "false", "no", "off"):
            return False
    return default


def _merge_settings(base: dict, override: dict) -> dict:
    """Return settings with nested dict values from override applied to base."""
    result = dict(base or {})
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _merge_settings(result[key], value)
        else:
            result[key] = value
    return result


def _read_json_file(path: Path | str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return data if isinstance(data, dict) else {}
    except (OSError, ValueError):
        return {}


def load_settings(override_path: Optional[Path | str] = None) -> dict:
    """Load the packaged defaults and merge an optional user JSON on top."""

    defaults = _read_json_file(ROOT_PATH / "settings.default.json")
    if override_path is None:
        return defaults
    return _merge_settings(defaults, _read_json_file(override_path))


def section(settings: Mapping[str, Any], name: str) -> dict:
    """Return one settings section, tolerating missing or malformed entries."""

    value = (settings or {}).get(name, {})
    return value if isinstance(value, dict) else {}


def worker_count(
    settings: Optional[Mapping[str, Any]] = None,
    *,
    environ: Optional[Mapping[str, str]] = None,
    cpu_count: Optional[int] = None,
) -> int:
    """Resolve the worker cap from HYPERFRAC_THREADS, then settings, then the CPU count."""

    env = os.environ if environ is None else environ
    cpus = max(1, cpu_count if cpu_count is not None else (os.cpu_count() or 1))
    for raw in (env.get(THREADS_ENV, ""), section(settings or {}, "general").get("threads")):
        try:
            value = int(str(raw).strip())
        except (TypeError, ValueError):
            continue
        if value > 0:
            return min(value, cpus)
    return cpus


def configure_logging(debug: bool = False, stream: Optional[TextIO] = None) -> None:
    """Install a single formatted stream handler on the root logger."""

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)
    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(formatter)
    level = logging.DEBUG if debug else logging.INFO
    handler.setLevel(level)
    root.addHandler(handler)
    root.setLevel(level)

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.DEBUG if debug else logging.WARNING)
