"""CSV/JSON writers with 17-significant-digit floats and atomic file replacement."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
import tempfile
from typing import Any, Iterable, Optional, Sequence

import click


def format_number(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    try:
        number = float(value)
    except (TypeError, ValueError):
        return str(value)
    return format(number, ".17g")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "tolist"):
        return _json_safe(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def render_json(payload: dict) -> str:
    return json.dumps(_json_safe(payload), indent=2) + "\n"


def write_text(text: str, out: Optional[Path]) -> None:
    """Write to ``out`` atomically, or to stdout when no path is given."""

    if out is None:
        click.echo(text, nl=False)
        return
    out = Path(out)
    directory = out.parent if str(out.parent) else Path(".")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{out.name}.", suffix=".tmp", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp_name, out)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise click.FileError(str(out), hint=str(exc)) from exc


def sidecar_path(out: Path, suffix: str = ".report.json") -> Path:
    return out.with_name(out.stem + suffix)
