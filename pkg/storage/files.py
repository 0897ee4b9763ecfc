"""
File primitives: atomic writes, JSON / JSON-lines decoding, fixed-point JSON.
"""

import json
import os
import tempfile
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from core.errors import ParseError


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _read_text(path: str | Path) -> str:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise ParseError(str(path), f"cannot read file: {e}") from e
    if raw.startswith(b"\xef\xbb\xbf"):
        raise ParseError(str(path), "UTF-8 byte order mark is not allowed")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(str(path), f"invalid UTF-8: {e}") from e


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise ParseError(str(path), f"malformed JSON: {e}") from e


def read_jsonl(path: str | Path) -> list[Any]:
    records = []
    for number, line in enumerate(_read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ParseError(str(path), f"line {number}: malformed JSON: {e}") from e
    return records


def dumps_line(record: Any) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def write_jsonl(path: str | Path, records: Iterable[Any]) -> None:
    atomic_write_text(path, "".join(dumps_line(r) + "\n" for r in records))


def write_json(path: str | Path, document: Any) -> None:
    atomic_write_text(path, json.dumps(document, ensure_ascii=False, indent=2) + "\n")


def dumps_fixed(value: Any, decimals: int = 6, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written in fixed-point notation."""
    pad = " " * (indent * (_level + 1))
    closing = " " * (indent * _level)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, float):
        return f"{value:.{decimals}f}"
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: "
            f"{dumps_fixed(v, decimals, indent, _level + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{closing}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{dumps_fixed(v, decimals, indent, _level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{closing}]"
    raise TypeError(f"cannot serialize {type(value).__name__}")
