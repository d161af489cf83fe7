"""Line-delimited JSON helpers shared by the corpus, reward, batch and trace files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator


class RecordFormatError(ValueError):
    """A line in a record file could not be parsed."""

    def __init__(self, path, lineno: int, reason: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}")


def dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def write_records(path, records: Iterable[dict[str, Any]]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")
    return path


def iter_records(path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, record)`` pairs, skipping blank lines.

    Raises FileNotFoundError for a missing path and RecordFormatError naming the
    line for anything that is not a JSON object.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(path, lineno, f"invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise RecordFormatError(path, lineno, "record is not an object")
            yield lineno, rec
