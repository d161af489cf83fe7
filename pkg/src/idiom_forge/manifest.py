"""Run manifests: what command ran, on which inputs, with which settings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int
    argv: list[str] = field(default_factory=list)
    input_digests: dict[str, str] = field(default_factory=dict)
    backends_digest: str = ""
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    tool_version: str = __version__

    def add_input(self, path) -> None:
        self.input_digests[str(path)] = file_digest(path)

    def to_text(self) -> str:
        lines = [
            f"command = {self.command}",
            f"argv = {json.dumps(self.argv, ensure_ascii=False)}",
            f"config_digest = {self.config_digest}",
            f"backends_digest = {self.backends_digest}",
            f"seed = {self.seed}",
            f"timestamp = {self.timestamp}",
            f"tool_version = {self.tool_version}",
        ]
        lines += [f"input_digest.{p} = {d}" for p, d in sorted(self.input_digests.items())]
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


def read_manifest(path) -> RunManifest:
    values: dict[str, str] = {}
    inputs: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        if key.startswith("input_digest."):
            inputs[key[len("input_digest."):]] = value
        else:
            values[key] = value
    return RunManifest(
        command=values["command"],
        config_digest=values["config_digest"],
        seed=int(values["seed"]),
        argv=json.loads(values.get("argv", "[]")),
        input_digests=inputs,
        backends_digest=values.get("backends_digest", ""),
        timestamp=values["timestamp"],
        tool_version=values["tool_version"],
    )
