"""Backend configuration files and the bundle of clients a run needs.

Config files are INI-style; one section per backend kind::

    [ref_free_scorer]
    model = Unbabel/wmt22-cometkiwi-da
    url = http://localhost:8001/score
    batch_size = 16
    timeout = 120
    max_retries = 3
    cache = true

    [cache]
    path = .cache/idiom_forge.sqlite

A kind whose section is missing falls back to its stub backend.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .base import KINDS, BackendConfig
from .cache import CachedEmbedder, CachedJudge, CachedScorer, DiskCache
from .remote import ChatGenerator, GeneratorJudge, HttpEmbedder, HttpScorer
from .stub import StubEmbedder, StubGenerator, StubJudge, StubScorer

DEFAULT_MODELS = {
    "ref_free_scorer": "Unbabel/wmt22-cometkiwi-da",
    "ref_based_scorer": "Unbabel/wmt22-comet-da",
    "embedder": "sentence-embedding",
    "generator": "Qwen/Qwen2.5-3B",
    "judge": "prometheus-eval/prometheus-7b-v2.0",
}


@dataclass
class Backends:
    ref_free: Any
    ref_based: Any
    embedder: Any
    generator: Any
    judge: Any
    mode: str = "stub"

    def describe(self) -> dict:
        out = {"mode": self.mode}
        for name in ("ref_free", "ref_based", "embedder", "generator", "judge"):
            obj = getattr(self, name)
            fn = getattr(obj, "describe", None)
            out[name] = fn() if fn else {"model_id": obj.model_id}
        return out

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def stub_backends() -> Backends:
    return Backends(
        ref_free=StubScorer("ref_free_scorer"),
        ref_based=StubScorer("ref_based_scorer"),
        embedder=StubEmbedder(),
        generator=StubGenerator(),
        judge=StubJudge(),
        mode="stub",
    )


def read_config(path) -> tuple[dict[str, BackendConfig], str | None]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    configs: dict[str, BackendConfig] = {}
    for kind in KINDS:
        if not parser.has_section(kind):
            continue
        sec = parser[kind]
        configs[kind] = BackendConfig(
            kind=kind,
            endpoint_or_model_id=sec.get("model", DEFAULT_MODELS[kind]),
            batch_size=sec.getint("batch_size", 8),
            timeout=sec.getfloat("timeout", 60.0),
            max_retries=sec.getint("max_retries", 3),
            cache_enabled=sec.getboolean("cache", False),
            url=sec.get("url"),
        )
    cache_path = parser.get("cache", "path", fallback=None)
    return configs, cache_path


def build_backends(configs: dict[str, BackendConfig], cache_path: str | None = None) -> Backends:
    b = stub_backends()
    cache = DiskCache(cache_path) if cache_path else DiskCache(":memory:")
    if "ref_free_scorer" in configs:
        b.ref_free = HttpScorer(configs["ref_free_scorer"])
    if "ref_based_scorer" in configs:
        b.ref_based = HttpScorer(configs["ref_based_scorer"])
    if "embedder" in configs:
        b.embedder = HttpEmbedder(configs["embedder"])
    if "generator" in configs:
        b.generator = ChatGenerator(configs["generator"])
    if "judge" in configs:
        b.judge = GeneratorJudge(ChatGenerator(configs["judge"]))
    wrap = {"ref_free_scorer": ("ref_free", CachedScorer), "ref_based_scorer": ("ref_based", CachedScorer),
            "embedder": ("embedder", CachedEmbedder), "judge": ("judge", CachedJudge)}
    for kind, (attr, cls) in wrap.items():
        if kind in configs and configs[kind].cache_enabled:
            setattr(b, attr, cls(getattr(b, attr), cache))
    b.mode = "live" if configs else "stub"
    return b


def load_backends(choice: str | None = "stub", config_path=None) -> Backends:
    """Resolve a ``--backends`` value: ``stub``, ``live`` (reads ``config_path``) or a config path."""
    if choice in (None, "stub"):
        return stub_backends()
    path = config_path if choice == "live" else choice
    if path is None:
        raise ValueError("--backends live needs --config PATH")
    configs, cache_path = read_config(path)
    return build_backends(configs, cache_path)
