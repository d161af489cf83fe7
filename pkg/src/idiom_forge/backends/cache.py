"""On-disk key-value cache for deterministic backend calls.

Keys are ``(backend kind, model id, request digest)``.  Values are JSON.  The
store is a single sqlite file, so several processes may share it; concurrent
writes of one key are last-write-wins, which is harmless because cached
backends are deterministic.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .base import ScorerRequest


class DiskCache:
    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        if self.path != ":memory:":
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False, timeout=30)
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS cache ("
            " kind TEXT, model TEXT, digest TEXT, value TEXT,"
            " PRIMARY KEY (kind, model, digest))"
        )
        self._conn.commit()

    def get_many(self, kind: str, model: str, digests: Sequence[str]) -> dict[str, Any]:
        found: dict[str, Any] = {}
        with self._lock:
            for d in set(digests):
                row = self._conn.execute(
                    "SELECT value FROM cache WHERE kind=? AND model=? AND digest=?", (kind, model, d)
                ).fetchone()
                if row is not None:
                    found[d] = json.loads(row[0])
        return found

    def put_many(self, kind: str, model: str, items: dict[str, Any]) -> None:
        with self._lock:
            self._conn.executemany(
                "INSERT OR REPLACE INTO cache VALUES (?, ?, ?, ?)",
                [(kind, model, d, json.dumps(v)) for d, v in items.items()],
            )
            self._conn.commit()

    def __len__(self):
        with self._lock:
            return self._conn.execute("SELECT COUNT(*) FROM cache").fetchone()[0]

    def close(self):
        self._conn.close()


class CachedScorer:
    """Scorer wrapper that only forwards requests whose digest is not cached.

    Duplicate requests inside one batch are also collapsed before reaching
    the wrapped scorer.
    """

    def __init__(self, inner, cache: DiskCache):
        self.inner = inner
        self.cache = cache
        self.kind = inner.kind
        self.model_id = inner.model_id

    def score_batch(self, requests: Sequence[ScorerRequest]) -> list[float]:
        digests = [r.digest() for r in requests]
        known = self.cache.get_many(self.kind, self.model_id, digests)
        todo: dict[str, ScorerRequest] = {}
        for d, r in zip(digests, requests):
            if d not in known and d not in todo:
                todo[d] = r
        if todo:
            fresh = self.inner.score_batch(list(todo.values()))
            new = dict(zip(todo.keys(), fresh))
            self.cache.put_many(self.kind, self.model_id, new)
            known.update(new)
        return [float(known[d]) for d in digests]

    def describe(self) -> dict:
        return {**_describe(self.inner), "cached": True}


class CachedEmbedder:
    def __init__(self, inner, cache: DiskCache):
        self.inner = inner
        self.cache = cache
        self.model_id = inner.model_id

    def embed(self, text: str) -> np.ndarray:
        d = ScorerRequest(text, text).digest()
        hit = self.cache.get_many("embedder", self.model_id, [d])
        if d in hit:
            return np.asarray(hit[d], dtype=np.float64)
        vec = np.asarray(self.inner.embed(text), dtype=np.float64)
        self.cache.put_many("embedder", self.model_id, {d: vec.tolist()})
        return vec

    def describe(self) -> dict:
        return {**_describe(self.inner), "cached": True}


class CachedJudge:
    def __init__(self, inner, cache: DiskCache):
        self.inner = inner
        self.cache = cache
        self.model_id = inner.model_id

    def judge(self, prediction: str, reference: str) -> int:
        d = ScorerRequest(prediction, prediction, reference).digest()
        hit = self.cache.get_many("judge", self.model_id, [d])
        if d in hit:
            return int(hit[d])
        value = int(self.inner.judge(prediction, reference))
        self.cache.put_many("judge", self.model_id, {d: value})
        return value

    def describe(self) -> dict:
        return {**_describe(self.inner), "cached": True}


def _describe(obj) -> dict:
    fn = getattr(obj, "describe", None)
    return fn() if fn else {"model_id": obj.model_id}
