"""Backend contracts: requests, configuration, errors and retry policy."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass
from typing import Callable, Protocol, Sequence, TypeVar, runtime_checkable

import numpy as np

log = logging.getLogger(__name__)

KINDS = ("ref_free_scorer", "ref_based_scorer", "embedder", "generator", "judge")
DEFAULT_TEMPERATURE = 0.3

T = TypeVar("T")


class BackendError(RuntimeError):
    pass


class TransportError(BackendError):
    """The backend could not be reached or kept failing after retries."""


class JudgeParseError(BackendError):
    pass


@dataclass(frozen=True)
class ScorerRequest:
    source: str
    translation: str
    reference: str | None = None

    def __post_init__(self):
        if not self.source or not self.source.strip():
            raise ValueError("ScorerRequest.source must be non-empty")
        if not self.translation or not self.translation.strip():
            raise ValueError("ScorerRequest.translation must be non-empty")
        if self.reference is not None and not self.reference.strip():
            raise ValueError("ScorerRequest.reference must be non-empty when given")

    def digest(self) -> str:
        payload = json.dumps([self.source, self.translation, self.reference], ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_wire(self) -> dict:
        rec = {"src": self.source, "mt": self.translation}
        if self.reference is not None:
            rec["ref"] = self.reference
        return rec


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    endpoint_or_model_id: str
    batch_size: int = 8
    timeout: float = 60.0
    max_retries: int = 3
    cache_enabled: bool = False
    url: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()


@runtime_checkable
class Scorer(Protocol):
    kind: str
    model_id: str

    def score_batch(self, requests: Sequence[ScorerRequest]) -> list[float]: ...


@runtime_checkable
class Embedder(Protocol):
    model_id: str

    def embed(self, text: str) -> np.ndarray: ...


@runtime_checkable
class Generator(Protocol):
    model_id: str

    def generate(self, prompt: str, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = 256, prompt_id: str | None = None) -> str: ...

    def describe(self) -> dict: ...


@runtime_checkable
class Judge(Protocol):
    model_id: str

    def judge(self, prediction: str, reference: str) -> int: ...


def clamp_unit(value: float, what: str = "score") -> float:
    value = float(value)
    if value != value:
        raise BackendError(f"{what} is NaN")
    if value < 0.0 or value > 1.0:
        log.warning("%s %.6g outside [0, 1]; clamping", what, value)
        return min(1.0, max(0.0, value))
    return value


def score_reference_free(scorer: Scorer, source: str, translation: str) -> float:
    if scorer.kind != "ref_free_scorer":
        raise TypeError(f"expected a reference-free scorer, got {scorer.kind}")
    return scorer.score_batch([ScorerRequest(source, translation)])[0]


def score_reference_based(scorer: Scorer, source: str, translation: str, reference: str) -> float:
    if scorer.kind != "ref_based_scorer":
        raise TypeError(f"expected a reference-based scorer, got {scorer.kind}")
    if reference is None:
        raise ValueError("reference-based scoring needs a reference")
    return scorer.score_batch([ScorerRequest(source, translation, reference)])[0]


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def with_retries(fn: Callable[[], T], max_retries: int, what: str,
                 base_delay: float = 0.5, sleep: Callable[[float], None] = time.sleep) -> T:
    """Call ``fn`` up to ``max_retries + 1`` times with exponential backoff.

    Only transport-level failures (OSError, TimeoutError, TransportError) are
    retried; anything else propagates immediately.
    """
    attempt = 0
    while True:
        try:
            return fn()
        except (OSError, TimeoutError, TransportError) as exc:
            if attempt >= max_retries:
                raise TransportError(f"{what}: giving up after {attempt + 1} attempts: {exc}") from exc
            delay = base_delay * (2 ** attempt)
            log.warning("%s failed (%s); retry %d/%d in %.2fs", what, exc, attempt + 1, max_retries, delay)
            sleep(delay)
            attempt += 1
