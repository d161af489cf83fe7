"""Pluggable scoring, embedding, generation and judging clients."""

from .base import (
    DEFAULT_TEMPERATURE,
    KINDS,
    BackendConfig,
    BackendError,
    JudgeParseError,
    ScorerRequest,
    TransportError,
    clamp_unit,
    cosine_similarity,
    score_reference_based,
    score_reference_free,
    with_retries,
)
from .cache import CachedEmbedder, CachedJudge, CachedScorer, DiskCache
from .config import Backends, build_backends, load_backends, read_config, stub_backends
from .remote import ChatGenerator, GeneratorJudge, HttpEmbedder, HttpScorer, parse_judge_score
from .stub import StubEmbedder, StubGenerator, StubJudge, StubScorer, f1_band

__all__ = [
    "DEFAULT_TEMPERATURE", "KINDS", "BackendConfig", "BackendError", "JudgeParseError",
    "ScorerRequest", "TransportError", "clamp_unit", "cosine_similarity",
    "score_reference_based", "score_reference_free", "with_retries",
    "CachedEmbedder", "CachedJudge", "CachedScorer", "DiskCache",
    "Backends", "build_backends", "load_backends", "read_config", "stub_backends",
    "ChatGenerator", "GeneratorJudge", "HttpEmbedder", "HttpScorer", "parse_judge_score",
    "StubEmbedder", "StubGenerator", "StubJudge", "StubScorer", "f1_band",
]
