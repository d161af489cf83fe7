"""Deterministic offline backends.

They involve no model inference, so pipelines and reward algebra can be tested
bit-for-bit.  Scorers and the judge use token-level F1, the embedder hashes
tokens into a fixed-size count vector, and the generator recognises the known
prompt templates and returns tagged echoes of the idiom.
"""

from __future__ import annotations

import re
from typing import Sequence

import numpy as np

from ..textstats import fnv1a_64, token_f1, tokenize
from .base import DEFAULT_TEMPERATURE, ScorerRequest

EMBED_DIM = 256

_EXPLANATION_SENTINEL = "Explain the meaning of the following"
_LITERAL_SENTINEL = "Provide a **literal, word-by-word** English translation"
_FINAL_SENTINEL = "Produce a **natural English idiomatic translation**"
_TRANSLATE_RE = re.compile(r"^Translate the following .+? idiom into natural English: (.+)$", re.S)


class StubScorer:
    """Token-F1 scorer.  Reference-free mode compares source with translation;
    reference-based mode compares translation with reference and ignores the source."""

    def __init__(self, kind: str = "ref_free_scorer", model_id: str = "stub-token-f1"):
        if kind not in ("ref_free_scorer", "ref_based_scorer"):
            raise ValueError(f"not a scorer kind: {kind}")
        self.kind = kind
        self.model_id = model_id

    def score_batch(self, requests: Sequence[ScorerRequest]) -> list[float]:
        out = []
        for req in requests:
            if self.kind == "ref_free_scorer":
                out.append(token_f1(req.source, req.translation))
            else:
                if req.reference is None:
                    raise ValueError("reference-based scorer received a request without reference")
                out.append(token_f1(req.translation, req.reference))
        return out

    def describe(self) -> dict:
        return {"kind": self.kind, "model_id": self.model_id}


class StubEmbedder:
    def __init__(self, dim: int = EMBED_DIM, model_id: str = "stub-fnv-bag"):
        self.dim = dim
        self.model_id = model_id

    def bucket(self, token: str) -> int:
        return fnv1a_64(token.encode("utf-8")) % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for tok in tokenize(text):
            vec[self.bucket(tok)] += 1.0
        return vec

    def describe(self) -> dict:
        return {"kind": "embedder", "model_id": self.model_id, "dim": self.dim}


def _idiom_line(prompt: str) -> str | None:
    for line in prompt.splitlines():
        if line.startswith("Idiom: "):
            return line[len("Idiom: "):].rstrip()
    return None


class StubGenerator:
    def __init__(self, model_id: str = "stub-generator"):
        self.model_id = model_id

    def generate(self, prompt: str, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = 256, prompt_id: str | None = None) -> str:
        if not prompt:
            raise ValueError("empty prompt")
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        idiom = _idiom_line(prompt)
        if idiom is not None:
            if _FINAL_SENTINEL in prompt:
                return f"TRANSLATION({idiom})"
            if _LITERAL_SENTINEL in prompt:
                return f"LITERAL({idiom})"
            if _EXPLANATION_SENTINEL in prompt:
                return f"EXPLANATION({idiom})"
        m = _TRANSLATE_RE.match(prompt)
        if m:
            return f"TRANSLATION({m.group(1).strip()})"
        lines = [ln for ln in prompt.splitlines() if ln.strip()]
        return lines[-1] if lines else prompt

    def describe(self) -> dict:
        return {"kind": "generator", "model_id": self.model_id}


def f1_band(f1: float) -> int:
    """[0,.2)->1, [.2,.4)->2, [.4,.6)->3, [.6,.8)->4, [.8,1]->5."""
    # small tolerance so 0.6 computed as 0.59999... lands in the intended band
    return min(5, 1 + int(f1 * 5 + 1e-9))


class StubJudge:
    def __init__(self, model_id: str = "stub-f1-judge"):
        self.model_id = model_id

    def judge(self, prediction: str, reference: str) -> int:
        if not prediction.strip() or not reference.strip():
            raise ValueError("judge inputs must be non-empty")
        return f1_band(token_f1(prediction, reference))

    def describe(self) -> dict:
        return {"kind": "judge", "model_id": self.model_id}
