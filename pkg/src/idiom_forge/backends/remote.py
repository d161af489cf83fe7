"""HTTP clients for backends that live in another process or machine.

Wire formats (all JSON over POST):

* scorers: ``{"model": id, "requests": [{"src", "mt", "ref"?}, ...]}`` ->
  ``{"scores": [float, ...]}``
* embedder: ``{"model": id, "input": [text, ...]}`` ->
  ``{"data": [{"embedding": [float, ...]}, ...]}``
* generator: OpenAI-style ``/chat/completions`` payload ->
  ``{"choices": [{"message": {"content": text}}]}``
"""

from __future__ import annotations

import json
import logging
import re
import urllib.error
import urllib.request
from importlib import resources
from typing import Any, Callable, Sequence

import numpy as np

from ..templating import render
from .base import (
    DEFAULT_TEMPERATURE,
    BackendConfig,
    BackendError,
    JudgeParseError,
    ScorerRequest,
    TransportError,
    clamp_unit,
    with_retries,
)

log = logging.getLogger(__name__)

JUDGE_TEMPLATE_NAME = "judge_rubric_v1.txt"


def post_json(url: str, payload: dict, timeout: float) -> Any:
    data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code >= 500 or exc.code == 429:
            raise TransportError(f"HTTP {exc.code} from {url}") from exc
        raise BackendError(f"HTTP {exc.code} from {url}: {exc.read()[:200]!r}") from exc
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise BackendError(f"non-JSON response from {url}") from exc


class _HttpClient:
    def __init__(self, config: BackendConfig, sleep: Callable[[float], None] | None = None):
        if not config.url:
            raise ValueError(f"{config.kind} backend {config.endpoint_or_model_id!r} has no url")
        self.config = config
        self.model_id = config.endpoint_or_model_id
        self._sleep = sleep

    def _post(self, payload: dict, what: str) -> Any:
        kwargs = {} if self._sleep is None else {"sleep": self._sleep}
        return with_retries(lambda: post_json(self.config.url, payload, self.config.timeout),
                            self.config.max_retries, what, **kwargs)

    def describe(self) -> dict:
        return {"kind": self.config.kind, "model_id": self.model_id, "url": self.config.url}


class HttpScorer(_HttpClient):
    def __init__(self, config: BackendConfig, **kw):
        if config.kind not in ("ref_free_scorer", "ref_based_scorer"):
            raise ValueError(f"not a scorer config: {config.kind}")
        super().__init__(config, **kw)
        self.kind = config.kind

    def score_batch(self, requests: Sequence[ScorerRequest]) -> list[float]:
        scores: list[float] = []
        bs = self.config.batch_size
        for start in range(0, len(requests), bs):
            chunk = requests[start:start + bs]
            for req in chunk:
                if (req.reference is not None) != (self.kind == "ref_based_scorer"):
                    raise ValueError(f"{self.kind} got a request with reference={req.reference!r}")
            body = self._post({"model": self.model_id, "requests": [r.to_wire() for r in chunk]},
                              f"{self.kind} batch@{start}")
            got = body.get("scores") if isinstance(body, dict) else None
            if not isinstance(got, list) or len(got) != len(chunk):
                raise BackendError(f"{self.kind}: expected {len(chunk)} scores, got {got!r}")
            scores.extend(clamp_unit(s, f"{self.model_id} score") for s in got)
        return scores


class HttpEmbedder(_HttpClient):
    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        body = self._post({"model": self.model_id, "input": [text]}, "embed")
        try:
            vec = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError):
            raise BackendError(f"malformed embedding response: {str(body)[:200]}") from None
        return np.asarray(vec, dtype=np.float64)


class ChatGenerator(_HttpClient):
    """Client for an OpenAI-compatible chat completions endpoint (vLLM, TGI, ...)."""

    def generate(self, prompt: str, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = 256, prompt_id: str | None = None) -> str:
        if not prompt:
            raise ValueError("empty prompt")
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        try:
            body = self._post(payload, f"generate[{prompt_id}]")
            return body["choices"][0]["message"]["content"]
        except TransportError as exc:
            raise TransportError(f"prompt {prompt_id}: {exc}") from exc
        except (KeyError, IndexError, TypeError):
            raise BackendError(f"prompt {prompt_id}: malformed completion response") from None


def load_judge_template() -> str:
    return resources.files(__package__).joinpath("templates", JUDGE_TEMPLATE_NAME).read_text("utf-8")


_SCORE_RE = re.compile(r"^\D*([1-5])\D*$")


def parse_judge_score(text: str) -> int:
    lines = [ln.strip() for ln in (text or "").splitlines() if ln.strip()]
    if not lines:
        raise JudgeParseError("empty judge output")
    m = _SCORE_RE.match(lines[-1])
    if not m:
        raise JudgeParseError(f"no 1-5 score on final line: {lines[-1][:80]!r}")
    return int(m.group(1))


class GeneratorJudge:
    """LLM-as-judge built on any generator; retries once on unparseable output."""

    def __init__(self, generator, template: str | None = None, temperature: float = 0.0):
        self.generator = generator
        self.template = template if template is not None else load_judge_template()
        self.temperature = temperature
        self.model_id = generator.model_id

    def judge(self, prediction: str, reference: str) -> int:
        if not prediction.strip() or not reference.strip():
            raise ValueError("judge inputs must be non-empty")
        prompt = render(self.template, {"prediction": prediction, "reference": reference})
        last: JudgeParseError | None = None
        for _ in range(2):
            out = self.generator.generate(prompt, temperature=self.temperature, max_tokens=256)
            try:
                return parse_judge_score(out)
            except JudgeParseError as exc:
                log.warning("judge output unparseable: %s", exc)
                last = exc
        raise JudgeParseError(f"judge output unparseable after retry: {last}")

    def describe(self) -> dict:
        return {"kind": "judge", "model_id": self.model_id, "template": JUDGE_TEMPLATE_NAME}
