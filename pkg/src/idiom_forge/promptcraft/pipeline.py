from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from ..backends.base import DEFAULT_TEMPERATURE
from ..corpus import IdiomPair, language_name
from ..jsonl import RecordFormatError, iter_records, write_records
from ..templating import render
from .templates import load_template

STAGES = ("explanation", "literal", "final")
STAGE_MAX_TOKENS = {"explanation": 128, "literal": 96, "final": 64}
METHOD_TAG = "training-free"


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, pair_id: str, cause: Exception | str):
        self.stage = stage
        self.pair_id = pair_id
        super().__init__(f"pair {pair_id}: stage {stage!r} failed: {cause}")


def _require(value: str, what: str) -> None:
    if not value or not value.strip():
        raise ValueError(f"{what} must be non-empty")


def build_explanation_prompt(idiom: str, language_name: str) -> str:
    _require(idiom, "idiom")
    _require(language_name, "language name")
    return render(load_template("explanation_v1"), {"lang": language_name, "idiom": idiom})


def build_literal_prompt(idiom: str, language_name: str) -> str:
    _require(idiom, "idiom")
    _require(language_name, "language name")
    return render(load_template("literal_v1"), {"lang": language_name, "idiom": idiom})


def build_final_prompt(idiom: str, explanation: str, literal: str) -> str:
    _require(idiom, "idiom")
    _require(explanation, "explanation")
    _require(literal, "literal")
    return render(load_template("final_v1"),
                  {"idiom": idiom, "explanation": explanation, "literal": literal})


@dataclass(frozen=True)
class PromptTrace:
    pair_id: str
    idiom: str
    language: str
    explanation: str
    literal: str
    final_translation: str
    stage_prompts: tuple[str, str, str]
    method_tag: str = METHOD_TAG

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["stage_prompts"] = list(self.stage_prompts)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "PromptTrace":
        prompts = rec["stage_prompts"]
        if not isinstance(prompts, list) or len(prompts) != 3:
            raise ValueError("stage_prompts must hold three prompts")
        return cls(rec["pair_id"], rec["idiom"], rec["language"], rec["explanation"],
                   rec["literal"], rec["final_translation"], tuple(prompts),
                   rec.get("method_tag", METHOD_TAG))


def _strip_result_cue(text: str) -> str:
    text = text.strip()
    if text.lower().startswith("result:"):
        text = text[len("result:"):].strip()
    return text


def run_pipeline(pair: IdiomPair, generator, temperature: float = DEFAULT_TEMPERATURE,
                 lang: str | None = None) -> PromptTrace:
    """Run explanation -> literal gloss -> final translation for one pair.

    The final prompt embeds the explanation and gloss produced in this same
    run.  Any stage failure raises PipelineStageError naming the stage.
    """
    _require(pair.source_text, "idiom")
    lang = lang or language_name(pair.language)

    def stage(name: str, prompt: str) -> str:
        try:
            out = generator.generate(prompt, temperature=temperature,
                                     max_tokens=STAGE_MAX_TOKENS[name],
                                     prompt_id=f"{pair.id}:{name}")
        except Exception as exc:
            raise PipelineStageError(name, pair.id, exc) from exc
        out = (out or "").rstrip()
        if name == "final":
            out = _strip_result_cue(out)
        if not out.strip():
            raise PipelineStageError(name, pair.id, "empty output")
        return out

    p1 = build_explanation_prompt(pair.source_text, lang)
    explanation = stage("explanation", p1)
    p2 = build_literal_prompt(pair.source_text, lang)
    literal = stage("literal", p2)
    p3 = build_final_prompt(pair.source_text, explanation, literal)
    final = stage("final", p3)
    return PromptTrace(pair.id, pair.source_text, pair.language, explanation, literal, final,
                       (p1, p2, p3))


def run_batch(pairs: Sequence[IdiomPair], generator, temperature: float = DEFAULT_TEMPERATURE) -> list[PromptTrace]:
    return [run_pipeline(p, generator, temperature=temperature) for p in pairs]


def save_traces(traces: Sequence[PromptTrace], path) -> Path:
    return write_records(path, (t.to_record() for t in traces))


def load_traces(path) -> list[PromptTrace]:
    out = []
    for lineno, rec in iter_records(path):
        try:
            out.append(PromptTrace.from_record(rec))
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordFormatError(path, lineno, f"bad trace record: {exc}") from None
    return out
