"""Group sampling, group-relative advantages and training-batch export.

Gradient updates are not done here.  The exported batch files hold reward- and
advantage-annotated completion groups for an external GRPO trainer, and
:func:`export_sft_dataset` writes the supervised baseline data.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .backends.base import DEFAULT_TEMPERATURE
from .corpus import CorpusSplit, IdiomPair, language_name
from .jsonl import RecordFormatError, iter_records, write_records
from .promptcraft.templates import load_template
from .rewards import RewardInputs, compute_rewards, resolve_variant
from .templating import render

log = logging.getLogger(__name__)

DEFAULT_GROUP_SIZE = 4
DEFAULT_EPOCHS = 5
TRANSLATE_TEMPLATE = "translate_v1"
_BATCH_HEADER = "__grpo_batch__"


class GroupSamplingError(RuntimeError):
    def __init__(self, prompt_id: str, index: int, cause: Exception):
        self.prompt_id = prompt_id
        super().__init__(f"group {prompt_id}: completion {index} failed: {cause}")


@dataclass
class CandidateGroup:
    prompt_id: str
    prompt: str
    completions: list[str]
    rewards: list[float] = field(default_factory=list)
    advantages: list[float] = field(default_factory=list)

    def to_record(self, variant: str) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "prompt": self.prompt,
            "completions": list(self.completions),
            "rewards": list(self.rewards),
            "advantages": list(self.advantages),
            "variant": variant,
        }


@dataclass
class TrainingBatch:
    groups: list[CandidateGroup]
    variant: str
    epoch_plan: int = DEFAULT_EPOCHS
    generator_config_digest: str = ""

    def __post_init__(self):
        self.variant = resolve_variant(self.variant)
        if self.epoch_plan < 1:
            raise ValueError("epoch_plan must be >= 1")


def normalize_advantages(rewards: Sequence[float]) -> list[float]:
    """Standardize rewards within a group: zero mean, unit population std.

    An all-equal group gets all-zero advantages.  Deviations are rescaled by
    their largest magnitude before squaring so tiny spreads neither underflow
    nor pick up an additive-epsilon bias.
    """
    r = [float(x) for x in rewards]
    if len(r) < 2:
        raise ValueError(f"need at least 2 rewards per group, got {len(r)}")
    if not all(math.isfinite(x) for x in r):
        raise ValueError(f"non-finite reward in {r}")
    if all(x == r[0] for x in r):
        return [0.0] * len(r)
    mean = math.fsum(r) / len(r)
    dev = [x - mean for x in r]
    scale = max(abs(d) for d in dev)
    if scale == 0.0:
        return [0.0] * len(r)
    unit = [d / scale for d in dev]
    centre = math.fsum(unit) / len(unit)
    unit = [u - centre for u in unit]
    std = math.sqrt(math.fsum(u * u for u in unit) / len(unit))
    return [u / std for u in unit]


def translation_prompt(pair: IdiomPair) -> str:
    return render(load_template(TRANSLATE_TEMPLATE),
                  {"language": language_name(pair.language), "idiom": pair.source_text})


def sample_group(pair: IdiomPair, g: int, generator, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = 64) -> CandidateGroup:
    """Draw ``g`` completions for one pair; rewards and advantages are left empty."""
    if g < 2:
        raise ValueError(f"group size must be >= 2, got {g}")
    prompt = translation_prompt(pair)
    completions = []
    for i in range(g):
        try:
            text = generator.generate(prompt, temperature=temperature, max_tokens=max_tokens,
                                      prompt_id=f"{pair.id}#{i}")
        except Exception as exc:
            raise GroupSamplingError(pair.id, i, exc) from exc
        if not text or not text.strip():
            raise GroupSamplingError(pair.id, i, ValueError("empty completion"))
        completions.append(text.strip())
    return CandidateGroup(pair.id, prompt, completions)


def _preflight(pairs: Sequence, variant: str) -> None:
    needs = {"qe_negative": "literal_gloss", "qe_constrained": "literal_gloss",
             "qe_da": "reference_translation"}.get(variant)
    if needs is None:
        return
    bad = [p.id for p in pairs if not (getattr(p, needs, None) or "").strip()]
    if bad:
        raise ValueError(f"{variant} needs {needs}; missing for pairs: {', '.join(bad)}")


def build_training_batch(split: CorpusSplit, variant: str, g: int, generator,
                         ref_free=None, ref_based=None, epoch_plan: int = DEFAULT_EPOCHS,
                         temperature: float = DEFAULT_TEMPERATURE) -> TrainingBatch:
    variant = resolve_variant(variant)
    pairs = list(split.train)
    if not pairs:
        raise ValueError("training split is empty")
    _preflight(pairs, variant)

    groups: list[CandidateGroup] = []
    used: list[IdiomPair] = []
    for pair in pairs:
        try:
            groups.append(sample_group(pair, g, generator, temperature=temperature))
            used.append(pair)
        except GroupSamplingError as exc:
            log.warning("dropping group: %s", exc)

    samples = [
        RewardInputs(f"{grp.prompt_id}#{i}", pair.source_text, mt,
                     literal=pair.literal_gloss, ref=pair.reference_translation)
        for grp, pair in zip(groups, used)
        for i, mt in enumerate(grp.completions)
    ]
    scored = compute_rewards(samples, variant, ref_free=ref_free, ref_based=ref_based)
    pos = 0
    for grp in groups:
        grp.rewards = [b.reward for b in scored[pos:pos + len(grp.completions)]]
        grp.advantages = normalize_advantages(grp.rewards)
        pos += len(grp.completions)

    return TrainingBatch(groups, variant, epoch_plan, generator_digest(generator, temperature))


def generator_digest(generator, temperature: float) -> str:
    fn = getattr(generator, "describe", None)
    desc = fn() if fn else {"model_id": getattr(generator, "model_id", type(generator).__name__)}
    blob = json.dumps({"generator": desc, "temperature": temperature,
                       "template": TRANSLATE_TEMPLATE}, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------- export


def export_batch(batch: TrainingBatch, path) -> Path:
    header = {
        _BATCH_HEADER: "1",
        "variant": batch.variant,
        "epoch_plan": batch.epoch_plan,
        "generator_config_digest": batch.generator_config_digest,
    }
    return write_records(path, [header, *(grp.to_record(batch.variant) for grp in batch.groups)])


def load_batch(path) -> TrainingBatch:
    header = None
    groups = []
    for lineno, rec in iter_records(path):
        if _BATCH_HEADER in rec:
            header = rec
            continue
        if header is None:
            raise RecordFormatError(path, lineno, "batch header missing")
        try:
            if rec["variant"] != header["variant"]:
                raise ValueError(f"group variant {rec['variant']!r} differs from batch variant")
            grp = CandidateGroup(rec["prompt_id"], rec["prompt"], list(rec["completions"]),
                                 [float(x) for x in rec["rewards"]],
                                 [float(x) for x in rec["advantages"]])
            if not len(grp.completions) == len(grp.rewards) == len(grp.advantages):
                raise ValueError("completions/rewards/advantages lengths differ")
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordFormatError(path, lineno, f"bad group record: {exc}") from None
        groups.append(grp)
    if header is None:
        raise RecordFormatError(path, 0, "empty batch file (no header)")
    return TrainingBatch(groups, header["variant"], int(header["epoch_plan"]),
                         header["generator_config_digest"])


def export_sft_dataset(split: CorpusSplit, path) -> Path:
    """Write (prompt, reference_translation) records for the training split."""
    return write_records(path, (
        {"id": p.id, "prompt": translation_prompt(p), "reference_translation": p.reference_translation}
        for p in split.train
    ))


def load_sft_dataset(path) -> list[dict]:
    out = []
    for lineno, rec in iter_records(path):
        if not {"id", "prompt", "reference_translation"} <= rec.keys():
            raise RecordFormatError(path, lineno, "SFT record needs id, prompt, reference_translation")
        out.append(rec)
    return out
