"""MTQE-based rewards for idiom translation.

Four variants built on the reference-free and reference-based scorers:

========================  ====================================================
``qe_positive``           QE(idiom, mt)
``qe_negative``           -QE(literal, mt); literal gloss and mt are both English
``qe_constrained``        QE(idiom, mt) - QE(literal, mt), not clipped
``qe_da``                 DA(idiom, mt, ref)
========================  ====================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .backends.base import ScorerRequest
from .jsonl import RecordFormatError, iter_records, write_records

VARIANTS = ("qe_positive", "qe_negative", "qe_constrained", "qe_da")
VARIANT_ALIASES = {
    "positive": "qe_positive",
    "negative": "qe_negative",
    "constrained": "qe_constrained",
    "da": "qe_da",
}


def resolve_variant(name: str) -> str:
    name = VARIANT_ALIASES.get(name, name)
    if name not in VARIANTS:
        raise ValueError(f"unknown reward variant {name!r}; expected one of {VARIANTS}")
    return name


class RewardError(RuntimeError):
    pass


class MissingFieldError(RewardError, ValueError):
    def __init__(self, sample_id: str, field: str, variant: str):
        self.sample_id = sample_id
        self.field = field
        super().__init__(f"sample {sample_id}: {variant} requires {field!r}, which is missing")


@dataclass(frozen=True)
class RewardInputs:
    sample_id: str
    idiom: str
    mt: str
    literal: str | None = None
    ref: str | None = None

    def check(self, variant: str) -> None:
        if not self.idiom or not self.idiom.strip():
            raise MissingFieldError(self.sample_id, "idiom", variant)
        if not self.mt or not self.mt.strip():
            raise MissingFieldError(self.sample_id, "mt", variant)
        if variant in ("qe_negative", "qe_constrained") and not (self.literal and self.literal.strip()):
            raise MissingFieldError(self.sample_id, "literal", variant)
        if variant == "qe_da" and not (self.ref and self.ref.strip()):
            raise MissingFieldError(self.sample_id, "ref", variant)


@dataclass(frozen=True)
class RewardBreakdown:
    variant: str
    reward: float
    positive_score: float | None = None
    negative_score: float | None = None
    sample_id: str | None = None

    def to_record(self) -> dict:
        rec: dict = {"sample_id": self.sample_id, "variant": self.variant}
        if self.positive_score is not None:
            rec["positive_score"] = self.positive_score
        if self.negative_score is not None:
            rec["negative_score"] = self.negative_score
        rec["reward"] = self.reward
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "RewardBreakdown":
        return cls(
            variant=resolve_variant(rec["variant"]),
            reward=float(rec["reward"]),
            positive_score=rec.get("positive_score"),
            negative_score=rec.get("negative_score"),
            sample_id=rec.get("sample_id"),
        )


def _single(variant: str, inputs: RewardInputs, ref_free=None, ref_based=None) -> RewardBreakdown:
    return compute_rewards([inputs], variant, ref_free=ref_free, ref_based=ref_based)[0]


def qe_positive(idiom: str, mt: str, scorer, sample_id: str = "-") -> RewardBreakdown:
    return _single("qe_positive", RewardInputs(sample_id, idiom, mt), ref_free=scorer)


def qe_negative(literal: str, mt: str, scorer, sample_id: str = "-") -> RewardBreakdown:
    if not literal or not literal.strip():
        raise MissingFieldError(sample_id, "literal", "qe_negative")
    # the idiom is not scored under this variant; the literal stands in to pass validation
    return _single("qe_negative", RewardInputs(sample_id, literal or "", mt, literal=literal),
                   ref_free=scorer)


def qe_constrained(idiom: str, literal: str, mt: str, scorer, sample_id: str = "-") -> RewardBreakdown:
    return _single("qe_constrained", RewardInputs(sample_id, idiom, mt, literal=literal), ref_free=scorer)


def qe_da(idiom: str, mt: str, ref: str, scorer, sample_id: str = "-") -> RewardBreakdown:
    return _single("qe_da", RewardInputs(sample_id, idiom, mt, ref=ref), ref_based=scorer)


class _Batch:
    """Collects distinct scorer requests so each is sent to the backend once."""

    def __init__(self):
        self.requests: dict[str, ScorerRequest] = {}

    def add(self, req: ScorerRequest) -> str:
        d = req.digest()
        self.requests.setdefault(d, req)
        return d

    def run(self, scorer, ids: Sequence[str]) -> dict[str, float]:
        if not self.requests:
            return {}
        if scorer is None:
            raise RewardError("no scorer configured for this reward variant")
        try:
            scores = scorer.score_batch(list(self.requests.values()))
        except Exception as exc:
            shown = ", ".join(ids[:5]) + (" ..." if len(ids) > 5 else "")
            raise RewardError(f"scoring failed for samples [{shown}]: {exc}") from exc
        if len(scores) != len(self.requests):
            raise RewardError(f"scorer returned {len(scores)} scores for {len(self.requests)} requests")
        return dict(zip(self.requests.keys(), (float(s) for s in scores)))


def compute_rewards(samples: Sequence[RewardInputs], variant: str,
                    ref_free=None, ref_based=None) -> list[RewardBreakdown]:
    """Score ``samples`` under ``variant``, preserving order.

    Every sample is validated before any backend call.  Identical requests are
    scored once; wrap the scorer in a cache to also skip requests seen in
    earlier calls.  Any scoring failure fails the whole batch.
    """
    variant = resolve_variant(variant)
    for s in samples:
        s.check(variant)
    if not samples:
        return []

    pos, neg, da = _Batch(), _Batch(), _Batch()
    keys = []
    for s in samples:
        if variant == "qe_positive":
            keys.append((pos.add(ScorerRequest(s.idiom, s.mt)), None))
        elif variant == "qe_negative":
            keys.append((None, neg.add(ScorerRequest(s.literal, s.mt))))
        elif variant == "qe_constrained":
            keys.append((pos.add(ScorerRequest(s.idiom, s.mt)), neg.add(ScorerRequest(s.literal, s.mt))))
        else:
            keys.append((da.add(ScorerRequest(s.idiom, s.mt, s.ref)), None))

    ids = [s.sample_id for s in samples]
    # positive and negative requests share the reference-free scorer: one combined batch
    free = _Batch()
    free.requests = {**pos.requests, **neg.requests}
    free_scores = free.run(ref_free, ids)
    da_scores = da.run(ref_based, ids)

    out = []
    for s, (k1, k2) in zip(samples, keys):
        if variant == "qe_positive":
            p = free_scores[k1]
            out.append(RewardBreakdown(variant, p, positive_score=p, sample_id=s.sample_id))
        elif variant == "qe_negative":
            n = free_scores[k2]
            out.append(RewardBreakdown(variant, -n, negative_score=n, sample_id=s.sample_id))
        elif variant == "qe_constrained":
            p, n = free_scores[k1], free_scores[k2]
            out.append(RewardBreakdown(variant, p - n, positive_score=p, negative_score=n,
                                       sample_id=s.sample_id))
        else:
            d = da_scores[k1]
            out.append(RewardBreakdown(variant, d, sample_id=s.sample_id))
    return out


def save_rewards(rewards: Iterable[RewardBreakdown], path) -> Path:
    return write_records(path, (r.to_record() for r in rewards))


def load_rewards(path) -> list[RewardBreakdown]:
    out = []
    for lineno, rec in iter_records(path):
        try:
            out.append(RewardBreakdown.from_record(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise RecordFormatError(path, lineno, f"bad reward record: {exc}") from None
    return out
