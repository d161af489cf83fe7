"""Translation metrics (DA, QE, ROUGE, ED, LAJ), composite score and comparisons.

All metrics except LAJ are on a 0-100 scale; LAJ is a 1-5 judge rating.  The
composite puts LAJ on the same scale::

    p = (DA + QE + ROUGE + ED + 20 * LAJ) / 5

ROUGE is ROUGE-L F1 over lowercased whitespace tokens.  ED is reported as
scaled cosine *similarity* (higher is better), with negative similarities
clamped to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .backends.base import ScorerRequest, cosine_similarity
from .textstats import lcs_length, tokenize

METRICS = ("da", "qe", "rouge", "ed", "laj")
ROUGE_VARIANT = "rouge-l-f1/whitespace-lowercase"
ED_DEFINITION = "100*max(0,cosine_similarity)"


class EvaluationError(RuntimeError):
    def __init__(self, failures: dict[str, str]):
        self.failures = failures
        listed = "; ".join(f"{k}: {v}" for k, v in list(failures.items())[:10])
        super().__init__(f"{len(failures)} record(s) failed: {listed}")


@dataclass(frozen=True)
class TranslationRecord:
    pair_id: str
    source_text: str
    prediction: str
    reference: str
    method_tag: str

    def __post_init__(self):
        for name in ("source_text", "prediction", "reference"):
            if not getattr(self, name).strip():
                raise ValueError(f"record {self.pair_id}: empty {name}")


@dataclass(frozen=True)
class MetricReport:
    method_tag: str
    corpus_tag: str
    da: float
    qe: float
    rouge: float
    ed: float
    laj: float
    composite: float
    n: int
    meta: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(d["method_tag"], d["corpus_tag"], float(d["da"]), float(d["qe"]),
                   float(d["rouge"]), float(d["ed"]), float(d["laj"]), float(d["composite"]),
                   int(d["n"]), dict(d.get("meta", {})))


def rouge_score(prediction: str, reference: str) -> float:
    """ROUGE-L F1 (beta = 1) scaled to 0-100."""
    p, r = tokenize(prediction), tokenize(reference)
    if not p or not r:
        return 0.0
    # 2PR / (P + R) with P = lcs/|p|, R = lcs/|r| reduces to 2 lcs / (|p| + |r|)
    return 200.0 * lcs_length(p, r) / (len(p) + len(r))


def embedding_score(prediction: str, reference: str, embedder) -> float:
    sim = cosine_similarity(embedder.embed(prediction), embedder.embed(reference))
    return 100.0 * max(0.0, sim)


def da_score(record: TranslationRecord, ref_based_scorer) -> float:
    req = ScorerRequest(record.source_text, record.prediction, record.reference)
    return 100.0 * ref_based_scorer.score_batch([req])[0]


def qe_score(record: TranslationRecord, ref_free_scorer) -> float:
    return 100.0 * ref_free_scorer.score_batch([ScorerRequest(record.source_text, record.prediction)])[0]


def laj_score(record: TranslationRecord, judge) -> int:
    score = int(judge.judge(record.prediction, record.reference))
    if not 1 <= score <= 5:
        raise ValueError(f"judge score {score} outside 1-5")
    return score


def composite(da: float, qe: float, rouge: float, ed: float, laj: float) -> float:
    values = {"da": da, "qe": qe, "rouge": rouge, "ed": ed, "laj": laj}
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise ValueError(f"composite needs all five metrics; missing {missing}")
    return (da + qe + rouge + ed + 20.0 * laj) / 5.0


def compare_methods(a: MetricReport, b: MetricReport) -> float:
    """Composite difference ``p_a - p_b`` on a shared corpus."""
    if a.corpus_tag != b.corpus_tag:
        raise ValueError(f"cannot compare across corpora: {a.corpus_tag!r} vs {b.corpus_tag!r}")
    return a.composite - b.composite


def score_records(records: Sequence[TranslationRecord], backends) -> list[dict]:
    """Per-record metric rows.  Failures are collected and raised together."""
    rows, failures = [], {}
    for rec in records:
        try:
            rows.append({
                "pair_id": rec.pair_id,
                "da": da_score(rec, backends.ref_based),
                "qe": qe_score(rec, backends.ref_free),
                "rouge": rouge_score(rec.prediction, rec.reference),
                "ed": embedding_score(rec.prediction, rec.reference, backends.embedder),
                "laj": laj_score(rec, backends.judge),
            })
        except Exception as exc:  # noqa: BLE001 - reported per record below
            failures[rec.pair_id] = f"{type(exc).__name__}: {exc}"
    if failures:
        raise EvaluationError(failures)
    return rows


def aggregate(rows: Sequence[dict], method_tag: str, corpus_tag: str) -> MetricReport:
    if not rows:
        raise ValueError("cannot aggregate an empty set of rows")
    # fsum keeps the means independent of record order
    means = {m: math.fsum(row[m] for row in rows) / len(rows) for m in METRICS}
    return MetricReport(
        method_tag=method_tag,
        corpus_tag=corpus_tag,
        composite=composite(**means),
        n=len(rows),
        meta={"rouge_variant": ROUGE_VARIANT, "ed_definition": ED_DEFINITION},
        **means,
    )


def evaluate_corpus(records: Sequence[TranslationRecord], backends,
                    corpus_tag: str = "corpus") -> MetricReport:
    return evaluate_with_rows(records, backends, corpus_tag)[0]


def evaluate_with_rows(records: Sequence[TranslationRecord], backends,
                       corpus_tag: str = "corpus") -> tuple[MetricReport, list[dict]]:
    if not records:
        raise ValueError("no records to evaluate")
    tags = {r.method_tag for r in records}
    if len(tags) != 1:
        raise ValueError(f"records mix method tags: {sorted(tags)}")
    rows = score_records(records, backends)
    return aggregate(rows, tags.pop(), corpus_tag), rows


def save_report(report: MetricReport, rows: Sequence[dict], path) -> Path:
    path = Path(path)
    payload = {"report": report.to_dict(), "records": list(rows)}
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path


def load_report(path) -> MetricReport:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such report: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    return MetricReport.from_dict(data["report"] if "report" in data else data)
