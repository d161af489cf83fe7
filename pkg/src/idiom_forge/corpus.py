"""Idiom-pair corpora: cleaning, deduplication, seeded splits and serialization.

Corpus files are UTF-8, one JSON object per line.  The first line is a header
carrying the split seed and provenance; every following line is a flat
string-to-string map with the keys ``id``, ``source_text``,
``reference_translation``, ``literal_gloss`` (omitted when absent), ``language``
and ``split``.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from .jsonl import RecordFormatError, iter_records, write_records

log = logging.getLogger(__name__)

MISSING_MARKERS = frozenset({"", "na", "n/a", "null", "-"})
SPLITS = ("train", "test", "unassigned")
LANGUAGE_NAMES = {"zh": "Chinese", "hi": "Hindi", "en": "English"}

_LANG_RE = re.compile(r"^[A-Za-z]{2,3}(-[A-Za-z0-9]{2,8})*$")
_HEADER_KEY = "__corpus__"
_FORMAT_VERSION = "1"


def valid_language_tag(tag: str) -> bool:
    return bool(_LANG_RE.match(tag or ""))


def language_name(tag: str) -> str:
    """Human-readable name for a corpus language code (``zh`` -> ``Chinese``)."""
    primary = tag.split("-")[0].lower()
    try:
        return LANGUAGE_NAMES[primary]
    except KeyError:
        raise ValueError(f"no language name known for tag {tag!r}") from None


@dataclass(frozen=True)
class IdiomPair:
    id: str
    source_text: str
    reference_translation: str
    literal_gloss: str | None = None
    language: str = "zh"
    split: str = "unassigned"

    def __post_init__(self):
        if not self.id:
            raise ValueError("IdiomPair.id must be non-empty")
        if not self.source_text.strip():
            raise ValueError(f"{self.id}: empty source_text")
        if not self.reference_translation.strip():
            raise ValueError(f"{self.id}: empty reference_translation")
        if not valid_language_tag(self.language):
            raise ValueError(f"{self.id}: invalid language tag {self.language!r}")
        if self.split not in SPLITS:
            raise ValueError(f"{self.id}: invalid split {self.split!r}")

    def require_literal(self) -> str:
        if not self.literal_gloss:
            raise ValueError(f"pair {self.id} has no literal_gloss")
        return self.literal_gloss

    def to_record(self) -> dict[str, str]:
        rec = {
            "id": self.id,
            "source_text": self.source_text,
            "reference_translation": self.reference_translation,
        }
        if self.literal_gloss is not None:
            rec["literal_gloss"] = self.literal_gloss
        rec["language"] = self.language
        rec["split"] = self.split
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "IdiomPair":
        return cls(
            id=rec["id"],
            source_text=rec["source_text"],
            reference_translation=rec["reference_translation"],
            literal_gloss=rec.get("literal_gloss"),
            language=rec["language"],
            split=rec["split"],
        )


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[IdiomPair, ...] = ()
    test: tuple[IdiomPair, ...] = ()
    seed: int = 0
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))
        overlap = {p.id for p in self.train} & {p.id for p in self.test}
        if overlap:
            raise ValueError(f"train/test overlap: {sorted(overlap)[:5]}")

    @property
    def pairs(self) -> tuple[IdiomPair, ...]:
        return self.train + self.test

    def __len__(self):
        return len(self.train) + len(self.test)

    def by_id(self) -> dict[str, IdiomPair]:
        return {p.id: p for p in self.pairs}


# --------------------------------------------------------------------------- cleaning


def _normalize(value: Any) -> str | None:
    """Trimmed NFC text, or None for null and missing-marker values."""
    if value is None:
        return None
    if isinstance(value, float) and value != value:  # NaN from spreadsheet exports
        return None
    text = unicodedata.normalize("NFC", str(value)).strip()
    if text.casefold() in MISSING_MARKERS:
        return None
    return text


def _row_fields(row: Any) -> tuple[Any, ...] | None:
    if isinstance(row, IdiomPair):
        return (row.source_text, row.reference_translation, row.literal_gloss)
    if isinstance(row, (str, bytes)) or not isinstance(row, Sequence):
        return None
    if len(row) not in (2, 3):
        return None
    return tuple(row)


def _pair_id(language: str, source: str, reference: str) -> str:
    digest = hashlib.sha1(f"{source}\x1f{reference}".encode("utf-8")).hexdigest()
    return f"{language}-{digest[:12]}"


def _clean(rows: Iterable[Any], language: str, dedupe: bool) -> list[IdiomPair]:
    if not valid_language_tag(language):
        raise ValueError(f"invalid language tag {language!r}")
    out: list[IdiomPair] = []
    seen_pairs: set[tuple[str, str]] = set()
    id_counts: dict[str, int] = {}
    for index, row in enumerate(rows):
        fields = _row_fields(row)
        if fields is None:
            log.warning("row %d rejected: expected 2 or 3 fields, got %r", index, row)
            continue
        source = _normalize(fields[0])
        reference = _normalize(fields[1])
        literal = _normalize(fields[2]) if len(fields) == 3 else None
        if source is None or reference is None:
            log.info("row %d dropped: empty or missing field", index)
            continue
        if dedupe:
            if (source, reference) in seen_pairs:
                log.info("row %d dropped: duplicate pair", index)
                continue
            seen_pairs.add((source, reference))
        base = _pair_id(language, source, reference)
        n = id_counts.get(base, 0) + 1
        id_counts[base] = n
        pair_id = base if n == 1 else f"{base}-{n}"
        out.append(IdiomPair(pair_id, source, reference, literal, language))
    return out


def clean_petci(rows: Iterable[Any]) -> list[IdiomPair]:
    """Trim (chinese, english) rows and drop any with an empty or missing field.

    A row may carry an optional third field holding a literal English gloss.
    Surviving rows keep their input order.  Rows of the wrong shape are
    logged and skipped.
    """
    return _clean(rows, "zh", dedupe=False)


def clean_hindi(rows: Iterable[Any]) -> list[IdiomPair]:
    """Like :func:`clean_petci` for (hindi, english) rows, plus exact-duplicate
    removal after NFC normalization and trimming (first occurrence wins)."""
    return _clean(rows, "hi", dedupe=True)


def clean_parallel(rows: Iterable[Any], language: str) -> list[IdiomPair]:
    """Generic sentence-pair cleaner used for Opus-style general translation data."""
    return _clean(rows, language, dedupe=True)


# --------------------------------------------------------------------------- splitting


def split_corpus(pairs: Sequence[IdiomPair], train_count: int, seed: int,
                 provenance: str = "") -> CorpusSplit:
    if train_count < 1:
        raise ValueError(f"train_count must be positive, got {train_count}")
    if train_count > len(pairs):
        raise ValueError(f"train_count={train_count} exceeds corpus size {len(pairs)}")
    ids = [p.id for p in pairs]
    if len(set(ids)) != len(ids):
        raise ValueError("pair ids are not unique")
    # id-sorting first makes membership independent of input row order
    ordered = sorted(pairs, key=lambda p: p.id)
    random.Random(seed).shuffle(ordered)
    train = [replace(p, split="train") for p in ordered[:train_count]]
    test = [replace(p, split="test") for p in ordered[train_count:]]
    return CorpusSplit(train, test, seed, provenance)


def sample_subset(pairs: Sequence[IdiomPair], n: int, seed: int) -> list[IdiomPair]:
    """Seeded sample of ``n`` pairs without replacement."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > len(pairs):
        raise ValueError(f"cannot sample {n} pairs from a corpus of {len(pairs)}")
    return random.Random(seed).sample(list(pairs), n)


# --------------------------------------------------------------------------- file I/O


def save_corpus(split: CorpusSplit, path) -> Path:
    header = {
        _HEADER_KEY: _FORMAT_VERSION,
        "seed": str(split.seed),
        "provenance": split.provenance,
    }
    return write_records(path, [header, *(p.to_record() for p in split.pairs)])


def load_corpus(path) -> CorpusSplit:
    seed, provenance = 0, ""
    train: list[IdiomPair] = []
    test: list[IdiomPair] = []
    for lineno, rec in iter_records(path):
        if _HEADER_KEY in rec:
            if lineno != 1:
                raise RecordFormatError(path, lineno, "header record must be the first line")
            try:
                seed = int(rec.get("seed", "0"))
            except ValueError:
                raise RecordFormatError(path, lineno, f"bad seed {rec.get('seed')!r}") from None
            provenance = rec.get("provenance", "")
            continue
        try:
            for key, value in rec.items():
                if not isinstance(value, str):
                    raise ValueError(f"field {key!r} is not a string")
            pair = IdiomPair.from_record(rec)
        except KeyError as exc:
            raise RecordFormatError(path, lineno, f"missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise RecordFormatError(path, lineno, str(exc)) from None
        if pair.split == "test":
            test.append(pair)
        else:
            # unassigned pairs travel with train so that nothing is lost on reload
            train.append(pair)
    try:
        return CorpusSplit(train, test, seed, provenance)
    except ValueError as exc:
        raise RecordFormatError(path, 0, str(exc)) from None


def read_raw_rows(path, skip_header: bool = False) -> list[list[Any]]:
    """Read raw parallel rows from ``.tsv``, ``.csv`` or ``.jsonl`` files.

    JSONL lines may be arrays or objects; objects are read through the keys
    ``source``, ``target`` and optional ``literal``.  Row arity is not
    validated here; the cleaners reject malformed rows individually.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    suffix = path.suffix.lower()
    rows: list[list[Any]] = []
    if suffix in (".jsonl", ".json"):
        for _, rec in _iter_json_rows(path):
            rows.append(rec)
    else:
        delimiter = "," if suffix == ".csv" else "\t"
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = [list(r) for r in csv.reader(fh, delimiter=delimiter)]
    if skip_header and rows:
        rows = rows[1:]
    return rows


def _iter_json_rows(path: Path):
    import json

    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(path, lineno, f"invalid JSON ({exc.msg})") from None
            if isinstance(obj, dict):
                row = [obj.get("source"), obj.get("target")]
                if obj.get("literal") is not None:
                    row.append(obj["literal"])
                yield lineno, row
            else:
                yield lineno, obj
