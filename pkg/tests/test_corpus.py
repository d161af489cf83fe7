import json
import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idiom_forge.corpus import (
    CorpusSplit,
    IdiomPair,
    clean_hindi,
    clean_petci,
    load_corpus,
    read_raw_rows,
    sample_subset,
    save_corpus,
    split_corpus,
)
from idiom_forge.jsonl import RecordFormatError

PETCI_ROWS = [
    ("  一箭双雕 ", " kill two birds with one stone "),
    ("画蛇添足", "gild the lily"),
    ("", "some translation"),                 # empty source
    ("对牛弹琴", "   \t "),                   # whitespace-only target
    ("井底之蛙", "N/A"),                      # missing marker
    ("亡羊补牢", "better late than never"),
    ("守株待兔", "wait for windfalls"),
    ("杯弓蛇影", "jump at shadows"),
    ("半途而废", "give up halfway"),
    ("破釜沉舟", "burn one's boats"),
]

HINDI_ROWS = [
    ("दाल में कुछ काला", "something fishy"),
    ("नाच न जाने आँगन टेढ़ा", "a bad workman blames his tools"),
    ("दाल में कुछ काला", "something fishy"),          # byte-identical duplicate
    ("आँख का तारा", "apple of one's eye"),
    ("नाच न जाने आँगन टेढ़ा ", "a bad workman blames his tools  "),  # duplicate after trim
    ("ऊँट के मुँह में जीरा", "a drop in the ocean"),
    ("अंधों में काना राजा", ""),                     # empty target
    ("घर की मुर्गी दाल बराबर", "familiarity breeds contempt"),
    ("जैसी करनी वैसी भरनी", "as you sow, so shall you reap"),
    ("अब पछताए होत क्या", "no use crying over spilt milk"),
    ("बंदर क्या जाने अदरक का स्वाद", "pearls before swine"),
    ("चोर की दाढ़ी में तिनका", "a guilty conscience needs no accuser"),
]


def test_petci_trims_and_keeps():
    pairs = clean_petci([PETCI_ROWS[0]])
    assert len(pairs) == 1
    assert pairs[0].source_text == "一箭双雕"
    assert pairs[0].reference_translation == "kill two birds with one stone"
    assert pairs[0].language == "zh"


def test_petci_drops_empty_source():
    assert clean_petci([("", "some translation")]) == []


def test_petci_fixture_counts():
    pairs = clean_petci(PETCI_ROWS)
    assert len(pairs) == 7
    # order of surviving rows preserved
    assert [p.source_text for p in pairs][:3] == ["一箭双雕", "画蛇添足", "亡羊补牢"]


@pytest.mark.parametrize("marker", ["NA", "n/a", "NULL", "-", " null "])
def test_missing_markers(marker):
    assert clean_petci([("一箭双雕", marker)]) == []


def test_wrong_arity_rejected_not_crash(caplog):
    rows = [("a",), ("a", "b", "c", "d"), None, "just a string", ("一箭双雕", "kill two birds")]
    pairs = clean_petci(rows)
    assert len(pairs) == 1
    assert "rejected" in caplog.text


def test_third_field_is_literal_gloss():
    (p,) = clean_petci([("一箭双雕", "kill two birds", " one arrow two eagles ")])
    assert p.literal_gloss == "one arrow two eagles"
    (q,) = clean_petci([("一箭双雕", "kill two birds", "")])
    assert q.literal_gloss is None


def test_hindi_exact_duplicates():
    assert len(clean_hindi([("दाल", "lentil"), ("दाल", "lentil")])) == 1


def test_hindi_trailing_whitespace_duplicates():
    assert len(clean_hindi([("दाल", "lentil"), ("दाल ", "lentil\t")])) == 1


def test_hindi_nfc_duplicates():
    # U+0958 (qa) and KA + NUKTA normalize to the same NFC sequence
    rows = [("\u0958\u092e", "pen"), ("\u0915\u093c\u092e", "pen")]
    assert len(clean_hindi(rows)) == 1


def test_hindi_fixture_counts():
    pairs = clean_hindi(HINDI_ROWS)
    assert len(pairs) == 9
    assert all(p.language == "hi" for p in pairs)


text_or_marker = st.one_of(
    st.text(max_size=12),
    st.sampled_from(["", " ", "\t\n", "NA", "n/a", "null", "-", "　"]),
    st.none(),
)
raw_rows = st.lists(st.tuples(text_or_marker, text_or_marker), max_size=25)


@given(raw_rows)
@settings(max_examples=200, deadline=None)
def test_cleaners_never_emit_empty_fields_and_are_idempotent(rows):
    for clean in (clean_petci, clean_hindi):
        once = clean(rows)
        for p in once:
            assert p.source_text.strip() and p.reference_translation.strip()
        assert clean(once) == once
        assert len({p.id for p in once}) == len(once)


def _pairs(n, lang="zh"):
    return clean_petci([(f"源{i}", f"target {i}") for i in range(n)]) if lang == "zh" else \
        clean_hindi([(f"स्रोत{i}", f"target {i}") for i in range(n)])


def test_split_sizes_zh():
    s = split_corpus(_pairs(1623), 1000, seed=0)
    assert (len(s.train), len(s.test)) == (1000, 623)


def test_split_sizes_hi():
    s = split_corpus(_pairs(1000, "hi"), 800, seed=0)
    assert (len(s.train), len(s.test)) == (800, 200)


def test_split_full_train():
    s = split_corpus(_pairs(30), 30, seed=1)
    assert len(s.test) == 0 and len(s.train) == 30


def test_split_too_many():
    with pytest.raises(ValueError, match="train_count=31 exceeds corpus size 30"):
        split_corpus(_pairs(30), 31, seed=1)


def test_split_independent_of_row_order():
    pairs = _pairs(50)
    shuffled = pairs[:]
    random.Random(3).shuffle(shuffled)
    a, b = split_corpus(pairs, 20, 9), split_corpus(shuffled, 20, 9)
    assert a == b


def test_split_assigns_split_field():
    s = split_corpus(_pairs(10), 6, 0)
    assert {p.split for p in s.train} == {"train"}
    assert {p.split for p in s.test} == {"test"}


def test_split_determinism_and_partition_100_combos():
    rng = random.Random(1234)
    for _ in range(100):
        n = rng.randint(1, 60)
        seed = rng.randint(0, 2**31)
        pairs = clean_petci([
            ("".join(rng.choices("甲乙丙丁戊己庚辛", k=4)) + str(i), f"t{i} " + rng.choice(string.ascii_lowercase))
            for i in range(n)
        ])
        k = rng.randint(1, len(pairs))
        a, b = split_corpus(pairs, k, seed), split_corpus(pairs, k, seed)
        assert a == b
        ids = [p.id for p in a.train] + [p.id for p in a.test]
        assert sorted(ids) == sorted(p.id for p in pairs)
        assert len(a) == len(pairs)


def test_sample_subset():
    pairs = _pairs(1000)
    s = sample_subset(pairs, 400, seed=5)
    assert len(s) == 400 and len({p.id for p in s}) == 400
    assert s == sample_subset(pairs, 400, seed=5)
    full = sample_subset(pairs, 1000, seed=5)
    assert sorted(p.id for p in full) == sorted(p.id for p in pairs)
    with pytest.raises(ValueError):
        sample_subset(pairs, 1001, seed=5)


def test_save_load_roundtrip(tmp_path, split20):
    path = save_corpus(split20, tmp_path / "c.jsonl")
    assert load_corpus(path) == split20


def test_save_load_empty(tmp_path):
    empty = CorpusSplit((), (), seed=3, provenance="nothing")
    path = save_corpus(empty, tmp_path / "e.jsonl")
    loaded = load_corpus(path)
    assert loaded == empty and len(loaded) == 0


def test_record_keys_are_flat_strings(tmp_path, split20):
    path = save_corpus(split20, tmp_path / "c.jsonl")
    lines = path.read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        rec = json.loads(line)
        assert set(rec) <= {"id", "source_text", "reference_translation", "literal_gloss", "language", "split"}
        assert all(isinstance(v, str) for v in rec.values())


def test_malformed_line_named(tmp_path, split20):
    path = save_corpus(split20, tmp_path / "c.jsonl")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[6] = '{"id": "broken", "source_text": '
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(RecordFormatError) as err:
        load_corpus(path)
    assert err.value.lineno == 7


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nope.jsonl")


def test_pair_invariants():
    with pytest.raises(ValueError):
        IdiomPair("x", " ", "ref")
    with pytest.raises(ValueError):
        IdiomPair("x", "src", "ref", language="not a tag!")


def test_read_raw_rows_formats(tmp_path):
    (tmp_path / "r.csv").write_text("src,tgt\n一,one\n", encoding="utf-8")
    assert read_raw_rows(tmp_path / "r.csv", skip_header=True) == [["一", "one"]]
    (tmp_path / "r.jsonl").write_text('{"source": "一", "target": "one", "literal": "uno"}\n["二", "two"]\n',
                                      encoding="utf-8")
    assert read_raw_rows(tmp_path / "r.jsonl") == [["一", "one", "uno"], ["二", "two"]]
