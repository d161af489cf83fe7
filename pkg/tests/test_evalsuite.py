import math
import random

import pytest

from idiom_forge.backends import StubEmbedder
from idiom_forge.evalsuite import (
    EvaluationError,
    MetricReport,
    TranslationRecord,
    aggregate,
    compare_methods,
    composite,
    da_score,
    embedding_score,
    evaluate_corpus,
    evaluate_with_rows,
    laj_score,
    load_report,
    qe_score,
    rouge_score,
    save_report,
)

from .oracles import brute_lcs


def rec(pred, ref, src="一箭双雕", pid="p1", tag="m"):
    return TranslationRecord(pid, src, pred, ref, tag)


def test_rouge_examples():
    assert rouge_score("the cat sat", "the cat sat") == 100.0
    assert rouge_score("a b", "c d") == 0.0
    assert rouge_score("the cat sat down", "the cat lay down") == pytest.approx(75.0)


def test_rouge_small_exhaustive_sample():
    rng = random.Random(0)
    for _ in range(2000):
        a = tuple(rng.choices("wxyz", k=rng.randint(1, 6)))
        b = tuple(rng.choices("wxyz", k=rng.randint(1, 6)))
        assert rouge_score(" ".join(a), " ".join(b)) == 200.0 * brute_lcs(a, b) / (len(a) + len(b))


def test_embedding_score(backends):
    assert embedding_score("kill two birds", "kill two birds", backends.embedder) == pytest.approx(100.0)
    assert embedding_score("sun", "moon", backends.embedder) == 0.0
    assert embedding_score("a a b", "a b", backends.embedder) == pytest.approx(100 * 3 / math.sqrt(10))
    assert round(embedding_score("a a b", "a b", backends.embedder), 2) == 94.87


def test_embedding_negative_clamped():
    class Signed:
        model_id = "signed"

        def embed(self, text):
            return [1.0, 0.0] if text == "up" else [-1.0, 0.0]

    assert embedding_score("up", "down", Signed()) == 0.0


def test_da_qe_laj(backends):
    assert da_score(rec("kill two birds", "kill two birds"), backends.ref_based) == 100.0
    assert qe_score(rec("soup", "kill two birds"), backends.ref_free) == 0.0
    assert da_score(rec("kill birds", "kill two birds"), backends.ref_based) == pytest.approx(80.0)
    assert laj_score(rec("kill two birds", "kill two birds"), backends.judge) == 5
    assert laj_score(rec("soup", "kill two birds"), backends.judge) == 1


def test_laj_mean_two_records():
    rows = [{"pair_id": "a", "da": 0, "qe": 0, "rouge": 0, "ed": 0, "laj": 5},
            {"pair_id": "b", "da": 0, "qe": 0, "rouge": 0, "ed": 0, "laj": 1}]
    assert aggregate(rows, "m", "c").laj == 3.0


def test_composite_reported_values():
    assert composite(42.89, 37.09, 8.04, 50.76, 1.79) == pytest.approx(34.916, abs=1e-3)
    assert composite(46.08, 48.92, 5.28, 44.16, 1.95) == pytest.approx(36.688, abs=1e-3)
    assert composite(0, 0, 0, 0, 1) == 4.0
    with pytest.raises(ValueError):
        composite(1, 2, 3, None, 1)


def _report(p, corpus="zh-idioms", tag="m"):
    # da chosen so the composite equals p exactly: (5p - 20) + 20*1 over 5
    return MetricReport(tag, corpus, 5 * p - 20, 0.0, 0.0, 0.0, 1.0, p, 1)


def test_compare_methods():
    a, b = _report(34.916, tag="a"), _report(36.688, tag="b")
    assert compare_methods(a, a) == 0.0
    assert compare_methods(a, b) == pytest.approx(-1.772, abs=1e-9)
    assert compare_methods(a, b) == -compare_methods(b, a)
    with pytest.raises(ValueError):
        compare_methods(a, _report(1.0, corpus="hi-idioms"))


def test_evaluate_perfect(backends):
    r = evaluate_corpus([rec("kill two birds", "kill two birds")], backends)
    assert (r.da, r.qe, r.rouge, r.ed, r.laj) == (100.0, 0.0, 100.0, pytest.approx(100.0), 5)
    # QE compares with the source idiom; a verbatim source copy is the all-perfect case
    r = evaluate_corpus([rec("kill two birds", "kill two birds", src="kill two birds")], backends)
    assert (r.da, r.qe, r.rouge, r.laj) == (100.0, 100.0, 100.0, 5)
    assert r.ed == pytest.approx(100.0)
    assert r.composite == pytest.approx(100.0)


def _records20(pairs):
    preds = ["kill birds", "gild lily", "pearls", "frog in a well", "late than never"]
    return [TranslationRecord(p.id, p.source_text, preds[i % 5] + " " + p.literal_gloss.split()[0],
                              p.reference_translation, "tf") for i, p in enumerate(pairs)]


def test_evaluate_20_formula(backends, pairs20):
    report, rows = evaluate_with_rows(_records20(pairs20), backends, "fixture")
    assert report.n == 20 and len(rows) == 20
    means = {m: math.fsum(r[m] for r in rows) / 20 for m in ("da", "qe", "rouge", "ed", "laj")}
    expected = (means["da"] + means["qe"] + means["rouge"] + means["ed"] + 20 * means["laj"]) / 5
    assert abs(report.composite - expected) <= 1e-9
    assert report.meta["rouge_variant"].startswith("rouge-l")


def test_duplication_and_permutation(backends, pairs20):
    records = _records20(pairs20)
    base = evaluate_corpus(records, backends)
    doubled = evaluate_corpus(records + records, backends)
    assert doubled.n == 40
    for m in ("da", "qe", "rouge", "ed", "laj", "composite"):
        assert getattr(doubled, m) == getattr(base, m)
    shuffled = records[:]
    random.Random(5).shuffle(shuffled)
    assert evaluate_corpus(shuffled, backends) == base


def test_record_failures_listed(backends, pairs20):
    class Flaky:
        model_id = "flaky"

        def judge(self, prediction, reference):
            if "gild" in prediction:
                raise TimeoutError("judge down")
            return 3

    backends.judge = Flaky()
    records = _records20(pairs20)
    with pytest.raises(EvaluationError) as err:
        evaluate_corpus(records, backends)
    failed = {r.pair_id for r in records if "gild" in r.prediction}
    assert set(err.value.failures) == failed


def test_mixed_method_tags_rejected(backends):
    with pytest.raises(ValueError):
        evaluate_corpus([rec("a", "a", tag="x"), rec("a", "a", pid="p2", tag="y")], backends)


def test_report_roundtrip(tmp_path, backends, pairs20):
    report, rows = evaluate_with_rows(_records20(pairs20), backends, "fixture")
    path = save_report(report, rows, tmp_path / "r.json")
    assert load_report(path) == report
