import random
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idiom_forge.backends import StubGenerator
from idiom_forge.corpus import CorpusSplit
from idiom_forge.grpo import (
    CandidateGroup,
    GroupSamplingError,
    TrainingBatch,
    build_training_batch,
    export_batch,
    export_sft_dataset,
    load_batch,
    load_sft_dataset,
    normalize_advantages,
    sample_group,
    translation_prompt,
)


class NonceGenerator(StubGenerator):
    """Appends a per-call counter so completions (and their rewards) differ."""

    def __init__(self):
        super().__init__("nonce-generator")
        self.n = 0

    def generate(self, prompt, temperature=0.3, max_tokens=64, prompt_id=None):
        self.n += 1
        base = super().generate(prompt, temperature, max_tokens, prompt_id)
        return base + " nonce" * (self.n % 4 + 1) + " " + prompt.split(": ", 1)[1]


class FailingGenerator(StubGenerator):
    def __init__(self, fail_on):
        super().__init__()
        self.fail_on = fail_on

    def generate(self, prompt, temperature=0.3, max_tokens=64, prompt_id=None):
        if prompt_id and prompt_id.startswith(self.fail_on):
            raise TimeoutError("generator timed out")
        return super().generate(prompt, temperature, max_tokens, prompt_id)


def oracle_standardize(r):
    r = np.asarray(r, dtype=np.float64)
    return (r - r.mean()) / r.std()


def test_normalize_examples():
    assert normalize_advantages([1, 1, 1, 1]) == [0.0, 0.0, 0.0, 0.0]
    got = normalize_advantages([0.2, 0.4, 0.6, 0.8])
    assert np.allclose(got, oracle_standardize([0.2, 0.4, 0.6, 0.8]), atol=1e-12)
    assert np.allclose(got, [-1.3416, -0.4472, 0.4472, 1.3416], atol=1e-4)
    with pytest.raises(ValueError):
        normalize_advantages([0.5])


rewards_st = st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=8)


@given(rewards_st, st.floats(0.1, 10), st.floats(-5, 5))
@settings(max_examples=500, deadline=None)
def test_normalize_properties(r, a, b):
    adv = normalize_advantages(r)
    assert abs(sum(adv)) <= 1e-9
    if len(set(r)) == 1:
        assert adv == [0.0] * len(r)
        return
    assert abs(float(np.std(adv)) - 1.0) <= 1e-6
    shifted = [a * x + b for x in r]
    if len(set(shifted)) > 1 and float(np.std(r)) > 1e-6:
        assert np.allclose(normalize_advantages(shifted), adv, atol=1e-6)
    # ranking: weakly monotone always, strict once rewards differ beyond float resolution
    resolution = 1e-12 * max(abs(x) for x in r)
    for i in range(len(r)):
        for j in range(len(r)):
            if r[i] < r[j]:
                assert adv[i] <= adv[j]
                if r[j] - r[i] > resolution:
                    assert adv[i] < adv[j]


def test_normalize_tiny_spread_still_unit_std():
    adv = normalize_advantages([0.5, 0.5, 0.5, 0.5 + 1e-12])
    assert abs(float(np.std(adv)) - 1.0) <= 1e-6


def test_sample_group_stub(pairs20):
    grp = sample_group(pairs20[0], 4, StubGenerator())
    assert len(grp.completions) == 4
    assert len(set(grp.completions)) == 1
    assert grp.completions[0] == f"TRANSLATION({pairs20[0].source_text})"
    assert grp.prompt == f"Translate the following Chinese idiom into natural English: {pairs20[0].source_text}"
    with pytest.raises(ValueError):
        sample_group(pairs20[0], 1, StubGenerator())


def test_sample_group_failure_is_group_level(pairs20):
    with pytest.raises(GroupSamplingError):
        sample_group(pairs20[0], 4, FailingGenerator(pairs20[0].id))


def test_batch_stub_all_zero_advantages(pairs20, backends):
    split = CorpusSplit(pairs20, (), seed=0)
    batch = build_training_batch(split, "qe_positive", 4, backends.generator, backends.ref_free)
    assert len(batch.groups) == 20
    for grp in batch.groups:
        assert len(grp.completions) == len(grp.rewards) == len(grp.advantages) == 4
        assert grp.advantages == [0.0] * 4
    assert batch.epoch_plan == 5


@pytest.mark.parametrize("variant", ["qe_positive", "qe_negative", "qe_constrained", "qe_da"])
def test_batch_nonce_statistics(pairs20, backends, variant):
    split = CorpusSplit(pairs20, (), seed=0)
    batch = build_training_batch(split, variant, 4, NonceGenerator(), backends.ref_free, backends.ref_based)
    assert len(batch.groups) == 20
    for grp in batch.groups:
        r = np.asarray(grp.rewards)
        a = np.asarray(grp.advantages)
        if np.ptp(r) == 0:
            assert np.all(a == 0)
            continue
        # statistics recomputed independently of the implementation
        assert abs(a.mean()) <= 1e-9
        assert abs(a.std() - 1.0) <= 1e-6
        assert np.allclose(a, oracle_standardize(r), atol=1e-9)


def test_batch_has_nonconstant_groups_with_nonce(pairs20, backends):
    split = CorpusSplit(pairs20, (), seed=0)
    batch = build_training_batch(split, "qe_positive", 4, NonceGenerator(), backends.ref_free)
    assert all(len(set(g.rewards)) > 1 for g in batch.groups)


def test_preflight_names_pairs(pairs20, backends):
    split = CorpusSplit(pairs20, (), seed=0)
    no_ref = SimpleNamespace(id="zh-missing-ref", source_text="一", reference_translation="",
                             literal_gloss=None, language="zh")
    gen = NonceGenerator()
    with pytest.raises(ValueError, match="zh-missing-ref"):
        build_training_batch(SimpleNamespace(train=(no_ref,)), "qe_da", 4, gen, backends.ref_free,
                             backends.ref_based)
    assert gen.n == 0
    from dataclasses import replace
    bare = replace(pairs20[3], literal_gloss=None)
    with pytest.raises(ValueError, match=bare.id):
        build_training_batch(CorpusSplit([bare]), "qe_negative", 4, gen, backends.ref_free)


def test_failed_groups_dropped(pairs20, backends):
    split = CorpusSplit(pairs20[:5], (), seed=0)
    batch = build_training_batch(split, "qe_positive", 4, FailingGenerator(pairs20[2].id), backends.ref_free)
    assert [g.prompt_id for g in batch.groups] == [p.id for p in pairs20[:5] if p.id != pairs20[2].id]


def test_empty_train_rejected(backends):
    with pytest.raises(ValueError):
        build_training_batch(CorpusSplit(), "qe_positive", 4, backends.generator, backends.ref_free)


def _random_batch(rng):
    groups = []
    for i in range(rng.randint(0, 5)):
        g = rng.randint(2, 6)
        rewards = [rng.uniform(-1, 1) for _ in range(g)]
        groups.append(CandidateGroup(f"p{i}", f"prompt {i} 成语", [f"c{j} {rng.random()}" for j in range(g)],
                                     rewards, normalize_advantages(rewards)))
    return TrainingBatch(groups, rng.choice(["qe_positive", "qe_da"]), rng.randint(1, 9), f"{rng.random()}")


def test_batch_roundtrip_100(tmp_path):
    rng = random.Random(42)
    for i in range(100):
        batch = _random_batch(rng)
        assert load_batch(export_batch(batch, tmp_path / f"b{i}.jsonl")) == batch


def test_batch_file_records(tmp_path, pairs20, backends):
    batch = build_training_batch(CorpusSplit(pairs20[:2]), "qe_positive", 4, backends.generator,
                                 backends.ref_free)
    import json
    lines = export_batch(batch, tmp_path / "b.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    rec = json.loads(lines[1])
    assert list(rec) == ["prompt_id", "prompt", "completions", "rewards", "advantages", "variant"]


def test_sft_export(tmp_path, split20):
    path = export_sft_dataset(split20, tmp_path / "sft.jsonl")
    recs = load_sft_dataset(path)
    assert len(recs) == len(split20.train) == 12
    p = split20.train[0]
    assert recs[0] == {"id": p.id, "prompt": translation_prompt(p), "reference_translation": p.reference_translation}


def test_sft_export_1000(tmp_path):
    from idiom_forge.corpus import clean_petci, split_corpus

    split = split_corpus(clean_petci([(f"成语{i}", f"idiom {i}") for i in range(1623)]), 1000, 0)
    assert len(load_sft_dataset(export_sft_dataset(split, tmp_path / "s.jsonl"))) == 1000


def test_sft_export_empty(tmp_path):
    path = export_sft_dataset(CorpusSplit(), tmp_path / "s.jsonl")
    assert path.read_text() == "" and load_sft_dataset(path) == []
