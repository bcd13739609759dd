"""Ingestion, dedup, literal filtering, and corpus splitting."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from similekit.harvest import (
    CorpusSplit,
    EmptyCorpus,
    HarvestStats,
    RawComment,
    dedup_key,
    harvest_literals,
    harvest_similes,
    load_comments,
    read_literals_jsonl,
    read_similes_jsonl,
    sample_literals,
    split_corpus,
    write_literals_jsonl,
    write_similes_jsonl,
)
from similekit.tagging import DEFAULT_TAGGER


def comment(i, body, ts=0):
    return RawComment(id=str(i), body=body, subreddit="test", created_utc=ts)


class TestHarvestSimiles:
    def test_pronoun_topic_retained(self):
        out = harvest_similes([comment(1, "I feel like a fool")])
        assert len(out) == 1
        assert out[0].vehicle == "fool"

    def test_non_trigger_dropped(self):
        assert harvest_similes([comment(1, "I like apples")]) == []

    def test_dedup_across_comments(self):
        body = "He ran like a deer."
        comments = [
            comment(1, body, ts=1),
            comment(2, "She sang like a bird.", ts=2),
            comment(3, body.upper(), ts=3),  # same text modulo case
        ]
        stats = HarvestStats()
        out = harvest_similes(comments, stats=stats)
        assert len(out) == 2
        assert stats.duplicates == 1

    def test_dedup_key_ignores_punctuation_and_case(self):
        assert dedup_key("He ran, like a deer!") == dedup_key("he ran like a deer")

    def test_multi_sentence_bodies_split(self):
        body = "It rained. The sea was like a mirror. We left."
        out = harvest_similes([comment(1, body)])
        assert [s.raw_text for s in out] == ["The sea was like a mirror."]

    def test_order_fixed_by_timestamp_then_id(self):
        comments = [
            comment(2, "B was like a bat.", ts=5),
            comment(1, "A was like an ant or like a fly.", ts=5),
            comment(3, "C was like a cat.", ts=1),
        ]
        out = harvest_similes(comments)
        first_words = [s.raw_text.split()[0] for s in out]
        assert first_words == ["C", "A", "B"]

    def test_harvest_idempotent(self):
        comments = [comment(i, f"Thing {i} was like a stone {i}.") for i in range(10)]
        assert harvest_similes(comments) == harvest_similes(comments)

    def test_source_id_attached(self):
        out = harvest_similes([comment(42, "Love is like a unicorn.")])
        assert out[0].source_id == "42"


class TestLoadComments:
    def test_malformed_counted_skipped(self, tmp_path):
        path = tmp_path / "c.ndjson"
        rows = [
            json.dumps({"id": "1", "body": "ok like a rock.", "subreddit": "x", "created_utc": 1}),
            "{not json",
            json.dumps({"id": "2"}),  # missing body
            json.dumps({"id": "3", "body": "", "subreddit": "x", "created_utc": 2}),  # empty body
            json.dumps({"id": "4", "body": "fine like a breeze.", "created_utc": 3}),
        ]
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        stats = HarvestStats()
        comments = load_comments(path, stats)
        assert [c.id for c in comments] == ["1", "4"]
        assert stats.malformed == 3

    def test_empty_body_rejected_at_type_level(self):
        with pytest.raises(ValueError):
            RawComment(id="1", body="")


class TestHarvestLiterals:
    def test_keeps_modifier_final(self):
        out = harvest_literals(["The city was beautiful"], DEFAULT_TAGGER)
        assert len(out) == 1
        assert out[0].property == "beautiful"

    def test_rejects_comparators(self):
        stats = HarvestStats()
        out = harvest_literals(
            ["He ran like a deer", "It was as cold as ice", "The city was beautiful"],
            DEFAULT_TAGGER,
            stats,
        )
        assert [l.raw_text for l in out] == ["The city was beautiful"]
        assert stats.rejected == 2

    def test_rejects_noun_final(self):
        stats = HarvestStats()
        assert harvest_literals(["He saw a dog"], DEFAULT_TAGGER, stats) == []
        assert stats.rejected == 1

    def test_sample_is_seeded_and_sized(self):
        crawled = harvest_literals(
            [f"The road number {i} felt smooth" for i in range(500)], DEFAULT_TAGGER
        )
        assert len(crawled) == 500
        picked = sample_literals(crawled, 150, seed=9)
        assert len(picked) == 150
        assert picked == sample_literals(crawled, 150, seed=9)
        assert picked != sample_literals(crawled, 150, seed=10)

    def test_sample_returns_all_when_n_large(self):
        items = ["The sky was blue"]
        assert sample_literals(items, 5, seed=1) == items


class TestSplitCorpus:
    def test_sizes_and_disjoint(self):
        items = [f"item{i}" for i in range(100)]
        split = split_corpus(items, 0.9, seed=7)
        assert len(split.train) == 90
        assert len(split.validation) == 10
        assert set(split.train).isdisjoint(split.validation)
        assert sorted(split.train + split.validation) == sorted(items)

    def test_deterministic(self):
        items = [f"item{i}" for i in range(50)]
        a = split_corpus(items, 0.8, seed=3)
        b = split_corpus(items, 0.8, seed=3)
        assert a == b
        assert a != split_corpus(items, 0.8, seed=4)

    def test_empty_raises(self):
        with pytest.raises(EmptyCorpus):
            split_corpus([], 0.5, seed=1)

    def test_train_takes_ceiling_on_degenerate_input(self):
        split = split_corpus(["only"], 0.5, seed=1)
        assert (len(split.train), len(split.validation)) == (1, 0)

    def test_bad_ratio(self):
        for ratio in (0, 1, -0.1, 1.5):
            with pytest.raises(ValueError):
                split_corpus(["a"], ratio, seed=1)

    def test_exact_fraction_ratio_supported(self):
        # A Fraction ratio makes the train size an exact integer product,
        # independent of the rounding policy.
        items = list(range(87843))
        split = split_corpus(items, Fraction(82697, 87843), seed=0)
        assert (len(split.train), len(split.validation)) == (82697, 5146)

    def test_float_094_rounds_with_ceiling(self):
        # ceil(0.94 * 87843) = 82573: a two-decimal ratio cannot reproduce
        # the 82697/5146 sizes, whatever the rounding policy.
        items = list(range(87843))
        split = split_corpus(items, 0.94, seed=0)
        assert (len(split.train), len(split.validation)) == (82573, 5270)

    @given(st.integers(2, 60), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_partition_property(self, n, seed):
        items = [f"i{k}" for k in range(n)]
        split = split_corpus(items, 0.75, seed=seed)
        assert sorted(split.train + split.validation) == sorted(items)
        assert len(split.train) >= len(split.validation)


class TestFileFormats:
    def test_similes_round_trip(self, tmp_path, toy_world):
        path = tmp_path / "similes.jsonl"
        write_similes_jsonl(toy_world["similes"][:5], path)
        loaded = read_similes_jsonl(path)
        assert loaded == toy_world["similes"][:5]
        rec = json.loads(path.read_text().splitlines()[0])
        assert set(rec) == {"text", "prefix", "vehicle", "source_id"}

    def test_literals_round_trip(self, tmp_path):
        lits = harvest_literals(["The city was beautiful", "Love is rare."], DEFAULT_TAGGER)
        path = tmp_path / "lits.jsonl"
        write_literals_jsonl(lits, path)
        recs = read_literals_jsonl(path)
        assert recs == [
            {"property": "beautiful", "text": "The city was beautiful"},
            {"property": "rare", "text": "Love is rare."},
        ]
