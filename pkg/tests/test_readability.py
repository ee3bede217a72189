"""Flesch Reading-Ease scoring, strict-threshold filtering and seeded
bucketing."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cskprobe.readability import (
    BucketAccumulator,
    FilterStats,
    ReadabilityReport,
    bucket_by_fre,
    bucket_bounds,
    bucket_index,
    compute_fre,
    filter_by_fre,
    fre_from_counts,
)
from cskprobe.segmentation import Document


def planted_scorer(scores: dict[str, float | None]):
    """score_fn stand-in with exact planted FRE values."""

    def score(doc: Document) -> ReadabilityReport:
        fre = scores[doc.id]
        if fre is None:
            return ReadabilityReport(doc.id, 0, 0, 0, None, None)
        return ReadabilityReport(doc.id, 1, 1, 1, fre, min(100.0, max(0.0, fre)))

    return score


class TestComputeFre:
    def test_the_cat_sat(self):
        report = compute_fre(Document("d", "The cat sat."))
        assert (report.n_sentences, report.n_words, report.n_syllables) == (1, 3, 3)
        assert report.fre == pytest.approx(119.19, abs=1e-9)
        assert report.fre_clamped == 100.0

    def test_empty_document_unreadable(self):
        report = compute_fre(Document("d", ""))
        assert not report.readable
        assert report.fre is None
        assert (report.n_sentences, report.n_words, report.n_syllables) == (0, 0, 0)

    def test_punctuation_only_unreadable(self):
        assert not compute_fre(Document("d", "!!! ...")).readable

    def test_raw_score_not_clamped(self):
        # long single sentence of polysyllabic words drives FRE negative
        text = "Extraordinarily sophisticated terminology necessitates considerable comprehension."
        report = compute_fre(Document("d", text))
        assert report.fre < 0
        assert report.fre_clamped == 0.0

    def test_formula_requires_counts(self):
        with pytest.raises(ValueError):
            fre_from_counts(0, 5, 5)

    @given(
        n_sentences=st.integers(1, 50),
        n_words_per=st.integers(1, 40),
        n_syll_extra=st.integers(0, 100),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_decreasing(self, n_sentences, n_words_per, n_syll_extra):
        n_words = n_sentences * n_words_per
        n_syllables = n_words + n_syll_extra
        base = fre_from_counts(n_sentences, n_words, n_syllables)
        # more syllables, all else fixed -> harder
        assert fre_from_counts(n_sentences, n_words, n_syllables + 1) < base
        # doubled words/sentence at the same syllables-per-word -> harder
        assert fre_from_counts(n_sentences, 2 * n_words, 2 * n_syllables) < base


class TestFilterByFre:
    def test_strict_boundary(self):
        docs = [Document(f"d{i}", "x") for i in range(3)]
        scores = {"d0": 79.9, "d1": 80.0, "d2": 80.1}
        stats = FilterStats()
        kept = list(
            filter_by_fre(docs, 80.0, score_fn=planted_scorer(scores), stats=stats)
        )
        assert [d.id for d in kept] == ["d2"]
        assert (stats.total, stats.retained, stats.unreadable) == (3, 1, 0)

    def test_unreadable_counted_separately(self):
        docs = [Document("a", ""), Document("b", "")]
        stats = FilterStats()
        kept = list(
            filter_by_fre(
                docs, 10.0, score_fn=planted_scorer({"a": None, "b": 50.0}), stats=stats
            )
        )
        assert [d.id for d in kept] == ["b"]
        assert stats.unreadable == 1

    def test_retention_matches_brute_force(self):
        import random

        rng = random.Random(13)
        scores = {f"d{i}": rng.uniform(-20, 120) for i in range(100)}
        docs = [Document(i, "x") for i in scores]
        threshold = 70.0
        kept = list(filter_by_fre(docs, threshold, score_fn=planted_scorer(scores)))
        expected = sorted(i for i, s in scores.items() if s > threshold)
        assert sorted(d.id for d in kept) == expected

    def test_monotone_in_threshold(self):
        import random

        rng = random.Random(5)
        scores = {f"d{i}": rng.uniform(0, 100) for i in range(200)}
        docs = [Document(i, "x") for i in scores]
        for lo, hi in [(20.0, 50.0), (50.0, 80.0), (0.0, 99.0)]:
            loose = {d.id for d in filter_by_fre(docs, lo, score_fn=planted_scorer(scores))}
            tight = {d.id for d in filter_by_fre(docs, hi, score_fn=planted_scorer(scores))}
            assert tight <= loose

    def test_non_finite_threshold_rejected(self):
        with pytest.raises(ValueError):
            next(filter_by_fre([], float("nan")))


class TestBuckets:
    def test_mid_bucket(self):
        assert bucket_index(85.0, 10.0) == 8

    def test_top_bucket_closed_at_100(self):
        assert bucket_index(100.0, 10.0) == 9

    def test_bounds_partition(self):
        bounds = bucket_bounds(10.0)
        assert bounds[0] == (0.0, 10.0)
        assert bounds[-1] == (90.0, 100.0)
        assert len(bounds) == 10

    def test_width_must_divide_100(self):
        with pytest.raises(ValueError):
            bucket_bounds(7.0)

    def test_deterministic_sample(self):
        docs = [Document(f"d{i}", "x") for i in range(30)]
        scores = {f"d{i}": float(5 + 10 * (i % 3)) for i in range(30)}  # 3 buckets x 10 docs
        acc1 = bucket_by_fre(docs, 10.0, 2, seed=42, score_fn=planted_scorer(scores))
        acc2 = bucket_by_fre(docs, 10.0, 2, seed=42, score_fn=planted_scorer(scores))
        ids1 = [[d.id for d in s] for s in acc1.samples()]
        ids2 = [[d.id for d in s] for s in acc2.samples()]
        assert ids1 == ids2
        assert all(len(s) <= 2 for s in ids1)
        assert sum(len(s) for s in ids1) == 6

    def test_different_seed_different_sample(self):
        docs = [Document(f"d{i}", "x") for i in range(50)]
        scores = {d.id: 50.0 for d in docs}
        a = bucket_by_fre(docs, 10.0, 5, seed=1, score_fn=planted_scorer(scores))
        b = bucket_by_fre(docs, 10.0, 5, seed=2, score_fn=planted_scorer(scores))
        assert [d.id for d in a.samples()[5]] != [d.id for d in b.samples()[5]]

    def test_order_independent_and_mergeable(self):
        import random

        rng = random.Random(3)
        docs = [Document(f"d{i}", "x") for i in range(200)]
        scores = {d.id: rng.uniform(0, 100) for d in docs}
        scorer = planted_scorer(scores)

        forward = bucket_by_fre(docs, 10.0, 7, seed=9, score_fn=scorer)
        shuffled = docs[:]
        rng.shuffle(shuffled)
        backward = bucket_by_fre(shuffled, 10.0, 7, seed=9, score_fn=scorer)
        assert [[d.id for d in s] for s in forward.samples()] == [
            [d.id for d in s] for s in backward.samples()
        ]

        # sharded accumulation merges to the same result
        left = BucketAccumulator(10.0, 7, 9)
        right = BucketAccumulator(10.0, 7, 9)
        for doc in docs[:100]:
            left.add(doc, scorer(doc))
        for doc in docs[100:]:
            right.add(doc, scorer(doc))
        left.merge(right)
        assert [[d.id for d in s] for s in left.samples()] == [
            [d.id for d in s] for s in forward.samples()
        ]
        assert left.n_docs == forward.n_docs

    def test_union_covers_all_readable(self):
        docs = [Document(f"d{i}", "x") for i in range(40)]
        scorer = planted_scorer({d.id: min(100.0, 2.5 * i) for i, d in enumerate(docs)})
        acc = bucket_by_fre(docs, 10.0, 1000, seed=0, score_fn=scorer)
        assert sum(acc.n_docs) == len(docs)
