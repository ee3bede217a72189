"""Ranked-retrieval metrics and the paired bootstrap."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cskprobe.metrics import (
    EvalRecord,
    aggregate,
    build_records,
    macro_precision_recall,
    paired_significance,
    precision_recall_at_k,
    rank_of_gold,
    reciprocal_rank,
)
from cskprobe.probes import Probe
from cskprobe.scorer import RankedPrediction


def pred(probe_id: str, *tokens: str) -> RankedPrediction:
    return RankedPrediction(probe_id, tuple((t, -float(i)) for i, t in enumerate(tokens)))


def records_from_ranks(ranks, prefix="p", **kwargs):
    return [
        EvalRecord(f"{prefix}{i}", "g", r, **kwargs) for i, r in enumerate(ranks)
    ]


class TestReciprocalRank:
    def test_rank_one(self):
        assert reciprocal_rank(pred("p", "gold", "x"), "gold") == 1.0

    def test_rank_four(self):
        assert reciprocal_rank(pred("p", "a", "b", "c", "gold"), "gold") == 0.25

    def test_absent_is_zero(self):
        assert reciprocal_rank(pred("p", "a", "b"), "gold") == 0.0

    def test_case_insensitive(self):
        assert rank_of_gold(pred("p", "Animal"), "animal") == 1

    def test_first_match_counts(self):
        assert rank_of_gold(pred("p", "x", "gold", "GOLD"), "gold") == 2


class TestAggregate:
    def test_hand_computed(self):
        reports = aggregate(records_from_ranks([1, 2, 4]), None, ks=(1, 10))
        rep = reports["all"]
        assert rep.mrr == pytest.approx((1 + 0.5 + 0.25) / 3, abs=1e-12)
        assert rep.hits_at[1] == pytest.approx(1 / 3)
        assert rep.hits_at[10] == 1.0
        assert rep.median_rr == 0.5
        assert rep.n == 3

    def test_all_rank_one(self):
        rep = aggregate(records_from_ranks([1, 1, 1]), None)["all"]
        assert rep.mrr == 1.0

    def test_absent_gold_counts_zero(self):
        rep = aggregate(records_from_ranks([1, None]), None)["all"]
        assert rep.mrr == 0.5
        assert rep.hits_at[10] == 0.5

    def test_group_by_dataset(self):
        records = records_from_ranks([1, 2], prefix="a", dataset_tag="cslb")
        records += records_from_ranks([4], prefix="b", dataset_tag="conceptnet")
        reports = aggregate(records, "dataset_tag")
        assert set(reports) == {"cslb", "conceptnet"}
        assert reports["cslb"].n == 2

    def test_group_by_band(self):
        records = records_from_ranks([1], prefix="a", typicality_band="typical")
        records += records_from_ranks([2], prefix="b", typicality_band="plausible")
        reports = aggregate(records, "typicality_band")
        assert reports["typical"].mrr == 1.0

    def test_missing_group_key_warns_and_drops(self):
        records = records_from_ranks([1], prefix="a", dataset_tag="cslb")
        records += records_from_ranks([1], prefix="b")  # no tag
        with pytest.warns(UserWarning):
            reports = aggregate(records, "dataset_tag")
        assert set(reports) == {"cslb"}

    def test_bad_group_key(self):
        with pytest.raises(ValueError):
            aggregate(records_from_ranks([1]), "favourite_colour")

    @given(st.lists(st.one_of(st.none(), st.integers(1, 50)), min_size=1, max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_hits_non_decreasing_and_bracket_mrr(self, ranks):
        ks = (1, 5, 10, 50)
        rep = aggregate(records_from_ranks(ranks), None, ks=ks)["all"]
        values = [rep.hits_at[k] for k in ks]
        assert values == sorted(values)
        # hits@1 <= mrr <= hits@k_max
        assert rep.hits_at[1] - 1e-12 <= rep.mrr <= rep.hits_at[50] + 1e-12

    def test_invariant_under_order_preserving_score_change(self):
        a = RankedPrediction("p0", (("x", -0.1), ("g", -0.2)))
        b = RankedPrediction("p0", (("x", 100.0), ("g", 50.0)))  # same order
        probeset = [Probe("p0", "[MASK]", "g", "object", "cslb", None)]
        rep_a = aggregate(build_records(probeset, [a]), None)["all"]
        rep_b = aggregate(build_records(probeset, [b]), None)["all"]
        assert rep_a == rep_b


class TestPrecisionRecall:
    def test_one_of_four(self):
        p, r = precision_recall_at_k(pred("q", "g1", "x", "y", "z", "w"), {"g1", "g2", "g3", "g4"}, 5)
        assert (p, r) == (0.2, 0.25)

    def test_perfect_when_golds_fill_topk(self):
        p, r = precision_recall_at_k(pred("q", "a", "b"), {"a", "b"}, 2)
        assert (p, r) == (1.0, 1.0)

    def test_short_candidate_list_keeps_k_denominator(self):
        p, r = precision_recall_at_k(pred("q", "a"), {"a", "b"}, 5)
        assert p == 0.2 and r == 0.5

    def test_empty_gold_set_rejected(self):
        with pytest.raises(ValueError):
            precision_recall_at_k(pred("q", "a"), set(), 5)

    def test_shared_intersection_integer_law(self):
        rng = random.Random(3)
        vocab = [f"t{i}" for i in range(30)]
        for _ in range(200):
            n_cand = rng.randint(0, 10)
            cand = rng.sample(vocab, n_cand)
            golds = set(rng.sample(vocab, rng.randint(1, 8)))
            k = rng.randint(1, 12)
            p, r = precision_recall_at_k(pred("q", *cand), golds, k)
            inter_p = p * k
            inter_r = r * len(golds)
            assert inter_p == pytest.approx(inter_r, abs=1e-9)
            assert inter_p == pytest.approx(round(inter_p), abs=1e-9)

    def test_macro_average(self):
        queries = [
            (pred("q1", "a", "x"), {"a"}),
            (pred("q2", "y", "z"), {"b"}),
        ]
        out = macro_precision_recall(queries, ks=(1,))
        assert out[1] == (0.5, 0.5)


class TestPairedSignificance:
    def test_identical_records_p_one(self):
        a = records_from_ranks([1, 2, 3, 4])
        assert paired_significance(a, list(a), seed=0) == 1.0

    def test_planted_improvement_significant(self):
        rng = random.Random(0)
        ranks_b = [rng.randint(2, 10) for _ in range(200)]
        ranks_a = [r - 1 for r in ranks_b]
        p = paired_significance(
            records_from_ranks(ranks_a), records_from_ranks(ranks_b), seed=1
        )
        assert p < 0.01

    def test_symmetric(self):
        rng = random.Random(5)
        ranks_a = [rng.randint(1, 10) for _ in range(50)]
        ranks_b = [rng.randint(1, 10) for _ in range(50)]
        a, b = records_from_ranks(ranks_a), records_from_ranks(ranks_b)
        assert paired_significance(a, b, seed=7) == paired_significance(b, a, seed=7)

    def test_deterministic_given_seed(self):
        rng = random.Random(9)
        a = records_from_ranks([rng.randint(1, 10) for _ in range(40)])
        b = records_from_ranks([rng.randint(1, 10) for _ in range(40)])
        assert paired_significance(a, b, seed=3) == paired_significance(a, b, seed=3)

    def test_unpaired_ids_error_lists_mismatches(self):
        a = records_from_ranks([1, 2], prefix="a")
        b = records_from_ranks([1, 2], prefix="b")
        with pytest.raises(ValueError, match="not paired"):
            paired_significance(a, b)

    def test_duplicate_ids_rejected(self):
        a = [EvalRecord("p0", "g", 1), EvalRecord("p0", "g", 2)]
        with pytest.raises(ValueError, match="duplicate"):
            paired_significance(a, a)


class TestBuildRecords:
    def test_joins_by_id(self):
        probes = [Probe("p0", "[MASK]", "cat", "object", "cslb", "typical")]
        records = build_records(probes, [pred("p0", "cat")])
        assert records[0].rank_of_gold == 1
        assert records[0].dataset_tag == "cslb"
        assert records[0].typicality_band == "typical"

    def test_missing_prediction_errors(self):
        probes = [Probe("p0", "[MASK]", "cat", "object", "cslb", None)]
        with pytest.raises(ValueError, match="no prediction"):
            build_records(probes, [])
