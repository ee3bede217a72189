"""Probe construction: masking rules, skip accounting, typicality bands,
file round-trips."""

from __future__ import annotations

import pytest

from cskprobe.probes import (
    Probe,
    ProbeSkip,
    SkipReason,
    Triple,
    assign_typicality_band,
    build_probes,
    build_template_probe,
    mask_object_in_sentence,
    mask_predicate_in_sentence,
    parse_triples,
    read_probes_jsonl,
    write_probes_jsonl,
)
from cskprobe.segmentation import tokenize


def any_token(token: str) -> bool:
    return bool(token) and not any(c.isspace() for c in token)


class TestMaskObject:
    def test_basic(self):
        triple = Triple("dolphin", "IsA", "animal", None, "Dolphin is an animal.")
        probe = mask_object_in_sentence(
            triple, any_token, probe_id="p0", dataset_tag="conceptnet"
        )
        assert probe.text == "Dolphin is an [MASK]."
        assert probe.gold == "animal"
        assert probe.masked_slot == "object"

    def test_multi_token_object_skipped(self):
        triple = Triple("mug", "holds", "ice cream", None, "Mugs hold ice cream.")
        with pytest.raises(ProbeSkip) as exc:
            mask_object_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert exc.value.reason is SkipReason.MULTI_TOKEN

    def test_object_not_in_sentence_skipped(self):
        triple = Triple("sun", "is", "hot", None, "The moon is far.")
        with pytest.raises(ProbeSkip) as exc:
            mask_object_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert exc.value.reason is SkipReason.NOT_IN_SENTENCE

    def test_last_occurrence_masked(self):
        triple = Triple("cat", "ate", "cat", None, "the cat ate the cat")
        probe = mask_object_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert probe.text == "the cat ate the [MASK]"
        # exhaustive check: replacing the mask with gold restores the input,
        # and the mask sits at the final occurrence
        restored = probe.text.replace("[MASK]", "cat")
        assert restored == "the cat ate the cat"
        assert probe.text.rindex("[MASK]") > restored.rindex("cat") - len("cat")

    def test_vocab_gate_uses_scorer_vocab(self):
        triple = Triple("pencil", "made_of", "graphite", None, "Pencils are made of graphite.")
        with pytest.raises(ProbeSkip) as exc:
            mask_object_in_sentence(
                triple, lambda t: t != "graphite", probe_id="p", dataset_tag="quasimodo"
            )
        assert exc.value.reason is SkipReason.MULTI_TOKEN

    def test_no_sentence_skipped(self):
        triple = Triple("a", "b", "c")
        with pytest.raises(ProbeSkip) as exc:
            mask_object_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert exc.value.reason is SkipReason.NO_SENTENCE

    def test_marker_collision_is_error(self):
        triple = Triple("a", "b", "c", None, "c already has [MASK] inside")
        with pytest.raises(ValueError):
            mask_object_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")

    def test_band_carried_from_score(self):
        triple = Triple("duck", "lives", "water", 1.4, "Ducks live in water.")
        probe = mask_object_in_sentence(
            triple, any_token, probe_id="p", dataset_tag="quasimodo_eval"
        )
        assert probe.typicality_band == "very_typical"


class TestMaskPredicate:
    def test_basic(self):
        triple = Triple("duck", "live", "water", None, "Ducks live in water.")
        probe = mask_predicate_in_sentence(
            triple, any_token, probe_id="p", dataset_tag="quasimodo_eval"
        )
        assert probe.text == "Ducks [MASK] in water."
        assert probe.gold == "live"
        assert probe.masked_slot == "predicate"

    def test_predicate_absent_skipped(self):
        triple = Triple("duck", "swims", "water", None, "Ducks live in water.")
        with pytest.raises(ProbeSkip) as exc:
            mask_predicate_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert exc.value.reason is SkipReason.NOT_IN_SENTENCE

    def test_multi_token_predicate_skipped(self):
        triple = Triple("pencil", "made of", "wood", None, "Pencils are made of wood.")
        with pytest.raises(ProbeSkip) as exc:
            mask_predicate_in_sentence(triple, any_token, probe_id="p", dataset_tag="cslb")
        assert exc.value.reason is SkipReason.MULTI_TOKEN


class TestTemplateProbe:
    def test_mug_holds_tea(self):
        probe = build_template_probe("mug", "hold tea", any_token, probe_id="p")
        assert probe.text == "Mug hold [MASK]."
        assert probe.gold == "tea"

    def test_cat_chases_strings(self):
        probe = build_template_probe("cat", "chase strings", any_token, probe_id="p")
        assert probe.text == "Cat chase [MASK]."
        assert probe.gold == "strings"

    def test_single_token_property_errors(self):
        with pytest.raises(ProbeSkip) as exc:
            build_template_probe("sun", "hot", any_token, probe_id="p")
        assert exc.value.reason is SkipReason.NO_MASKABLE_TAIL


class TestTypicalityBand:
    @pytest.mark.parametrize(
        "score,band",
        [
            (1.0, "very_typical"),
            (1.99, "very_typical"),
            (2.0, "typical"),
            (2.99, "typical"),
            (3.0, "plausible"),
            (3.99, "plausible"),
        ],
    )
    def test_half_open_bands(self, score, band):
        assert assign_typicality_band(score) == band

    @pytest.mark.parametrize("score", [4.0, 0.5, -1.0, 5.0])
    def test_out_of_range_rejected(self, score):
        with pytest.raises(ValueError):
            assign_typicality_band(score)


class TestBuildProbes:
    def make_triples(self):
        return [
            Triple("dolphin", "is", "animal", 1.5, "Dolphin is an animal."),
            Triple("mug", "holds", "ice cream", None, "Mugs hold ice cream."),
            Triple("sun", "is", "hot", None, "The moon is far."),
            Triple("duck", "lives", "water", 2.5, "Ducks live in water."),
        ]

    def test_conservation(self):
        triples = self.make_triples()
        probes, skips = build_probes(
            triples, "object", any_token, dataset_tag="quasimodo_eval"
        )
        assert len(probes) + len(skips) == len(triples)
        assert [p.probe_id for p in probes] == [
            "quasimodo_eval-obje-000000",
            "quasimodo_eval-obje-000003",
        ]
        assert {r for _, r in skips} == {SkipReason.MULTI_TOKEN, SkipReason.NOT_IN_SENTENCE}

    def test_round_trip_to_source_tokens(self):
        triples = self.make_triples()
        probes, _ = build_probes(triples, "object", any_token, dataset_tag="quasimodo_eval")
        sentences = {p.probe_id: s for p, s in zip(probes, [
            "Dolphin is an animal.", "Ducks live in water."
        ])}
        for probe in probes:
            restored = probe.text.replace("[MASK]", probe.gold)
            want = sentences[probe.probe_id]
            assert restored == want
            assert [t.surface for t in tokenize(restored)] == [
                t.surface for t in tokenize(want)
            ]

    def test_deterministic_ids(self):
        triples = self.make_triples()
        a = build_probes(triples, "object", any_token, dataset_tag="quasimodo_eval")
        b = build_probes(triples, "object", any_token, dataset_tag="quasimodo_eval")
        assert a == b

    def test_custom_mask_marker(self):
        probes, _ = build_probes(
            self.make_triples()[:1], "object", any_token,
            dataset_tag="conceptnet", mask_marker="<mask>",
        )
        assert probes[0].text == "Dolphin is an <mask>."


class TestTripleIO:
    def test_parse_full_row(self):
        rows = parse_triples(["duck\tlives\twater\t1.5\tDucks live in water."])
        assert rows[0] == Triple("duck", "lives", "water", 1.5, "Ducks live in water.")

    def test_optional_fields(self):
        rows = parse_triples(["a\tb\tc", "a\tb\tc\t\t", "a\tb\tc\t2.5"])
        assert rows[0].typicality_score is None and rows[0].source_sentence is None
        assert rows[1].typicality_score is None
        assert rows[2].typicality_score == 2.5

    def test_bad_row_reports_line(self):
        with pytest.raises(ValueError, match=":2:"):
            parse_triples(["a\tb\tc", "only\ttwo"])

    def test_bad_score_reports_line(self):
        with pytest.raises(ValueError, match=":1:"):
            parse_triples(["a\tb\tc\tnot_a_number"])

    def test_probe_jsonl_round_trip(self, tmp_path):
        probes = [
            Probe("p0", "A [MASK].", "cat", "object", "cslb", None),
            Probe("p1", "B [MASK].", "dog", "object", "quasimodo", "typical"),
        ]
        path = tmp_path / "probes.jsonl"
        write_probes_jsonl(str(path), probes)
        assert read_probes_jsonl(str(path)) == probes
