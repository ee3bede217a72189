"""Masked-probe construction from (subject, predicate, object) triples.

Sentence-derived probes replace the last verbatim occurrence of the target
(object or predicate) in the source sentence with the mask marker, so
substituting the gold token back reproduces the sentence exactly. Template
probes mask the final token of a subject+property statement. Targets must
be a single token in the active scorer vocabulary; triples failing a gate
are skipped with a reason rather than dropped silently, so skips plus
emitted probes always account for every input.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

__all__ = [
    "Triple",
    "Probe",
    "SkipReason",
    "ProbeSkip",
    "DEFAULT_MASK_MARKER",
    "MASK_SLOTS",
    "DATASET_TAGS",
    "TYPICALITY_BANDS",
    "assign_typicality_band",
    "mask_object_in_sentence",
    "mask_predicate_in_sentence",
    "build_template_probe",
    "build_probes",
    "parse_triples",
    "load_triples",
    "write_probes_jsonl",
    "read_probes_jsonl",
    "write_skips_tsv",
]

DEFAULT_MASK_MARKER = "[MASK]"
MASK_SLOTS = ("object", "predicate")
DATASET_TAGS = ("conceptnet", "cslb", "quasimodo_eval", "quasimodo")
TYPICALITY_BANDS = ("very_typical", "typical", "plausible")


class SkipReason(enum.Enum):
    NOT_IN_SENTENCE = "not_in_sentence"
    MULTI_TOKEN = "multi_token"
    NO_MASKABLE_TAIL = "no_maskable_tail"
    NO_SENTENCE = "no_sentence"


class ProbeSkip(Exception):
    def __init__(self, reason: SkipReason, detail: str = ""):
        super().__init__(detail or reason.value)
        self.reason = reason


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    obj: str
    typicality_score: float | None = None
    source_sentence: str | None = None

    def __post_init__(self) -> None:
        if not self.subject or not self.predicate or not self.obj:
            raise ValueError("subject, predicate and object must be non-empty")


@dataclass(frozen=True)
class Probe:
    probe_id: str
    text: str
    gold: str
    masked_slot: str  # "object" | "predicate"
    dataset_tag: str
    typicality_band: str | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "probe_id": self.probe_id,
                "text": self.text,
                "gold": self.gold,
                "masked_slot": self.masked_slot,
                "dataset_tag": self.dataset_tag,
                "typicality_band": self.typicality_band,
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def assign_typicality_band(score: float) -> str:
    """Half-open rating bands: [1,2) very_typical, [2,3) typical,
    [3,4) plausible."""
    if 1.0 <= score < 2.0:
        return "very_typical"
    if 2.0 <= score < 3.0:
        return "typical"
    if 3.0 <= score < 4.0:
        return "plausible"
    raise ValueError(f"typicality score {score!r} outside [1, 4)")


def _mask_last_occurrence(
    sentence: str, target: str, mask_marker: str, vocab_contains: Callable[[str], bool]
) -> str:
    if mask_marker in sentence:
        raise ValueError(f"sentence already contains the mask marker {mask_marker!r}")
    idx = sentence.rfind(target)
    if idx < 0:
        raise ProbeSkip(SkipReason.NOT_IN_SENTENCE, f"{target!r} not in sentence")
    if not vocab_contains(target):
        raise ProbeSkip(SkipReason.MULTI_TOKEN, f"{target!r} is not a single token")
    return sentence[:idx] + mask_marker + sentence[idx + len(target) :]


def _band_of(triple: Triple) -> str | None:
    if triple.typicality_score is None:
        return None
    return assign_typicality_band(triple.typicality_score)


def mask_object_in_sentence(
    triple: Triple,
    vocab_contains: Callable[[str], bool],
    *,
    probe_id: str,
    dataset_tag: str,
    mask_marker: str = DEFAULT_MASK_MARKER,
) -> Probe:
    """Mask the last verbatim occurrence of the object in the source
    sentence; gold is the object. Raises ProbeSkip when the object is
    absent or not a single vocabulary token."""
    if triple.source_sentence is None:
        raise ProbeSkip(SkipReason.NO_SENTENCE, "triple has no source sentence")
    text = _mask_last_occurrence(
        triple.source_sentence, triple.obj, mask_marker, vocab_contains
    )
    return Probe(probe_id, text, triple.obj, "object", dataset_tag, _band_of(triple))


def mask_predicate_in_sentence(
    triple: Triple,
    vocab_contains: Callable[[str], bool],
    *,
    probe_id: str,
    dataset_tag: str,
    mask_marker: str = DEFAULT_MASK_MARKER,
) -> Probe:
    """Like object masking, with the predicate as the masked target."""
    if triple.source_sentence is None:
        raise ProbeSkip(SkipReason.NO_SENTENCE, "triple has no source sentence")
    text = _mask_last_occurrence(
        triple.source_sentence, triple.predicate, mask_marker, vocab_contains
    )
    return Probe(
        probe_id, text, triple.predicate, "predicate", dataset_tag, _band_of(triple)
    )


def build_template_probe(
    subject: str,
    property_phrase: str,
    vocab_contains: Callable[[str], bool],
    *,
    probe_id: str,
    dataset_tag: str = "cslb",
    mask_marker: str = DEFAULT_MASK_MARKER,
    typicality_band: str | None = None,
) -> Probe:
    """Statement-template probe: "<Subject> <property-with-final-token-masked>."

    The final property token is the gold object. A single-token property has
    nothing left to state once masked, so it is an error.
    """
    prop_tokens = property_phrase.split()
    if len(prop_tokens) < 2:
        raise ProbeSkip(
            SkipReason.NO_MASKABLE_TAIL,
            f"property {property_phrase!r} has no maskable tail",
        )
    gold = prop_tokens[-1]
    if not vocab_contains(gold):
        raise ProbeSkip(SkipReason.MULTI_TOKEN, f"{gold!r} is not a single token")
    lead = subject[0].upper() + subject[1:]
    text = " ".join([lead, *prop_tokens[:-1], mask_marker]) + "."
    return Probe(probe_id, text, gold, "object", dataset_tag, typicality_band)


def parse_triples(lines: Iterable[str], *, source: str = "<triples>") -> list[Triple]:
    """Parse `subject<TAB>predicate<TAB>object[<TAB>score][<TAB>sentence]`
    rows; empty score/sentence fields are allowed."""
    triples = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if not 3 <= len(parts) <= 5:
            raise ValueError(f"{source}:{lineno}: expected 3-5 tab-separated fields")
        subject, predicate, obj = (p.strip() for p in parts[:3])
        score: float | None = None
        sentence: str | None = None
        if len(parts) >= 4 and parts[3].strip():
            try:
                score = float(parts[3])
            except ValueError:
                raise ValueError(f"{source}:{lineno}: bad score {parts[3]!r}")
        if len(parts) == 5 and parts[4].strip():
            sentence = parts[4]
        try:
            triples.append(Triple(subject, predicate, obj, score, sentence))
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}")
    return triples


def load_triples(path: str) -> list[Triple]:
    with open(path, encoding="utf-8") as f:
        return parse_triples(f, source=path)


def build_probes(
    triples: Sequence[Triple],
    mask: str,
    vocab_contains: Callable[[str], bool],
    *,
    dataset_tag: str,
    mask_marker: str = DEFAULT_MASK_MARKER,
) -> tuple[list[Probe], list[tuple[str, SkipReason]]]:
    """Build probes for a whole triple file.

    mask: "object" | "predicate" (sentence-derived) or "template"
    (subject + property statement, final token masked). Returns the emitted
    probes and a (probe_id, reason) skip list; their sizes always sum to
    len(triples).
    """
    probes: list[Probe] = []
    skips: list[tuple[str, SkipReason]] = []
    for i, triple in enumerate(triples):
        probe_id = f"{dataset_tag}-{mask[:4]}-{i:06d}"
        try:
            if mask == "object":
                probe = mask_object_in_sentence(
                    triple, vocab_contains,
                    probe_id=probe_id, dataset_tag=dataset_tag, mask_marker=mask_marker,
                )
            elif mask == "predicate":
                probe = mask_predicate_in_sentence(
                    triple, vocab_contains,
                    probe_id=probe_id, dataset_tag=dataset_tag, mask_marker=mask_marker,
                )
            elif mask == "template":
                probe = build_template_probe(
                    triple.subject, f"{triple.predicate} {triple.obj}",
                    vocab_contains,
                    probe_id=probe_id, dataset_tag=dataset_tag, mask_marker=mask_marker,
                    typicality_band=_band_of(triple),
                )
            else:
                raise ValueError(f"unknown mask slot {mask!r}")
        except ProbeSkip as skip:
            skips.append((probe_id, skip.reason))
        else:
            probes.append(probe)
    return probes, skips


def write_probes_jsonl(path: str, probes: Iterable[Probe]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for probe in probes:
            f.write(probe.to_json() + "\n")


def read_probes_jsonl(path: str) -> list[Probe]:
    probes = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                probes.append(
                    Probe(
                        row["probe_id"], row["text"], row["gold"],
                        row["masked_slot"], row["dataset_tag"],
                        row.get("typicality_band"),
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad probe row ({exc})")
    return probes


def write_skips_tsv(path: str, skips: Iterable[tuple[str, SkipReason]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for probe_id, reason in skips:
            f.write(f"{probe_id}\t{reason.value}\n")
