"""Commonsense-assertion spotting and density reports.

Patterns are lemmatized (subject, property) phrase pairs. A pattern matches
a sentence when the subject lemmas occur contiguously in the sentence's
lemma stream and the property lemmas occur contiguously starting at or
after the end of a subject occurrence; `loose=True` drops the ordering
constraint. Each (pattern, sentence) pair is counted at most once, so a
single listy sentence cannot inflate the density.

Spotting is multi-pattern: subject and property phrases are interned into
one automaton and every document is scanned in a single pass, with a
negative separator symbol between sentences so phrases cannot straddle a
boundary. Note that negation is not handled: "is not green" still matches
(subject ... property ordering holds).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from ._ac import PhraseAutomaton
from .readability import (
    DEFAULT_BUCKET_WIDTH,
    DEFAULT_SAMPLE_PER_BUCKET,
    BucketAccumulator,
    bucket_bounds,
    compute_fre,
)
from .segmentation import (
    Document,
    Lemmatizer,
    sentence_word_lemmas,
    split_sentences,
    tokenize,
)

__all__ = [
    "AssertionPattern",
    "MatchEvent",
    "DensityReport",
    "BucketDensity",
    "AssertionSpotter",
    "load_assertions",
    "parse_assertions",
    "spot",
    "density",
    "bucket_density",
]

DEFAULT_MIN_SUPPORT = 5
DEFAULT_TOP_PROPERTIES = 4245


@dataclass(frozen=True)
class AssertionPattern:
    pattern_id: str
    subject_lemmas: tuple[str, ...]
    property_lemmas: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.subject_lemmas or not self.property_lemmas:
            raise ValueError(f"pattern {self.pattern_id!r} has an empty phrase")


@dataclass(frozen=True)
class MatchEvent:
    pattern_id: str
    doc_id: str
    sentence_index: int


@dataclass(frozen=True)
class DensityReport:
    total_matches: int
    distinct_patterns_matched: int
    n_sentences: int
    n_words: int

    @property
    def per_sentence(self) -> float | None:
        return self.total_matches / self.n_sentences if self.n_sentences else None

    @property
    def per_word(self) -> float | None:
        return self.total_matches / self.n_words if self.n_words else None


@dataclass(frozen=True)
class BucketDensity:
    lower: float
    upper: float
    n_docs: int
    n_sampled: int
    n_words: int
    total_matches: int
    distinct_matches: int

    @property
    def per_word_all(self) -> float | None:
        return self.total_matches / self.n_words if self.n_words else None

    @property
    def per_word_distinct(self) -> float | None:
        return self.distinct_matches / self.n_words if self.n_words else None


def _lemmatize_phrase(text: str, lemmatizer: Lemmatizer | None) -> tuple[str, ...]:
    return tuple(
        t.lemma for t in tokenize(text, lemmatizer=lemmatizer) if t.is_word
    )


def parse_assertions(
    lines: Iterable[str],
    min_property_support: int = DEFAULT_MIN_SUPPORT,
    top_properties: int = DEFAULT_TOP_PROPERTIES,
    *,
    lemmatizer: Lemmatizer | None = None,
    source: str = "<assertions>",
) -> list[AssertionPattern]:
    """Parse `subject<TAB>property<TAB>support` lines into lemmatized
    patterns: drop support below the threshold, rank by support and keep the
    top entries. Duplicate (subject, property) rows aggregate their support.
    """
    raw: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(
                f"{source}:{lineno}: expected subject<TAB>property<TAB>support, got {line!r}"
            )
        subject, prop, support_s = parts
        try:
            support = int(support_s)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: support {support_s!r} is not an integer")
        if not subject.strip() or not prop.strip():
            raise ValueError(f"{source}:{lineno}: empty subject or property")
        key = (subject.strip(), prop.strip())
        raw[key] = raw.get(key, 0) + support

    kept = [
        (support, subject, prop)
        for (subject, prop), support in raw.items()
        if support >= min_property_support
    ]
    kept.sort(key=lambda row: (-row[0], row[1], row[2]))
    kept = kept[:top_properties]

    patterns = []
    for support, subject, prop in kept:
        subject_lemmas = _lemmatize_phrase(subject, lemmatizer)
        property_lemmas = _lemmatize_phrase(prop, lemmatizer)
        if not subject_lemmas or not property_lemmas:
            raise ValueError(
                f"{source}: assertion ({subject!r}, {prop!r}) has no word content"
            )
        patterns.append(
            AssertionPattern(f"{subject}::{prop}", subject_lemmas, property_lemmas)
        )
    if not patterns:
        raise ValueError(f"{source}: no assertion passed the support threshold")
    return patterns


def load_assertions(
    path: str,
    min_property_support: int = DEFAULT_MIN_SUPPORT,
    top_properties: int = DEFAULT_TOP_PROPERTIES,
    *,
    lemmatizer: Lemmatizer | None = None,
) -> list[AssertionPattern]:
    with open(path, encoding="utf-8") as f:
        return parse_assertions(
            f, min_property_support, top_properties,
            lemmatizer=lemmatizer, source=path,
        )


class AssertionSpotter:
    """Immutable spotting engine for a fixed pattern set.

    Subject and property phrases are interned once; each document is
    tokenized, split into sentences and scanned in a single automaton pass.
    """

    def __init__(
        self,
        patterns: Sequence[AssertionPattern],
        *,
        loose: bool = False,
        backend: str | None = None,
    ):
        if not patterns:
            raise ValueError("patterns must be non-empty")
        ids = {p.pattern_id for p in patterns}
        if len(ids) != len(patterns):
            raise ValueError("pattern_id values must be unique")
        self.loose = loose
        self.backend = backend
        self.patterns = list(patterns)

        self._symbols: dict[str, int] = {}
        phrase_ids: dict[tuple[int, ...], int] = {}
        phrases: list[tuple[int, ...]] = []

        def intern_phrase(lemmas: tuple[str, ...]) -> int:
            key = tuple(self._symbols.setdefault(l, len(self._symbols)) for l in lemmas)
            pid = phrase_ids.get(key)
            if pid is None:
                pid = len(phrases)
                phrase_ids[key] = pid
                phrases.append(key)
            return pid

        # patterns indexed by their subject phrase for per-sentence lookup
        self._by_subject: dict[int, list[tuple[int, str]]] = {}
        for pat in patterns:
            sub = intern_phrase(pat.subject_lemmas)
            prop = intern_phrase(pat.property_lemmas)
            self._by_subject.setdefault(sub, []).append((prop, pat.pattern_id))
        self._phrase_len = [len(p) for p in phrases]
        self._automaton = PhraseAutomaton(phrases)

    def sentence_streams(self, doc: Document) -> list[list[str]]:
        tokens = tokenize(doc.text)
        return sentence_word_lemmas(tokens, split_sentences(tokens))

    def spot_lemma_sentences(
        self, doc_id: str, sentences: Sequence[Sequence[str]]
    ) -> list[MatchEvent]:
        """Match events over pre-lemmatized sentence streams."""
        symbols: list[int] = []
        offsets: list[int] = []  # start offset of each sentence in `symbols`
        for sent in sentences:
            offsets.append(len(symbols))
            symbols.extend(self._symbols.get(lemma, -1) for lemma in sent)
            symbols.append(-1)  # separator: phrases cannot straddle sentences

        events: list[MatchEvent] = []
        occurrences = self._automaton.scan(symbols, backend=self.backend)
        if not occurrences:
            return events

        # group phrase occurrences per sentence, keeping the earliest end
        # and latest start seen for each phrase
        per_sentence: dict[int, dict[int, tuple[int, int]]] = {}
        for pid, end in occurrences:
            s_idx = bisect.bisect_right(offsets, end - 1) - 1
            start = end - self._phrase_len[pid]
            seen = per_sentence.setdefault(s_idx, {})
            first_end, last_start = seen.get(pid, (1 << 60, -1))
            seen[pid] = (min(first_end, end), max(last_start, start))

        for s_idx in sorted(per_sentence):
            found = per_sentence[s_idx]
            matched: list[str] = []
            for sub_pid, cands in self._by_subject.items():
                sub_hit = found.get(sub_pid)
                if sub_hit is None:
                    continue
                min_sub_end = sub_hit[0]
                for prop_pid, pattern_id in cands:
                    prop_hit = found.get(prop_pid)
                    if prop_hit is None:
                        continue
                    if self.loose or prop_hit[1] >= min_sub_end:
                        matched.append(pattern_id)
            for pattern_id in sorted(matched):
                events.append(MatchEvent(pattern_id, doc_id, s_idx))
        return events

    def spot_document(self, doc: Document) -> tuple[list[MatchEvent], int, int]:
        """Match events plus (n_sentences, n_words) for one document."""
        sentences = self.sentence_streams(doc)
        events = self.spot_lemma_sentences(doc.id, sentences)
        return events, len(sentences), sum(len(s) for s in sentences)


def spot(
    docs: Iterable[Document],
    patterns: Sequence[AssertionPattern],
    *,
    loose: bool = False,
    backend: str | None = None,
) -> Iterator[MatchEvent]:
    """Stream match events over a corpus, one automaton pass per document."""
    spotter = AssertionSpotter(patterns, loose=loose, backend=backend)
    for doc in docs:
        yield from spotter.spot_lemma_sentences(doc.id, spotter.sentence_streams(doc))


def density(
    matches: Iterable[MatchEvent], n_sentences: int, n_words: int
) -> DensityReport:
    total = 0
    distinct: set[str] = set()
    for event in matches:
        total += 1
        distinct.add(event.pattern_id)
    return DensityReport(total, len(distinct), n_sentences, n_words)


def bucket_density(
    docs: Iterable[Document],
    patterns: Sequence[AssertionPattern],
    bucket_width: float = DEFAULT_BUCKET_WIDTH,
    sample_per_bucket: int = DEFAULT_SAMPLE_PER_BUCKET,
    seed: int = 0,
    *,
    loose: bool = False,
    backend: str | None = None,
    accumulator: BucketAccumulator | None = None,
) -> list[BucketDensity]:
    """Per-FRE-bucket densities over seeded per-bucket document samples.

    For each bucket's sample: per-word density of all matches, and of
    distinct patterns (each pattern counted at most once per bucket). Memory
    is bounded by bucket count x sample_per_bucket documents.
    """
    if accumulator is None:
        accumulator = BucketAccumulator(bucket_width, sample_per_bucket, seed)
        for doc in docs:
            accumulator.add(doc, compute_fre(doc))
    spotter = AssertionSpotter(patterns, loose=loose, backend=backend)

    out: list[BucketDensity] = []
    bounds = bucket_bounds(bucket_width)
    for idx, sample in enumerate(accumulator.samples()):
        n_words = 0
        total = 0
        distinct: set[str] = set()
        for doc in sorted(sample, key=lambda d: d.id):
            events, _, words = spotter.spot_document(doc)
            n_words += words
            total += len(events)
            distinct.update(e.pattern_id for e in events)
        lo, hi = bounds[idx]
        out.append(
            BucketDensity(
                lo, hi, accumulator.n_docs[idx], len(sample), n_words, total, len(distinct)
            )
        )
    return out
