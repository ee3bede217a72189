"""Corpus statistics: document lengths, vocabulary size, frequent-word
counts and cumulative top-k frequency.

Word types are normalized (casefolded) surfaces, not lemmas. Two distinct
type counts are exposed because the two are often conflated in corpus
reports: `vocab_size` counts distinct types over the whole corpus, while
`distinct_words` sums per-document distinct types (each document
deduplicated separately), which grows with corpus size.

Counting is a streaming accumulator with an associative merge, so sharded
runs produce the same result as a single pass regardless of shard count or
document order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .segmentation import Document, split_sentences, tokenize, word_tokens

__all__ = ["CorpusStats", "StatsAccumulator", "compute_stats", "top_k_types"]

DEFAULT_TOP_K = 1000
DEFAULT_FREQ_THRESHOLD = 1e-4


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_doc_len_words: float
    avg_doc_len_sentences: float
    vocab_size: int
    distinct_words: int
    frequent_words: int
    top_k_cumulative: float | None  # None for an empty corpus
    total_word_tokens: int
    k: int
    freq_threshold: float


def top_k_types(counts: Counter, k: int) -> list[tuple[str, int]]:
    """Top-k types by frequency, ties broken lexicographically."""
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


@dataclass
class StatsAccumulator:
    counts: Counter = field(default_factory=Counter)
    n_docs: int = 0
    total_words: int = 0
    total_sentences: int = 0
    sum_doc_distinct: int = 0

    def add(self, doc: Document) -> None:
        tokens = tokenize(doc.text)
        words = word_tokens(tokens)
        doc_counts = Counter(t.normalized for t in words)
        self.counts.update(doc_counts)
        self.n_docs += 1
        self.total_words += len(words)
        self.total_sentences += len(split_sentences(tokens))
        self.sum_doc_distinct += len(doc_counts)

    def merge(self, other: "StatsAccumulator") -> None:
        self.counts.update(other.counts)
        self.n_docs += other.n_docs
        self.total_words += other.total_words
        self.total_sentences += other.total_sentences
        self.sum_doc_distinct += other.sum_doc_distinct

    def finalize(
        self,
        k: int = DEFAULT_TOP_K,
        freq_threshold: float = DEFAULT_FREQ_THRESHOLD,
    ) -> CorpusStats:
        total = self.total_words
        if total == 0:
            return CorpusStats(
                self.n_docs, 0.0, 0.0, 0, 0, 0, None, 0, k, freq_threshold
            )
        frequent = sum(1 for c in self.counts.values() if c / total > freq_threshold)
        top_sum = sum(c for _, c in top_k_types(self.counts, k))
        return CorpusStats(
            n_docs=self.n_docs,
            avg_doc_len_words=self.total_words / self.n_docs,
            avg_doc_len_sentences=self.total_sentences / self.n_docs,
            vocab_size=len(self.counts),
            distinct_words=self.sum_doc_distinct,
            frequent_words=frequent,
            top_k_cumulative=top_sum / total,
            total_word_tokens=total,
            k=k,
            freq_threshold=freq_threshold,
        )


def compute_stats(
    docs: Iterable[Document],
    k: int = DEFAULT_TOP_K,
    freq_threshold: float = DEFAULT_FREQ_THRESHOLD,
) -> CorpusStats:
    acc = StatsAccumulator()
    for doc in docs:
        acc.add(doc)
    return acc.finalize(k, freq_threshold)


def doc_accumulator(doc: Document) -> StatsAccumulator:
    """Single-document accumulator; shard workers fold these with merge()."""
    acc = StatsAccumulator()
    acc.add(doc)
    return acc
