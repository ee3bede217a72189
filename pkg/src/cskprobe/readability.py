"""Flesch Reading-Ease scoring, threshold filtering and readability
bucketing.

The score uses the classic coefficients 206.835 / 1.015 / 84.6. Raw scores
are preserved (they can leave [0,100]); clamping applies only when bucketing
and reporting. Documents with no words or no sentences are flagged
unreadable rather than silently scored.

Bucket samples use seeded bottom-k priority sampling (a splittable,
order-independent form of reservoir sampling): each document's priority is a
keyed hash of (seed, bucket, doc id), and the k smallest priorities win.
That makes samples reproducible and independent of document order and
worker count.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .segmentation import (
    Document,
    count_syllables,
    split_sentences,
    tokenize,
    word_tokens,
)

__all__ = [
    "ReadabilityReport",
    "FreBucket",
    "FilterStats",
    "fre_from_counts",
    "compute_fre",
    "filter_by_fre",
    "bucket_by_fre",
    "bucket_index",
    "bucket_bounds",
    "sample_priority",
    "BucketAccumulator",
]

DEFAULT_MIN_FRE = 80.0
DEFAULT_BUCKET_WIDTH = 10.0
DEFAULT_SAMPLE_PER_BUCKET = 10_000


@dataclass(frozen=True)
class ReadabilityReport:
    doc_id: str
    n_sentences: int
    n_words: int
    n_syllables: int
    fre: float | None  # None when unreadable
    fre_clamped: float | None

    @property
    def readable(self) -> bool:
        return self.fre is not None


@dataclass
class FreBucket:
    lower: float  # inclusive
    upper: float  # exclusive, except the top bucket which closes at 100
    n_docs: int = 0
    sample_size: int = 0


@dataclass
class FilterStats:
    total: int = 0
    retained: int = 0
    unreadable: int = 0

    @property
    def retention(self) -> float | None:
        return self.retained / self.total if self.total else None


def fre_from_counts(n_sentences: int, n_words: int, n_syllables: int) -> float:
    """Closed-form Flesch Reading-Ease."""
    if n_sentences <= 0 or n_words <= 0:
        raise ValueError("FRE requires at least one sentence and one word")
    return 206.835 - 1.015 * (n_words / n_sentences) - 84.6 * (n_syllables / n_words)


def clamp_fre(fre: float) -> float:
    return min(100.0, max(0.0, fre))


def compute_fre(doc: Document) -> ReadabilityReport:
    """Score one document; unreadable (wordless/sentenceless) documents get
    fre=None so they are never silently averaged in."""
    tokens = tokenize(doc.text)
    sentences = split_sentences(tokens)
    words = word_tokens(tokens)
    n_syllables = sum(count_syllables(t.normalized) for t in words)
    n_sentences = len(sentences)
    n_words = len(words)
    if n_sentences == 0 or n_words == 0:
        return ReadabilityReport(doc.id, n_sentences, n_words, n_syllables, None, None)
    fre = fre_from_counts(n_sentences, n_words, n_syllables)
    return ReadabilityReport(doc.id, n_sentences, n_words, n_syllables, fre, clamp_fre(fre))


def filter_by_fre(
    docs: Iterable[Document],
    min_fre: float = DEFAULT_MIN_FRE,
    *,
    score_fn: Callable[[Document], ReadabilityReport] = compute_fre,
    stats: FilterStats | None = None,
) -> Iterator[Document]:
    """Yield exactly the documents whose FRE is strictly greater than
    min_fre. Unreadable documents are dropped and counted separately in
    `stats` (filled as the stream is consumed)."""
    if not math.isfinite(min_fre):
        raise ValueError("min_fre must be finite")
    for doc in docs:
        report = score_fn(doc)
        if stats is not None:
            stats.total += 1
        if report.fre is None:
            if stats is not None:
                stats.unreadable += 1
            continue
        if report.fre > min_fre:
            if stats is not None:
                stats.retained += 1
            yield doc


def bucket_bounds(bucket_width: float = DEFAULT_BUCKET_WIDTH) -> list[tuple[float, float]]:
    n = round(100.0 / bucket_width)
    if n <= 0 or abs(n * bucket_width - 100.0) > 1e-9:
        raise ValueError("bucket_width must divide 100")
    return [(i * bucket_width, (i + 1) * bucket_width) for i in range(n)]


def bucket_index(fre_clamped: float, bucket_width: float = DEFAULT_BUCKET_WIDTH) -> int:
    """Bucket of a clamped score; 100 falls into the top (closed) bucket."""
    n = round(100.0 / bucket_width)
    idx = int(fre_clamped // bucket_width)
    return min(idx, n - 1)


def sample_priority(seed: int, bucket_lower: float, doc_id: str) -> int:
    """Stable per-document priority; the k smallest form the bucket sample."""
    key = f"{seed}|{bucket_lower:g}|{doc_id}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


@dataclass
class BucketAccumulator:
    """Mergeable per-bucket counter plus bottom-k priority sample.

    Accumulators built over disjoint shards merge associatively, so bucket
    assignment and sampling are independent of sharding and worker count.
    """

    bucket_width: float = DEFAULT_BUCKET_WIDTH
    sample_per_bucket: int = DEFAULT_SAMPLE_PER_BUCKET
    seed: int = 0
    n_docs: list[int] = field(default_factory=list)
    unreadable: int = 0
    # per bucket: max-heap of (-priority, doc_id, doc) keeping the k smallest
    _heaps: list[list[tuple[int, str, Document]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        bounds = bucket_bounds(self.bucket_width)
        self._lowers = [lo for lo, _ in bounds]
        if not self.n_docs:
            self.n_docs = [0] * len(bounds)
        if not self._heaps:
            self._heaps = [[] for _ in bounds]

    def add(self, doc: Document, report: ReadabilityReport) -> None:
        if report.fre_clamped is None:
            self.unreadable += 1
            return
        idx = bucket_index(report.fre_clamped, self.bucket_width)
        self.n_docs[idx] += 1
        lower = self._lowers[idx]
        entry = (-sample_priority(self.seed, lower, doc.id), doc.id, doc)
        heap = self._heaps[idx]
        if len(heap) < self.sample_per_bucket:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)

    def merge(self, other: "BucketAccumulator") -> None:
        self.unreadable += other.unreadable
        for idx, heap in enumerate(other._heaps):
            self.n_docs[idx] += other.n_docs[idx]
            mine = self._heaps[idx]
            for entry in heap:
                if len(mine) < self.sample_per_bucket:
                    heapq.heappush(mine, entry)
                elif entry > mine[0]:
                    heapq.heapreplace(mine, entry)

    def samples(self) -> list[list[Document]]:
        """Sampled documents per bucket, in deterministic (priority) order."""
        return [
            [doc for _, _, doc in sorted(heap, reverse=True)] for heap in self._heaps
        ]

    def buckets(self) -> list[FreBucket]:
        return [
            FreBucket(lo, hi, self.n_docs[i], len(self._heaps[i]))
            for i, (lo, hi) in enumerate(bucket_bounds(self.bucket_width))
        ]


def bucket_by_fre(
    docs: Iterable[Document],
    bucket_width: float = DEFAULT_BUCKET_WIDTH,
    sample_per_bucket: int = DEFAULT_SAMPLE_PER_BUCKET,
    seed: int = 0,
    *,
    score_fn: Callable[[Document], ReadabilityReport] = compute_fre,
) -> BucketAccumulator:
    """Assign every readable document to its FRE bucket and keep a seeded
    uniform sample of at most sample_per_bucket documents per bucket."""
    acc = BucketAccumulator(bucket_width, sample_per_bucket, seed)
    for doc in docs:
        acc.add(doc, score_fn(doc))
    return acc
