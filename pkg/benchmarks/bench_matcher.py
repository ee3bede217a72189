#!/usr/bin/env python3
"""Benchmark the phrase-automaton scan kernels (compiled vs pure Python).

Generates a synthetic pattern set and corpus, then times raw automaton
scans and the full spotting pipeline on each available backend.

    python3 benchmarks/bench_matcher.py --patterns 2000 --docs 2000
"""

from __future__ import annotations

import argparse
import random
import time

from cskprobe._ac import PhraseAutomaton, available_backends
from cskprobe.csk_density import AssertionPattern, AssertionSpotter
from cskprobe.segmentation import Document

# filler vocabulary is much larger than the pattern vocabulary, so matches
# stay sparse like real corpora
PATTERN_WORDS = [
    "cat", "dog", "bird", "fish", "lion", "bear", "water", "grass", "tree",
    "house", "car", "sun", "moon", "rock", "rain", "snow", "wind", "leaf",
    "sleep", "run", "jump", "swim", "fly", "eat", "drink", "hunt", "play",
    "green", "red", "blue", "big", "small", "fast", "slow", "warm", "cold",
    "wild", "tame", "loud", "quiet", "wet", "dry", "tall", "short", "old",
]
FILLER_WORDS = [f"word{i}" for i in range(3000)]


def make_patterns(n: int, rng: random.Random) -> list[AssertionPattern]:
    patterns = []
    for i in range(n):
        subject = rng.choice(PATTERN_WORDS)
        prop = f"be {rng.choice(PATTERN_WORDS)}" if rng.random() < 0.5 else (
            f"{rng.choice(PATTERN_WORDS)} {rng.choice(PATTERN_WORDS)}"
        )
        patterns.append(
            AssertionPattern(f"{subject}::{prop}-{i}", (subject,), tuple(prop.split()))
        )
    return patterns


def make_docs(n: int, rng: random.Random) -> list[Document]:
    docs = []
    for i in range(n):
        sentences = []
        for _ in range(rng.randint(5, 15)):
            words = [
                rng.choice(PATTERN_WORDS) if rng.random() < 0.35 else rng.choice(FILLER_WORDS)
                for _ in range(rng.randint(5, 14))
            ]
            sentences.append(" ".join(words).capitalize() + ".")
        docs.append(Document(f"doc{i}", " ".join(sentences)))
    return docs


def bench_raw(auto: PhraseAutomaton, streams: list[list[int]], backend: str) -> tuple[float, int]:
    start = time.perf_counter()
    hits = 0
    for stream in streams:
        hits += len(auto.scan(stream, backend=backend))
    return time.perf_counter() - start, hits


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--patterns", type=int, default=2000)
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    patterns = make_patterns(args.patterns, rng)
    docs = make_docs(args.docs, rng)
    print(f"{len(patterns)} patterns, {len(docs)} docs")

    spotter = AssertionSpotter(patterns)
    streams = []
    total_symbols = 0
    for doc in docs:
        symbols = []
        for sent in spotter.sentence_streams(doc):
            symbols.extend(spotter._symbols.get(l, -1) for l in sent)
            symbols.append(-1)
        streams.append(symbols)
        total_symbols += len(symbols)
    print(f"{total_symbols} symbols to scan")

    results = {}
    for backend in available_backends():
        elapsed, hits = bench_raw(spotter._automaton, streams, backend)
        rate = total_symbols / elapsed / 1e6
        results[backend] = elapsed
        print(f"raw scan [{backend:7}] {elapsed:8.3f}s  {rate:7.2f} Msym/s  ({hits} phrase hits)")

    if "cython" in results and "python" in results:
        print(f"kernel speedup: {results['python'] / results['cython']:.1f}x")

    for backend in available_backends():
        spotter_b = AssertionSpotter(patterns, backend=backend)
        start = time.perf_counter()
        events = 0
        for doc in docs:
            events += len(spotter_b.spot_document(doc)[0])
        elapsed = time.perf_counter() - start
        print(f"full spotting [{backend:7}] {elapsed:8.3f}s  ({events} match events)")


if __name__ == "__main__":
    main()
