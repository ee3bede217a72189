"""Deterministic tokenization, sentence splitting, syllable counting and
lemmatization.

Everything here is pure and dependency-free: a regex tokenizer that keeps
internal apostrophes inside words and decimal/grouped digits inside numbers,
a rule-plus-abbreviation-list sentence splitter, a vowel-group syllable
heuristic, and a suffix-rule lemmatizer backed by an exception table.

Inputs are NFC-normalized; offsets in the returned tokens refer to the
normalized string. Vowel detection is restricted to ASCII vowels (documented
limitation); non-Latin letters still count as letters for tokenization.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "Document",
    "Token",
    "SentenceSpan",
    "Lemmatizer",
    "tokenize",
    "detokenize",
    "split_sentences",
    "count_syllables",
    "lemmatize",
    "lemmatize_word",
    "word_tokens",
    "sentence_word_lemmas",
]

# Numbers with internal . or , stay one token (3.14, 1,000); words may
# contain internal ASCII or typographic apostrophes (don't, O'Brien's).
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)+|[^\W_]+(?:['’][^\W_]+)*")

_TERMINATORS = frozenset(".!?")

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class Document:
    """One corpus unit: a unique id and its raw text."""

    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")


@dataclass(slots=True)
class Token:
    # slots, not frozen: tokens are created in the millions on corpus scans
    surface: str
    normalized: str
    lemma: str
    is_word: bool
    start: int  # offset into the NFC-normalized text


@dataclass(frozen=True)
class SentenceSpan:
    start: int  # token index, inclusive
    end: int  # token index, exclusive


def _load_lines(name: str) -> list[str]:
    data = resources.files("cskprobe").joinpath("data", name).read_text("utf-8")
    return [ln for ln in data.splitlines() if ln and not ln.startswith("#")]


class Lemmatizer:
    """Suffix-rule lemmatizer with an exception table.

    Collapses plural nouns and inflected verbs (-s/-es/-ies, -ed, -ing with
    consonant undoubling and e-restoration) to their base form. Irregular
    forms and words the rules would corrupt live in the exception table.
    Unknown forms pass through unchanged. Applied to fixpoint, so the result
    is idempotent by construction.
    """

    _UNDOUBLE = frozenset("bdgkmnprtv")

    def __init__(self, exceptions: dict[str, str] | None = None):
        if exceptions is None:
            exceptions = {}
            for ln in _load_lines("lemma_exceptions.tsv"):
                inflected, lemma = ln.split("\t")
                exceptions[inflected] = lemma
        self.exceptions = exceptions
        self._cache: dict[str, str] = {}

    def __call__(self, word: str) -> str:
        lemma = self._cache.get(word)
        if lemma is None:
            lemma = word
            for _ in range(5):  # fixpoint; converges in <= 2 steps in practice
                nxt = self._step(lemma)
                if nxt == lemma:
                    break
                lemma = nxt
            if len(self._cache) < 1 << 17:
                self._cache[word] = lemma
        return lemma

    def _step(self, w: str) -> str:
        hit = self.exceptions.get(w)
        if hit is not None:
            return hit
        if w.endswith("sses"):
            return w[:-2]
        if w.endswith("ies") and len(w) > 4:
            return w[:-3] + "y"
        if w.endswith(("xes", "ches", "shes")):
            return w[:-2]
        if w.endswith("oes") and len(w) > 4:
            return w[:-2]
        if w.endswith("s") and len(w) > 3 and not w.endswith(("ss", "us", "is")):
            return w[:-1]
        if w.endswith("ied") and len(w) > 4:
            return w[:-3] + "y"
        if w.endswith("eed"):
            return w
        if w.endswith("ed") and len(w) > 3:
            return self._fix_stem(w[:-2])
        if w.endswith("ying") and len(w) > 5:
            return w[:-4] + "y"
        if w.endswith("ing") and len(w) > 4:
            stem = w[:-3]
            if not _VOWEL_GROUP_RE.search(stem):
                return w  # bring, spring, thing: 'ing' is part of the root
            return self._fix_stem(stem)
        return w

    def _fix_stem(self, stem: str) -> str:
        groups = len(_VOWEL_GROUP_RE.findall(stem))
        last = stem[-1] if stem else ""
        if len(stem) >= 4 and last == stem[-2]:
            # doubled final consonant: stopped -> stop. 'll' only undoubles
            # for multi-syllable stems (controlled -> control, not call).
            if last in self._UNDOUBLE or (last == "l" and groups >= 2):
                return stem[:-1]
        if last in "cuvz":
            return stem + "e"  # danced, argued, loved, amazed
        if (
            len(stem) >= 2
            and last.isalpha()
            and last not in "aeiouwxy"
            and stem[-2] in "aeiou"
            and (len(stem) == 2 or stem[-3] not in "aeiou")
            and groups == 1
        ):
            return stem + "e"  # baked -> bake, closed -> close
        return stem


class _SentenceSplitter:
    def __init__(self, abbreviations: frozenset[str] | None = None):
        if abbreviations is None:
            abbreviations = frozenset(_load_lines("abbreviations.txt"))
        self.abbreviations = abbreviations

    def __call__(self, tokens: list[Token]) -> list[SentenceSpan]:
        if not tokens:
            return []
        spans: list[SentenceSpan] = []
        start = 0
        n = len(tokens)
        for i, tok in enumerate(tokens):
            if tok.surface not in _TERMINATORS:
                continue
            if tok.surface == "." and i > 0:
                prev = tokens[i - 1]
                if (
                    prev.is_word
                    and len(prev.normalized) > 1
                    and prev.normalized in self.abbreviations
                ):
                    continue
            if i + 1 < n and tokens[i + 1].surface in _TERMINATORS:
                continue  # boundary sits at the end of a ?!/... run
            spans.append(SentenceSpan(start, i + 1))
            start = i + 1
        if start < n:
            spans.append(SentenceSpan(start, n))
        return _merge_wordless(spans, tokens)


def _merge_wordless(spans: list[SentenceSpan], tokens: list[Token]) -> list[SentenceSpan]:
    # A span with no word tokens (e.g. a stranded closing quote) is not a
    # sentence; fold it into its neighbour.
    merged: list[SentenceSpan] = []
    merged_has_word: list[bool] = []
    for span in spans:
        has_word = any(tokens[i].is_word for i in range(span.start, span.end))
        if merged and (not has_word or not merged_has_word[-1]):
            prev = merged.pop()
            prev_has_word = merged_has_word.pop()
            merged.append(SentenceSpan(prev.start, span.end))
            merged_has_word.append(has_word or prev_has_word)
        else:
            merged.append(span)
            merged_has_word.append(has_word)
    return merged


_DEFAULT_LEMMATIZER: Lemmatizer | None = None
_DEFAULT_SPLITTER: _SentenceSplitter | None = None


def _default_lemmatizer() -> Lemmatizer:
    global _DEFAULT_LEMMATIZER
    if _DEFAULT_LEMMATIZER is None:
        _DEFAULT_LEMMATIZER = Lemmatizer()
    return _DEFAULT_LEMMATIZER


def _default_splitter() -> _SentenceSplitter:
    global _DEFAULT_SPLITTER
    if _DEFAULT_SPLITTER is None:
        _DEFAULT_SPLITTER = _SentenceSplitter()
    return _DEFAULT_SPLITTER


def lemmatize_word(word: str) -> str:
    """Lemmatize a single normalized (casefolded) word."""
    return _default_lemmatizer()(word)


def lemmatize(token: Token) -> str:
    """Lemma of a word token; raises on punctuation tokens."""
    if not token.is_word:
        raise ValueError(f"cannot lemmatize non-word token {token.surface!r}")
    return token.lemma


def tokenize(text: str, lemmatizer: Lemmatizer | None = None) -> list[Token]:
    """Split text into word/number/punctuation tokens.

    Deterministic; every non-whitespace character lands in exactly one
    token, so the input (after NFC normalization) can be reconstructed from
    the tokens and their offsets.
    """
    text = unicodedata.normalize("NFC", text)
    lemmer = lemmatizer or _default_lemmatizer()
    tokens: list[Token] = []

    def emit_gap(lo: int, hi: int) -> None:
        for j in range(lo, hi):
            ch = text[j]
            if not ch.isspace():
                tokens.append(Token(ch, ch.casefold(), ch, False, j))

    pos = 0
    for m in _TOKEN_RE.finditer(text):
        emit_gap(pos, m.start())
        surface = m.group()
        normalized = surface.casefold()
        is_word = any(c.isalpha() for c in surface)
        lemma = lemmer(normalized) if is_word else normalized
        tokens.append(Token(surface, normalized, lemma, is_word, m.start()))
        pos = m.end()
    emit_gap(pos, len(text))
    return tokens


def detokenize(text: str, tokens: list[Token]) -> str:
    """Rebuild the NFC-normalized input from tokens plus inter-token gaps."""
    text = unicodedata.normalize("NFC", text)
    parts: list[str] = []
    prev_end = 0
    for tok in tokens:
        parts.append(text[prev_end : tok.start])
        parts.append(tok.surface)
        prev_end = tok.start + len(tok.surface)
    parts.append(text[prev_end:])
    return "".join(parts)


def split_sentences(tokens: list[Token]) -> list[SentenceSpan]:
    """Sentence spans over a token sequence.

    Boundaries fall after sentence-final . ! ? runs, except after known
    abbreviations; trailing material without a terminator forms one final
    sentence. Spans partition the tokens.
    """
    return _default_splitter()(tokens)


_SYLLABLE_CACHE: dict[str, int] = {}


def count_syllables(word: str) -> int:
    """Heuristic syllable count: maximal ASCII vowel groups (a,e,i,o,u,y),
    minus one for a terminal silent 'e' when another group exists, clamped
    to >= 1."""
    w = word.casefold()
    cached = _SYLLABLE_CACHE.get(w)
    if cached is not None:
        return cached
    if not any(c.isalpha() for c in word):
        raise ValueError(f"not a word: {word!r}")
    groups = _VOWEL_GROUP_RE.findall(w)
    n = len(groups)
    if n >= 2 and w.endswith("e") and groups[-1] == "e":
        n -= 1
    n = max(n, 1)
    if len(_SYLLABLE_CACHE) < 1 << 17:
        _SYLLABLE_CACHE[w] = n
    return n


def word_tokens(tokens: list[Token]) -> list[Token]:
    return [t for t in tokens if t.is_word]


def sentence_word_lemmas(
    tokens: list[Token], spans: list[SentenceSpan]
) -> list[list[str]]:
    """Per-sentence lemma streams (word tokens only)."""
    return [
        [tokens[i].lemma for i in range(span.start, span.end) if tokens[i].is_word]
        for span in spans
    ]
