"""Turn raw sentences into normalized token sequences and deduplicate them.

Normalization order: tokenize, expand abbreviations, tag negation scopes,
remove stopwords, optionally fold distance-1 typos onto frequent vocabulary
words. Word order is preserved throughout.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import EmptySentenceAfterNormalization
from .ingest import Corpus, RawSentence, SectionKind

logger = logging.getLogger(__name__)

DEFAULT_NEGATION_TRIGGERS = frozenset({"no", "not", "without", "denies", "negative"})
DEFAULT_SCOPE_TERMINATORS = frozenset({"but", "however", "except"})

# Word = letter/digit runs glued by single intra-word hyphens or decimal
# points; everything else separates tokens.
_WORD = re.compile(r"[^\W_]+(?:[-.][^\W_]+)*")

# Rendered surface of a negated token; tokenize never emits "!", so the
# rendering stays reversible.
_NEG_MARK = "!"


@dataclass(frozen=True)
class Token:
    surface: str
    negated: bool = False

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"bad token surface: {self.surface!r}")

    def render(self) -> str:
        return _NEG_MARK + self.surface if self.negated else self.surface

    @classmethod
    def parse(cls, text: str) -> "Token":
        if text.startswith(_NEG_MARK):
            return cls(text[len(_NEG_MARK):], True)
        return cls(text, False)


@dataclass(frozen=True)
class SourceRef:
    report_id: str
    index_in_section: int


@dataclass(frozen=True)
class NormalizedSentence:
    tokens: tuple[Token, ...]
    section: SectionKind
    sources: tuple[SourceRef, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("normalized sentence has no tokens")

    @property
    def frequency(self) -> int:
        return len(self.sources)

    @cached_property
    def words(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @cached_property
    def negs(self) -> tuple[bool, ...]:
        return tuple(t.negated for t in self.tokens)

    @cached_property
    def surface_text(self) -> str:
        return " ".join(t.render() for t in self.tokens)

    @cached_property
    def sort_key(self) -> bytes:
        return self.surface_text.encode("utf-8")


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = resources.files("labelforge.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(_parse_wordlist(text))


def _parse_wordlist(text: str) -> list[str]:
    words = []
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.append(word)
    return words


def load_stopwords(path) -> frozenset[str]:
    """Stopword file: one word per line, ``#`` comments."""
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(_parse_wordlist(fh.read()))


def load_abbreviations(path) -> dict[str, tuple[str, ...]]:
    """Abbreviation file: ``abbrev<TAB>expansion words`` per line."""
    out: dict[str, tuple[str, ...]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            abbrev, _, expansion = line.partition("\t")
            words = tuple(expansion.lower().split())
            if not abbrev.strip() or not words:
                raise ValueError(f"bad abbreviation line: {line!r}")
            out[abbrev.strip().lower()] = words
    return out


@dataclass(frozen=True)
class NormalizationConfig:
    stopwords: frozenset[str] = frozenset()
    abbreviations: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    negation_triggers: frozenset[str] = DEFAULT_NEGATION_TRIGGERS
    negation_scope_terminators: frozenset[str] = DEFAULT_SCOPE_TERMINATORS
    typo_folding: bool = False
    typo_min_vocab_freq: int = 5

    def __post_init__(self):
        for abbrev, expansion in self.abbreviations.items():
            if not expansion:
                raise ValueError(f"abbreviation {abbrev!r} maps to empty expansion")
        overlap = self.stopwords & self.negation_triggers
        if overlap:
            raise ValueError(f"stopwords overlap negation triggers: {sorted(overlap)}")

    @classmethod
    def default(cls) -> "NormalizationConfig":
        return cls(stopwords=default_stopwords())


def tokenize(raw: str) -> list[Token]:
    """Lowercase and split on whitespace/punctuation; all tokens positive."""
    return [Token(m.group(0)) for m in _WORD.finditer(raw.lower())]


def _tokenize_with_boundaries(raw: str) -> tuple[list[Token], set[int]]:
    """Tokenize and record indices preceded by dropped punctuation.

    Negation scopes must not cross punctuation, but tokenize discards it;
    the boundary set keeps that information for tag_negations.
    """
    tokens: list[Token] = []
    boundaries: set[int] = set()
    prev_end = 0
    for m in _WORD.finditer(raw.lower()):
        gap = raw[prev_end : m.start()]
        if tokens and any(not c.isspace() for c in gap):
            boundaries.add(len(tokens))
        tokens.append(Token(m.group(0)))
        prev_end = m.end()
    return tokens, boundaries


def expand_abbreviations(
    tokens: Sequence[Token], config: NormalizationConfig
) -> list[Token]:
    out, _ = _expand_abbreviations(tokens, frozenset(), config)
    return out


def _expand_abbreviations(
    tokens: Sequence[Token], boundaries: frozenset[int] | set[int],
    config: NormalizationConfig,
) -> tuple[list[Token], set[int]]:
    """Single-pass expansion; remaps boundary indices as tokens shift."""
    if not config.abbreviations:
        return list(tokens), set(boundaries)
    out: list[Token] = []
    new_boundaries: set[int] = set()
    for i, tok in enumerate(tokens):
        if i in boundaries:
            new_boundaries.add(len(out))
        expansion = config.abbreviations.get(tok.surface)
        if expansion is None:
            out.append(tok)
        else:
            out.extend(Token(w, tok.negated) for w in expansion)
    return out, new_boundaries


def tag_negations(
    tokens: Sequence[Token],
    config: NormalizationConfig,
    boundaries: Iterable[int] = (),
) -> list[Token]:
    """Flag tokens inside a negation scope; trigger words are removed.

    A scope opened by a trigger covers following tokens until a scope
    terminator word, a punctuation boundary, or the end of the sentence.
    """
    boundary_set = set(boundaries)
    out: list[Token] = []
    negating = False
    for i, tok in enumerate(tokens):
        if i in boundary_set:
            negating = False
        if tok.surface in config.negation_triggers:
            negating = True
            continue
        if tok.surface in config.negation_scope_terminators:
            negating = False
            out.append(tok)
            continue
        if negating and not tok.negated:
            out.append(Token(tok.surface, True))
        else:
            out.append(tok)
    return out


def _one_edit_apart(a: str, b: str) -> bool:
    la, lb = len(a), len(b)
    if a == b or abs(la - lb) > 1:
        return False
    if la == lb:
        return sum(x != y for x, y in zip(a, b)) == 1
    if la > lb:
        a, b, la, lb = b, a, lb, la
    i = 0
    while i < la and a[i] == b[i]:
        i += 1
    return a[i:] == b[i + 1 :]


def fold_typo(
    word: str, vocabulary: Mapping[str, int], min_vocab_freq: int
) -> str:
    """Fold a rare word onto the unique frequent vocabulary word one edit away.

    Words that are themselves frequent are never folded, and folding only
    happens when exactly one candidate exists.
    """
    if vocabulary.get(word, 0) >= min_vocab_freq:
        return word
    candidate = None
    for other, freq in vocabulary.items():
        if freq >= min_vocab_freq and _one_edit_apart(word, other):
            if candidate is not None:
                return word
            candidate = other
    return candidate if candidate is not None else word


def build_vocabulary(sentences: Iterable[RawSentence]) -> dict[str, int]:
    """Corpus-wide token frequencies, used as the typo-folding vocabulary."""
    counts: dict[str, int] = {}
    for raw in sentences:
        for tok in tokenize(raw.text):
            counts[tok.surface] = counts.get(tok.surface, 0) + 1
    return counts


def normalize_sentence(
    raw: RawSentence,
    config: NormalizationConfig,
    vocabulary: Mapping[str, int] | None = None,
) -> NormalizedSentence:
    tokens, boundaries = _tokenize_with_boundaries(raw.text)
    tokens, boundaries = _expand_abbreviations(tokens, boundaries, config)
    tokens = tag_negations(tokens, config, boundaries)
    tokens = [t for t in tokens if t.surface not in config.stopwords]
    if config.typo_folding and vocabulary:
        tokens = [
            Token(fold_typo(t.surface, vocabulary, config.typo_min_vocab_freq), t.negated)
            for t in tokens
        ]
    if not tokens:
        raise EmptySentenceAfterNormalization(raw.text)
    return NormalizedSentence(
        tokens=tuple(tokens),
        section=raw.section,
        sources=(SourceRef(raw.report_id, raw.index_in_section),),
    )


def dedup_corpus(sentences: Iterable[NormalizedSentence]) -> list[NormalizedSentence]:
    """Merge sentences with identical token sequences within a section.

    Sources accumulate in input order; output keeps first-seen order.
    """
    merged: dict[tuple, NormalizedSentence] = {}
    for sent in sentences:
        key = (sent.section, sent.tokens)
        prior = merged.get(key)
        if prior is None:
            merged[key] = sent
        else:
            merged[key] = NormalizedSentence(
                tokens=prior.tokens,
                section=prior.section,
                sources=prior.sources + sent.sources,
            )
    return list(merged.values())


@dataclass(frozen=True)
class NormalizationStats:
    raw_sentences: int
    normalized_sentences: int
    dropped_empty: int
    unique_sentences: int


def normalize_corpus(
    corpus: Corpus, config: NormalizationConfig
) -> tuple[list[NormalizedSentence], NormalizationStats]:
    """Normalize and deduplicate every sentence of a corpus."""
    vocabulary = build_vocabulary(corpus.sentences) if config.typo_folding else None
    normalized: list[NormalizedSentence] = []
    dropped = 0
    for raw in corpus.sentences:
        try:
            normalized.append(normalize_sentence(raw, config, vocabulary))
        except EmptySentenceAfterNormalization:
            dropped += 1
            logger.info("dropped empty-after-normalization sentence: %r", raw.text)
    unique = dedup_corpus(normalized)
    stats = NormalizationStats(
        raw_sentences=len(corpus.sentences),
        normalized_sentences=len(normalized),
        dropped_empty=dropped,
        unique_sentences=len(unique),
    )
    return unique, stats
