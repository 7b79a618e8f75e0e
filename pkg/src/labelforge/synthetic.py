"""Synthetic corpora with planted paraphrase groups.

Every generated sentence carries a known group index, so cluster recovery
can be scored against ground truth. Group stems share a leading letter per
group and nothing across groups, which keeps cross-group word similarity at
zero while suffix and dropout perturbations stay within-group.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Sequence

from .ingest import Corpus, RawSentence, SectionKind, parse_report
from .normalize import (
    DEFAULT_NEGATION_TRIGGERS,
    DEFAULT_SCOPE_TERMINATORS,
    NormalizedSentence,
    SourceRef,
    Token,
    default_stopwords,
)
from .tuning import LabeledPair

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
# Inflection-style suffixes; stems are at least 7 chars, so any two variants
# of the same stem keep a prefix ratio of 7/9 or better.
_SUFFIXES = ("s", "es", "ed")
_ROOTS = ("plan", "form", "grad", "stat")
# Safe filler for raw-text renderings: stopwords that are neither negation
# triggers nor scope terminators, so normalization strips them cleanly.
_FILLER = ("the", "a", "of", "and", "with", "in", "on", "for", "to")
_DEFAULT_SECTION = SectionKind("lungs")


def make_sentence(
    words: Sequence[str],
    negated: Sequence[bool] | None = None,
    section: SectionKind = _DEFAULT_SECTION,
    report_id: str = "synth",
    index: int = 0,
    copies: int = 1,
) -> NormalizedSentence:
    """Build a normalized sentence directly from word surfaces."""
    flags = tuple(negated) if negated is not None else (False,) * len(words)
    tokens = tuple(Token(w, f) for w, f in zip(words, flags))
    sources = tuple(
        SourceRef(report_id if copies == 1 else f"{report_id}.{i}", index)
        for i in range(copies)
    )
    return NormalizedSentence(tokens=tokens, section=section, sources=sources)


def _reserved_words() -> frozenset[str]:
    return default_stopwords() | DEFAULT_NEGATION_TRIGGERS | DEFAULT_SCOPE_TERMINATORS


def _fresh_stem(rng: random.Random, used: set[str], lead: str) -> str:
    reserved = _reserved_words()
    while True:
        n = rng.randint(7, 10)
        stem = lead + "".join(rng.choice(_LETTERS) for _ in range(n - len(lead)))
        if stem not in used and stem not in reserved:
            used.add(stem)
            return stem


def shared_prefix_pool(rng: random.Random, n_stems: int = 12) -> list[str]:
    """Random stems grown over a few common roots, so partial prefix
    overlaps between distinct words are frequent."""
    reserved = _reserved_words()
    pool: set[str] = set()
    while len(pool) < n_stems:
        word = rng.choice(_ROOTS) + "".join(
            rng.choice(_LETTERS) for _ in range(rng.randint(1, 4))
        )
        if word not in reserved:
            pool.add(word)
    return sorted(pool)


def random_word_lists(
    rng: random.Random,
    pool: Sequence[str],
    min_words: int = 1,
    max_words: int = 8,
    negation_rate: float = 0.15,
) -> tuple[list[str], list[bool]]:
    n = rng.randint(min_words, max_words)
    words = [rng.choice(pool) for _ in range(n)]
    negs = [rng.random() < negation_rate for _ in range(n)]
    return words, negs


@dataclass(frozen=True)
class PlantedCorpus:
    """Planted sentences with ground-truth group indices.

    ``raw_texts`` render each sentence as free text with stopword filler
    inserted; normalizing a raw text recovers the matching sentence tokens.
    """

    sentences: tuple[NormalizedSentence, ...]
    raw_texts: tuple[str, ...]
    truth: tuple[int, ...]
    n_groups: int

    def truth_by_tokens(self) -> dict[tuple[Token, ...], int]:
        return {s.tokens: g for s, g in zip(self.sentences, self.truth)}

    def raw_sentences(self) -> list[RawSentence]:
        return [
            RawSentence(text, f"plant{i:04d}", sent.section, 0)
            for i, (text, sent) in enumerate(zip(self.raw_texts, self.sentences))
        ]


def _perturb(rng: random.Random, stems: Sequence[str]) -> list[str]:
    words = []
    dropped = False
    for i, stem in enumerate(stems):
        # The leading word anchors lexicographic order; never drop it. Each
        # other word faces a 10% dropout roll, capped at one drop per
        # variant so paraphrases stay recognizable.
        if i > 0 and not dropped and rng.random() < 0.10:
            dropped = True
            continue
        if rng.random() < 0.25:
            words.append(stem + rng.choice(_SUFFIXES))
        else:
            words.append(stem)
    return words


def _render_raw(rng: random.Random, words: Sequence[str]) -> str:
    out: list[str] = []
    for word in words:
        if rng.random() < 0.25:
            out.append(rng.choice(_FILLER))
        out.append(word)
    return " ".join(out) + "."


def planted_corpus(
    seed: int = 0,
    n_groups: int = 20,
    variants_per_group: int = 10,
    section: SectionKind = _DEFAULT_SECTION,
) -> PlantedCorpus:
    """A corpus of paraphrase groups: one base phrasing per group plus
    suffix/dropout variants, all mutually distinct."""
    if not 2 <= n_groups <= len(_LETTERS):
        raise ValueError(f"n_groups must be in 2..{len(_LETTERS)}")
    if variants_per_group < 1:
        raise ValueError("variants_per_group must be positive")
    rng = random.Random(seed)
    used: set[str] = set()
    group_stems = [
        [_fresh_stem(rng, used, _LETTERS[g]) for _ in range(rng.randint(7, 9))]
        for g in range(n_groups)
    ]

    sentences: list[NormalizedSentence] = []
    raw_texts: list[str] = []
    truth: list[int] = []
    seen: set[tuple[str, ...]] = set()
    for g, stems in enumerate(group_stems):
        for v in range(variants_per_group):
            for _ in range(200):
                words = list(stems) if v == 0 else _perturb(rng, stems)
                if len(words) >= 2 and tuple(words) not in seen:
                    break
            else:
                raise RuntimeError("could not produce a unique variant")
            seen.add(tuple(words))
            sentences.append(
                make_sentence(words, section=section, report_id=f"g{g:02d}v{v:02d}")
            )
            raw_texts.append(_render_raw(rng, words))
            truth.append(g)
    return PlantedCorpus(tuple(sentences), tuple(raw_texts), tuple(truth), n_groups)


def planted_pair_indices(
    planted: PlantedCorpus, n_pairs: int = 200, seed: int = 0
) -> list[tuple[int, int, bool]]:
    """Balanced pair sample: same-group positives, cross-group negatives.

    Returns (index_a, index_b, same_meaning) triples into the corpus.
    """
    if planted.n_groups < 2:
        raise ValueError("need at least two groups for negative pairs")
    by_group: dict[int, list[int]] = {}
    for i, g in enumerate(planted.truth):
        by_group.setdefault(g, []).append(i)
    if min(len(v) for v in by_group.values()) < 2:
        raise ValueError("need at least two variants per group for positive pairs")
    rng = random.Random(seed)
    groups = sorted(by_group)
    triples: list[tuple[int, int, bool]] = []
    for k in range(n_pairs):
        if k % 2 == 0:
            a, b = rng.sample(by_group[rng.choice(groups)], 2)
            triples.append((a, b, True))
        else:
            ga, gb = rng.sample(groups, 2)
            triples.append(
                (rng.choice(by_group[ga]), rng.choice(by_group[gb]), False)
            )
    return triples


def planted_pairs(
    planted: PlantedCorpus, n_pairs: int = 200, seed: int = 0
) -> list[LabeledPair]:
    return [
        LabeledPair(planted.sentences[a], planted.sentences[b], same)
        for a, b, same in planted_pair_indices(planted, n_pairs, seed)
    ]


def random_sentences(
    seed: int,
    max_sentences: int = 200,
    section: SectionKind = _DEFAULT_SECTION,
    negation_rate: float = 0.10,
) -> list[NormalizedSentence]:
    """Unique random sentences over a shared-prefix vocabulary, with varied
    source multiplicity. Suitable for structural clustering checks."""
    rng = random.Random(seed)
    pool = shared_prefix_pool(rng, n_stems=30)
    target = rng.randint(2, max(2, max_sentences))
    out: dict[tuple[Token, ...], NormalizedSentence] = {}
    attempts = 0
    while len(out) < target and attempts < target * 20:
        attempts += 1
        words, negs = random_word_lists(
            rng, pool, min_words=1, max_words=6, negation_rate=negation_rate
        )
        tokens = tuple(Token(w, f) for w, f in zip(words, negs))
        if tokens in out:
            continue
        out[tokens] = make_sentence(
            words, negs, section=section,
            report_id=f"r{len(out):04d}", copies=rng.randint(1, 3),
        )
    return list(out.values())


def synthetic_reports(
    seed: int,
    n_reports: int = 40,
    n_groups: int = 8,
    variants_per_group: int = 6,
) -> Corpus:
    """Report documents whose section texts are drawn from a planted pool."""
    rng = random.Random(seed)
    planted = planted_corpus(
        seed=rng.randrange(2**31), n_groups=n_groups,
        variants_per_group=variants_per_group,
    )
    texts = list(planted.raw_texts)
    section_names = ("lungs", "heart_mediastinum", "tubes_lines")
    documents = []
    for i in range(n_reports):
        rid = f"r{i:03d}"
        record = {
            "report_id": rid,
            "image_ids": [f"{rid}-im{k}" for k in range(rng.randint(1, 2))],
            "sections": {
                name: " ".join(rng.choice(texts) for _ in range(rng.randint(1, 3)))
                for name in rng.sample(section_names, rng.randint(1, len(section_names)))
            },
        }
        documents.append(parse_report(record))
    return Corpus.from_documents(documents)


def dump_reports_jsonl(corpus: Corpus, path) -> None:
    """Write report documents in the newline-delimited input format."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            record = {
                "report_id": doc.report_id,
                "image_ids": list(doc.image_ids),
                "sections": {kind.canonical: text for kind, text in doc.sections},
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
