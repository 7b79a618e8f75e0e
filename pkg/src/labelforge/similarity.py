"""Sentence similarity: prefix matching, unordered Dice overlap, and the
word-level longest-common-subfix alignment with gap penalties.

The combined score is the max of the unordered and ordered views; two
sentences match when that score reaches the gamma threshold. Hot loops are
delegated to the kernel backend (compiled when available).
"""

from __future__ import annotations

from dataclasses import dataclass

from ._backend import kernel
from .normalize import NormalizedSentence, Token


@dataclass(frozen=True)
class SimilarityParams:
    """Matching knobs: prefix threshold tau, gap penalty delta, match
    threshold gamma, and the clustering threshold (defaults to gamma)."""

    tau: float = 0.75
    delta: float = 0.1
    gamma: float = 0.7
    cluster_gamma: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.cluster_gamma is None:
            object.__setattr__(self, "cluster_gamma", self.gamma)
        elif not 0.0 < self.cluster_gamma <= 1.0:
            raise ValueError(f"cluster_gamma must be in (0, 1], got {self.cluster_gamma}")


@dataclass(frozen=True)
class PrefixMatch:
    prefix_len: int
    rho: float


@dataclass(frozen=True)
class AlignmentResult:
    score: float
    matched_words: int
    ordered_sim: float


@dataclass(frozen=True)
class SimilarityScore:
    unordered: float
    ordered: float
    combined: float


def common_prefix_len(a: str, b: str) -> int:
    """Length of the longest shared leading character run."""
    return kernel.common_prefix_len(a, b)


def prefix_match(a: Token, b: Token, tau: float) -> PrefixMatch:
    """Score a word pair by prefix ratio, gated by tau and polarity.

    The ratio comparison uses >= so that tau = 1.0 degenerates to exact
    word matching instead of matching nothing.
    """
    plen = kernel.common_prefix_len(a.surface, b.surface)
    return PrefixMatch(
        prefix_len=plen,
        rho=kernel.rho(a.surface, b.surface, a.negated, b.negated, tau),
    )


def dice_unordered(S: NormalizedSentence, T: NormalizedSentence) -> float:
    """Eq-style unordered overlap: 2 * |common words| / (K + N).

    Common words are counted as a multiset intersection over exact
    (surface, polarity) pairs.
    """
    return kernel.dice(S.words, S.negs, T.words, T.negs)


def lcf_align(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> AlignmentResult:
    """Run the subfix alignment DP of S against T.

    Returns the raw table corner score (possibly negative), the count of
    S-words with a nonzero prefix match on the traced path, and the score
    clamped at zero and normalized by |S|.
    """
    score, matched = kernel.lcf_align(
        S.words, S.negs, T.words, T.negs, params.tau, params.delta
    )
    return AlignmentResult(
        score=score,
        matched_words=matched,
        ordered_sim=max(0.0, score) / len(S.words),
    )


def lcf_table(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> list[list[float]]:
    """Full DP table, row-major, for inspection and debugging."""
    return kernel.lcf_table(S.words, S.negs, T.words, T.negs, params.tau, params.delta)


def ordered_score(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> float:
    """Symmetrized ordered similarity: best of both alignment directions."""
    st = kernel.lcf_score(S.words, S.negs, T.words, T.negs, params.tau, params.delta)
    ts = kernel.lcf_score(T.words, T.negs, S.words, S.negs, params.tau, params.delta)
    return max(max(0.0, st) / len(S.words), max(0.0, ts) / len(T.words))


def similarity(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> SimilarityScore:
    unordered = dice_unordered(S, T)
    ordered = ordered_score(S, T, params)
    return SimilarityScore(
        unordered=unordered,
        ordered=ordered,
        combined=max(unordered, ordered),
    )


def combined_similarity(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> float:
    """Combined score without building the full breakdown (hot path)."""
    return kernel.pair_combined(
        S.words, S.negs, T.words, T.negs, params.tau, params.delta
    )


def is_match(
    S: NormalizedSentence, T: NormalizedSentence, params: SimilarityParams
) -> bool:
    return kernel.pair_matches(
        S.words, S.negs, T.words, T.negs, params.tau, params.delta, params.gamma
    )
