"""Greedy complete-linkage clustering of unique sentences per section.

Sentences are sorted lexicographically by rendered surface (bytewise); a
sentence joins the open cluster only if it matches every current member at
the clustering threshold, otherwise it closes that cluster and opens a new
one. Closed clusters never reopen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ._backend import kernel
from .ingest import SectionKind
from .normalize import NormalizedSentence
from .similarity import SimilarityParams


@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    section: SectionKind
    members: tuple[NormalizedSentence, ...]
    representative: str

    def __post_init__(self):
        if not self.members:
            raise ValueError("cluster has no members")


@dataclass(frozen=True)
class ClusterCounts:
    input_sentences: int
    unique_sentences: int
    n_clusters: int


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...]
    # None when the set was loaded from a file that does not carry params.
    params_used: SimilarityParams | None
    counts: ClusterCounts


def _pick_representative(members: Sequence[NormalizedSentence]) -> str:
    best = min(members, key=lambda s: (-s.frequency, s.sort_key))
    return best.surface_text


def select_representative(cluster: Cluster) -> str:
    """Most frequent member; ties go to the lexicographically smallest."""
    return _pick_representative(cluster.members)


def cluster_section(
    sentences: Sequence[NormalizedSentence],
    params: SimilarityParams,
    id_prefix: str | None = None,
) -> list[Cluster]:
    """Cluster deduplicated sentences of one section.

    Output order follows the lexicographic scan, so it is invariant under
    permutation of the input.
    """
    if not sentences:
        return []
    section = sentences[0].section
    if id_prefix is None:
        id_prefix = section.canonical + "#"
    gamma = params.cluster_gamma
    tau = params.tau
    delta = params.delta

    ordered = sorted(sentences, key=lambda s: s.sort_key)
    groups: list[list[NormalizedSentence]] = []
    current: list[NormalizedSentence] = [ordered[0]]
    for sent in ordered[1:]:
        words, negs = sent.words, sent.negs
        if all(
            kernel.pair_matches(words, negs, m.words, m.negs, tau, delta, gamma)
            for m in current
        ):
            current.append(sent)
        else:
            groups.append(current)
            current = [sent]
    groups.append(current)

    return [
        Cluster(
            cluster_id=f"{id_prefix}{i:04d}",
            section=section,
            members=tuple(members),
            representative=_pick_representative(members),
        )
        for i, members in enumerate(groups)
    ]


def cluster_corpus(
    sentences: Iterable[NormalizedSentence], params: SimilarityParams
) -> ClusterSet:
    """Group sentences by section, cluster each section, merge the results."""
    by_section: dict[SectionKind, list[NormalizedSentence]] = {}
    for sent in sentences:
        by_section.setdefault(sent.section, []).append(sent)

    clusters: list[Cluster] = []
    for section in sorted(by_section, key=lambda s: s.sort_key):
        clusters.extend(cluster_section(by_section[section], params))

    n_unique = sum(len(group) for group in by_section.values())
    n_input = sum(s.frequency for group in by_section.values() for s in group)
    return ClusterSet(
        clusters=tuple(clusters),
        params_used=params,
        counts=ClusterCounts(
            input_sentences=n_input,
            unique_sentences=n_unique,
            n_clusters=len(clusters),
        ),
    )


def verify_complete_linkage(
    clusters: Iterable[Cluster], params: SimilarityParams
) -> bool:
    """Re-check every member pair of every cluster at the clustering
    threshold; the greedy scan must only ever emit clusters that pass."""
    gamma = params.cluster_gamma
    for cluster in clusters:
        members = cluster.members
        for i in range(len(members)):
            a = members[i]
            for b in members[i + 1 :]:
                if not kernel.pair_matches(
                    a.words, a.negs, b.words, b.negs, params.tau, params.delta, gamma
                ):
                    return False
    return True
