"""Apply reviewer merge decisions to clusters and derive the label set.

The decision log is append-only: a merge creates a named group, a later
merge naming the same cluster steals it, and a delete retires a group.
Clusters left unreviewed fall through as singleton groups, so the label
set always partitions the cluster set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .clustering import Cluster, ClusterSet
from .errors import ConflictingDecision, UnknownClusterId, UnknownGroupId
from .ingest import SectionKind


@dataclass(frozen=True)
class MergeDecision:
    group_id: str
    member_cluster_ids: tuple[str, ...]
    label_text: str
    author: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if not self.group_id.strip():
            raise ValueError("merge decision needs a group_id")
        if not self.member_cluster_ids:
            raise ValueError("merge decision needs at least one cluster")
        if not self.label_text.strip():
            raise ValueError("merge decision needs a non-empty label")


@dataclass(frozen=True)
class DeleteDecision:
    group_id: str
    author: str = ""
    timestamp: float = 0.0


Decision = Union[MergeDecision, DeleteDecision]


@dataclass(frozen=True)
class SemanticGroup:
    group_id: str
    clusters: tuple[Cluster, ...]
    label_text: str
    report_ids: tuple[str, ...]
    image_support: int
    report_support: int

    @property
    def cluster_ids(self) -> tuple[str, ...]:
        return tuple(c.cluster_id for c in self.clusters)


@dataclass(frozen=True)
class LabelDefinition:
    label_id: str
    section: SectionKind
    label_text: str
    image_support: int
    group_id: str
    report_ids: tuple[str, ...]


@dataclass(frozen=True)
class FilterResult:
    labels: tuple[LabelDefinition, ...]
    dropped: tuple[SemanticGroup, ...]
    mixed_section_group_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class LabelMatrix:
    """Binary image-by-label presence, stored as sorted sparse pairs."""

    image_ids: tuple[str, ...]
    label_ids: tuple[str, ...]
    triplets: tuple[tuple[str, str], ...]

    def to_dense(self) -> list[list[int]]:
        cells = set(self.triplets)
        return [
            [1 if (img, lab) in cells else 0 for lab in self.label_ids]
            for img in self.image_ids
        ]

    def column_supports(self) -> dict[str, int]:
        counts = {lab: 0 for lab in self.label_ids}
        for _, lab in self.triplets:
            counts[lab] += 1
        return counts

    def zero_rows(self) -> tuple[str, ...]:
        labeled = {img for img, _ in self.triplets}
        return tuple(img for img in self.image_ids if img not in labeled)


def _build_group(
    group_id: str,
    clusters: tuple[Cluster, ...],
    label_text: str,
    images_by_report: Mapping[str, tuple[str, ...]],
) -> SemanticGroup:
    report_ids = sorted(
        {src.report_id for c in clusters for m in c.members for src in m.sources}
    )
    images: set[str] = set()
    for rid in report_ids:
        images.update(images_by_report.get(rid, ()))
    return SemanticGroup(
        group_id=group_id,
        clusters=clusters,
        label_text=label_text,
        report_ids=tuple(report_ids),
        image_support=len(images),
        report_support=len(report_ids),
    )


@dataclass
class _GroupState:
    label_text: str
    member_ids: list[str] = field(default_factory=list)


def apply_merges(
    cluster_set: ClusterSet,
    decisions: Sequence[Decision],
    images_by_report: Mapping[str, tuple[str, ...]],
) -> list[SemanticGroup]:
    """Replay the decision log over a cluster set.

    Later merges naming an already-assigned cluster supersede the earlier
    assignment; a group emptied that way disappears. Group ids are never
    reused, even after a delete.
    """
    by_id = {c.cluster_id: c for c in cluster_set.clusters}
    live: dict[str, _GroupState] = {}
    seen_group_ids: set[str] = set()
    assignment: dict[str, str] = {}

    for decision in decisions:
        if isinstance(decision, MergeDecision):
            if decision.group_id in seen_group_ids:
                raise ConflictingDecision(
                    f"group id reused: {decision.group_id!r}"
                )
            seen_group_ids.add(decision.group_id)
            members: list[str] = []
            for cid in dict.fromkeys(decision.member_cluster_ids):
                if cid not in by_id:
                    raise UnknownClusterId(cid)
                prior = assignment.get(cid)
                if prior is not None:
                    live[prior].member_ids.remove(cid)
                    if not live[prior].member_ids:
                        del live[prior]
                assignment[cid] = decision.group_id
                members.append(cid)
            live[decision.group_id] = _GroupState(decision.label_text, members)
        elif isinstance(decision, DeleteDecision):
            state = live.pop(decision.group_id, None)
            if state is None:
                raise UnknownGroupId(decision.group_id)
            for cid in state.member_ids:
                del assignment[cid]
        else:
            raise TypeError(f"unknown decision type: {type(decision).__name__}")

    groups: list[SemanticGroup] = []
    for gid, state in live.items():
        clusters = tuple(by_id[cid] for cid in state.member_ids)
        groups.append(_build_group(gid, clusters, state.label_text, images_by_report))
    for cluster in cluster_set.clusters:
        if cluster.cluster_id not in assignment:
            groups.append(
                _build_group(
                    f"solo:{cluster.cluster_id}",
                    (cluster,),
                    cluster.representative,
                    images_by_report,
                )
            )
    return groups


def filter_min_support(
    groups: Sequence[SemanticGroup], min_support: int = 50
) -> FilterResult:
    """Keep groups whose image support reaches the threshold.

    A group spanning clusters from several sections is labeled with its
    first cluster's section and flagged for the audit report.
    """
    kept: list[SemanticGroup] = []
    dropped: list[SemanticGroup] = []
    for group in groups:
        (kept if group.image_support >= min_support else dropped).append(group)

    kept.sort(
        key=lambda g: (g.clusters[0].section.sort_key, g.label_text, g.group_id)
    )
    mixed = [
        g.group_id for g in kept if len({c.section for c in g.clusters}) > 1
    ]
    labels = tuple(
        LabelDefinition(
            label_id=f"L{i:04d}",
            section=g.clusters[0].section,
            label_text=g.label_text,
            image_support=g.image_support,
            group_id=g.group_id,
            report_ids=g.report_ids,
        )
        for i, g in enumerate(kept)
    )
    return FilterResult(
        labels=labels, dropped=tuple(dropped), mixed_section_group_ids=tuple(mixed)
    )


def export_label_matrix(
    images_by_report: Mapping[str, tuple[str, ...]],
    labels: Sequence[LabelDefinition],
) -> LabelMatrix:
    """Binary matrix: cell (image, label) is 1 iff some report backing the
    label contains that image. Rows cover every known image, so images no
    label reaches show up as zero rows."""
    image_ids = tuple(
        sorted({img for imgs in images_by_report.values() for img in imgs})
    )
    triplets: list[tuple[str, str]] = []
    for label in labels:
        images: set[str] = set()
        for rid in label.report_ids:
            images.update(images_by_report.get(rid, ()))
        triplets.extend((img, label.label_id) for img in images)
    triplets.sort()
    return LabelMatrix(
        image_ids=image_ids,
        label_ids=tuple(l.label_id for l in labels),
        triplets=tuple(triplets),
    )
