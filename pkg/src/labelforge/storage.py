"""On-disk formats: snapshots, cluster exports, the decision log, CSV files.

Snapshot files start with a magic header line so a mismatched file fails
fast. The decision log is newline-delimited JSON, append-only, fsynced
before a mutation is acknowledged.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass
from typing import IO, Mapping, Sequence

from .clustering import Cluster, ClusterCounts, ClusterSet
from .errors import CorruptLog, SnapshotFormatError
from .ingest import Corpus, ReportDocument, SectionKind
from .labelset import (
    Decision,
    DeleteDecision,
    LabelDefinition,
    LabelMatrix,
    MergeDecision,
)
from .normalize import NormalizationStats, NormalizedSentence, SourceRef, Token

logger = logging.getLogger(__name__)

CORPUS_MAGIC = "labelforge-corpus 1"
SENTENCES_MAGIC = "labelforge-sentences 1"


def write_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CORPUS_MAGIC + "\n")
        for doc in corpus.documents:
            record = {
                "report_id": doc.report_id,
                "image_ids": list(doc.image_ids),
                "sections": [[kind.canonical, text] for kind, text in doc.sections],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_corpus(path) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CORPUS_MAGIC:
            raise SnapshotFormatError(f"bad corpus header: {header!r}")
        documents: list[ReportDocument] = []
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                documents.append(
                    ReportDocument(
                        report_id=record["report_id"],
                        image_ids=tuple(record["image_ids"]),
                        sections=tuple(
                            (SectionKind.from_canonical(name), text)
                            for name, text in record["sections"]
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise SnapshotFormatError(f"corpus line {line_no}: {e}") from e
    return Corpus.from_documents(documents)


def write_sentences(
    sentences: Sequence[NormalizedSentence], stats: NormalizationStats, path
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SENTENCES_MAGIC + "\n")
        fh.write(json.dumps(asdict(stats), sort_keys=True) + "\n")
        for sent in sentences:
            record = {
                "tokens": [t.render() for t in sent.tokens],
                "section": sent.section.canonical,
                "sources": [
                    [src.report_id, src.index_in_section] for src in sent.sources
                ],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_sentences(path) -> tuple[list[NormalizedSentence], NormalizationStats]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != SENTENCES_MAGIC:
            raise SnapshotFormatError(f"bad sentences header: {header!r}")
        try:
            stats = NormalizationStats(**json.loads(fh.readline()))
        except (json.JSONDecodeError, TypeError) as e:
            raise SnapshotFormatError(f"bad sentences meta line: {e}") from e
        sentences: list[NormalizedSentence] = []
        for line_no, line in enumerate(fh, start=3):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                sentences.append(
                    NormalizedSentence(
                        tokens=tuple(Token.parse(t) for t in record["tokens"]),
                        section=SectionKind.from_canonical(record["section"]),
                        sources=tuple(
                            SourceRef(rid, int(idx)) for rid, idx in record["sources"]
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise SnapshotFormatError(f"sentences line {line_no}: {e}") from e
    return sentences, stats


def write_clusters(
    cluster_set: ClusterSet, images_by_report: Mapping[str, tuple[str, ...]], path
) -> None:
    """Cluster export. Sources carry their report's image ids so the file
    is self-contained for downstream review and export."""
    payload = []
    for cluster in cluster_set.clusters:
        members = []
        for member in cluster.members:
            members.append(
                {
                    "surface": member.surface_text,
                    "frequency": member.frequency,
                    "sources": [
                        {
                            "report_id": src.report_id,
                            "index": src.index_in_section,
                            "image_ids": list(
                                images_by_report.get(src.report_id, ())
                            ),
                        }
                        for src in member.sources
                    ],
                }
            )
        payload.append(
            {
                "cluster_id": cluster.cluster_id,
                "section": cluster.section.canonical,
                "representative": cluster.representative,
                "members": members,
            }
        )
    write_json(payload, path)


def read_clusters(path) -> tuple[ClusterSet, dict[str, tuple[str, ...]]]:
    """Load a cluster export; returns the clusters and the report-to-images
    mapping reassembled from member sources."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as e:
            raise SnapshotFormatError(f"clusters file is not valid JSON: {e}") from e
    if not isinstance(payload, list):
        raise SnapshotFormatError("clusters file root must be an array")

    clusters: list[Cluster] = []
    images: dict[str, tuple[str, ...]] = {}
    try:
        for item in payload:
            section = SectionKind.from_canonical(item["section"])
            members: list[NormalizedSentence] = []
            for m in item["members"]:
                sources = []
                for src in m["sources"]:
                    rid = str(src["report_id"])
                    sources.append(SourceRef(rid, int(src["index"])))
                    imgs = tuple(str(x) for x in src.get("image_ids", ()))
                    if rid in images and images[rid] != imgs:
                        raise SnapshotFormatError(
                            f"report {rid!r} listed with differing image_ids"
                        )
                    images.setdefault(rid, imgs)
                if int(m["frequency"]) != len(sources):
                    raise SnapshotFormatError(
                        f"member {m['surface']!r}: frequency does not match sources"
                    )
                members.append(
                    NormalizedSentence(
                        tokens=tuple(Token.parse(t) for t in m["surface"].split(" ")),
                        section=section,
                        sources=tuple(sources),
                    )
                )
            clusters.append(
                Cluster(
                    cluster_id=str(item["cluster_id"]),
                    section=section,
                    members=tuple(members),
                    representative=str(item["representative"]),
                )
            )
    except SnapshotFormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise SnapshotFormatError(f"bad clusters file: {e}") from e

    counts = ClusterCounts(
        input_sentences=sum(m.frequency for c in clusters for m in c.members),
        unique_sentences=sum(len(c.members) for c in clusters),
        n_clusters=len(clusters),
    )
    return ClusterSet(tuple(clusters), None, counts), images


def decision_to_record(decision: Decision) -> dict:
    if isinstance(decision, MergeDecision):
        return {
            "type": "merge",
            "group_id": decision.group_id,
            "member_cluster_ids": list(decision.member_cluster_ids),
            "label_text": decision.label_text,
            "author": decision.author,
            "ts": decision.timestamp,
        }
    if isinstance(decision, DeleteDecision):
        return {
            "type": "delete",
            "group_id": decision.group_id,
            "author": decision.author,
            "ts": decision.timestamp,
        }
    raise TypeError(f"unknown decision type: {type(decision).__name__}")


def decision_from_record(record: Mapping) -> Decision:
    kind = record.get("type")
    if kind == "merge":
        return MergeDecision(
            group_id=str(record["group_id"]),
            member_cluster_ids=tuple(str(c) for c in record["member_cluster_ids"]),
            label_text=str(record["label_text"]),
            author=str(record.get("author", "")),
            timestamp=float(record.get("ts", 0.0)),
        )
    if kind == "delete":
        return DeleteDecision(
            group_id=str(record["group_id"]),
            author=str(record.get("author", "")),
            timestamp=float(record.get("ts", 0.0)),
        )
    raise ValueError(f"unknown decision type: {kind!r}")


def append_decision(fh: IO[str], decision: Decision) -> None:
    """Write one record and fsync before returning; a mutation may be
    acknowledged only after this returns."""
    fh.write(json.dumps(decision_to_record(decision), sort_keys=True) + "\n")
    fh.flush()
    os.fsync(fh.fileno())


@dataclass(frozen=True)
class DecisionLog:
    decisions: tuple[Decision, ...]
    valid_offset: int
    truncated_tail: bool


def read_decision_log(path) -> DecisionLog:
    """Replay the log from disk.

    A final line with no newline is a torn write from a crash; it was never
    acknowledged (the newline goes out before the fsync), so it is dropped
    with a warning. A terminated line that does not parse is real
    corruption and refuses the whole log.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        return DecisionLog((), 0, False)

    decisions: list[Decision] = []
    offset = 0
    truncated = False
    while offset < len(data):
        nl = data.find(b"\n", offset)
        if nl == -1:
            logger.warning(
                "dropping unterminated trailing record at offset %d", offset
            )
            truncated = True
            break
        line = data[offset:nl]
        if line.strip():
            try:
                decisions.append(decision_from_record(json.loads(line.decode("utf-8"))))
            except (ValueError, KeyError, TypeError) as e:
                raise CorruptLog(
                    f"bad record at offset {offset}: {e}", last_valid_offset=offset
                ) from e
        offset = nl + 1
    return DecisionLog(tuple(decisions), offset, truncated)


def truncate_log(path, offset: int) -> None:
    """Discard a torn trailing record before appending resumes."""
    with open(path, "r+b") as fh:
        fh.truncate(offset)


def write_labels_csv(labels: Sequence[LabelDefinition], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label_id", "section", "label_text", "image_support"])
        for label in labels:
            writer.writerow(
                [label.label_id, label.section.canonical, label.label_text,
                 label.image_support]
            )


def write_matrix_csv(matrix: LabelMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "label_id", "value"])
        for image_id, label_id in matrix.triplets:
            writer.writerow([image_id, label_id, 1])


def write_matrix_dense_csv(matrix: LabelMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", *matrix.label_ids])
        for image_id, row in zip(matrix.image_ids, matrix.to_dense()):
            writer.writerow([image_id, *row])


def write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
