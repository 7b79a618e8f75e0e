"""HTTP review service over a cluster export and an append-only decision log.

Every mutation is appended to the log and fsynced before the client sees an
acknowledgment, so a crash right after a 2xx response never loses the
decision. Startup replays the log; reads serve an immutable snapshot and
never block behind writers.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import uvicorn
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import storage
from ._backend import BACKEND
from .clustering import Cluster, ClusterSet
from .errors import (
    BindError,
    ConflictingDecision,
    LabelSetError,
    StaleVersion,
    UnknownClusterId,
    UnknownGroupId,
)
from .labelset import (
    DeleteDecision,
    MergeDecision,
    SemanticGroup,
    apply_merges,
    export_label_matrix,
    filter_min_support,
)

logger = logging.getLogger(__name__)

_SOLO_PREFIX = "solo:"


@dataclass(frozen=True)
class SessionState:
    """Immutable view of the replayed decision log."""

    version: int
    all_groups: tuple[SemanticGroup, ...]
    named_groups: tuple[SemanticGroup, ...]
    assignment: Mapping[str, str]


class ReviewSession:
    """Single-writer review state: clusters are read-only, decisions append.

    state_version counts accepted mutations; replaying the same log always
    reproduces the same version and group assignments.
    """

    def __init__(
        self,
        clusters_path,
        decisions_path,
        min_support: int = 50,
        export_dir=None,
        session_id: str | None = None,
    ):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.clusters_path = Path(clusters_path)
        self.decisions_path = Path(decisions_path)
        self.min_support = min_support
        self.export_dir = (
            Path(export_dir) if export_dir is not None
            else self.decisions_path.parent / "export"
        )

        cluster_set, images = storage.read_clusters(self.clusters_path)
        self.cluster_set: ClusterSet = cluster_set
        self.images_by_report = images
        self._clusters_by_id = {c.cluster_id: c for c in cluster_set.clusters}

        log = storage.read_decision_log(self.decisions_path)
        if log.truncated_tail:
            storage.truncate_log(self.decisions_path, log.valid_offset)
        self._decisions = list(log.decisions)
        self._next_id = 1 + max(
            (
                int(d.group_id[1:])
                for d in self._decisions
                if isinstance(d, MergeDecision)
                and d.group_id[:1] == "g" and d.group_id[1:].isdigit()
            ),
            default=0,
        )
        self._lock = threading.Lock()
        self._fh = open(self.decisions_path, "a", encoding="utf-8")
        self._snapshot = self._build_state(self._decisions)

    def close(self) -> None:
        self._fh.close()

    # -- state ---------------------------------------------------------

    def _build_state(self, decisions: Sequence) -> SessionState:
        groups = tuple(apply_merges(self.cluster_set, decisions, self.images_by_report))
        named = tuple(g for g in groups if not g.group_id.startswith(_SOLO_PREFIX))
        assignment = {cid: g.group_id for g in named for cid in g.cluster_ids}
        return SessionState(
            version=len(decisions),
            all_groups=groups,
            named_groups=named,
            assignment=assignment,
        )

    @property
    def state(self) -> SessionState:
        return self._snapshot

    @property
    def state_version(self) -> int:
        return self._snapshot.version

    def cluster(self, cluster_id: str) -> Cluster | None:
        return self._clusters_by_id.get(cluster_id)

    # -- mutations -----------------------------------------------------

    def _check_version(self, expected: Optional[int]) -> None:
        if expected is not None and expected != len(self._decisions):
            raise StaleVersion(expected, len(self._decisions))

    def create_group(
        self,
        label_text: str,
        member_cluster_ids: Sequence[str],
        author: str = "",
        expected_state_version: Optional[int] = None,
    ) -> SemanticGroup:
        with self._lock:
            self._check_version(expected_state_version)
            group_id = f"g{self._next_id:04d}"
            decision = MergeDecision(
                group_id=group_id,
                member_cluster_ids=tuple(member_cluster_ids),
                label_text=label_text,
                author=author,
                timestamp=time.time(),
            )
            trial = self._decisions + [decision]
            state = self._build_state(trial)
            storage.append_decision(self._fh, decision)
            self._decisions = trial
            self._next_id += 1
            self._snapshot = state
        return next(g for g in state.named_groups if g.group_id == group_id)

    def delete_group(
        self,
        group_id: str,
        author: str = "",
        expected_state_version: Optional[int] = None,
    ) -> None:
        with self._lock:
            self._check_version(expected_state_version)
            decision = DeleteDecision(group_id, author=author, timestamp=time.time())
            trial = self._decisions + [decision]
            state = self._build_state(trial)
            storage.append_decision(self._fh, decision)
            self._decisions = trial
            self._snapshot = state

    def export(self, min_support: Optional[int] = None, dense: bool = False) -> dict:
        with self._lock:
            state = self._snapshot
            threshold = self.min_support if min_support is None else min_support
            result = filter_min_support(state.all_groups, threshold)
            matrix = export_label_matrix(self.images_by_report, result.labels)
            out = self.export_dir
            out.mkdir(parents=True, exist_ok=True)
            storage.write_labels_csv(result.labels, out / "labels.csv")
            storage.write_matrix_csv(matrix, out / "matrix.csv")
            files = ["labels.csv", "matrix.csv"]
            if dense:
                storage.write_matrix_dense_csv(matrix, out / "matrix_dense.csv")
                files.append("matrix_dense.csv")
        return {
            "state_version": state.version,
            "min_support": threshold,
            "labels": len(result.labels),
            "dropped_groups": [
                {
                    "group_id": g.group_id,
                    "label_text": g.label_text,
                    "image_support": g.image_support,
                }
                for g in result.dropped
            ],
            "mixed_section_groups": list(result.mixed_section_group_ids),
            "images_without_labels": len(matrix.zero_rows()),
            "out_dir": str(out),
            "files": files,
        }

    def stats(self) -> dict:
        state = self._snapshot
        counts = self.cluster_set.counts
        labels = filter_min_support(state.all_groups, self.min_support).labels
        return {
            "sentences": counts.input_sentences,
            "unique_sentences": counts.unique_sentences,
            "clusters": counts.n_clusters,
            "groups": len(state.all_groups),
            "labels_above_support": len(labels),
            "min_support": self.min_support,
            "state_version": state.version,
        }


# -- HTTP layer ----------------------------------------------------------


class GroupRequest(BaseModel):
    label_text: str
    member_cluster_ids: list[str]
    author: str = ""
    expected_state_version: Optional[int] = None


class DeleteRequest(BaseModel):
    author: str = ""
    expected_state_version: Optional[int] = None


class ExportRequest(BaseModel):
    min_support: Optional[int] = None
    dense: bool = False


def _group_payload(group: SemanticGroup) -> dict:
    return {
        "group_id": group.group_id,
        "label_text": group.label_text,
        "cluster_ids": list(group.cluster_ids),
        "image_support": group.image_support,
        "report_support": group.report_support,
        "singleton": group.group_id.startswith(_SOLO_PREFIX),
    }


def _cluster_payload(
    cluster: Cluster, assignment: Mapping[str, str], detail: bool = False
) -> dict:
    members = []
    for m in cluster.members:
        item = {"surface": m.surface_text, "frequency": m.frequency}
        if detail:
            item["sources"] = [
                {"report_id": s.report_id, "index": s.index_in_section}
                for s in m.sources
            ]
        members.append(item)
    return {
        "cluster_id": cluster.cluster_id,
        "section": cluster.section.canonical,
        "representative": cluster.representative,
        "size": len(cluster.members),
        "frequency": sum(m.frequency for m in cluster.members),
        "members": members,
        "group_id": assignment.get(cluster.cluster_id),
    }


def create_app(session: ReviewSession, ui_dir=None) -> FastAPI:
    app = FastAPI(title="labelforge review service")

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "backend": BACKEND,
            "session_id": session.session_id,
            "state_version": session.state_version,
        }

    @app.get("/api/clusters")
    def list_clusters(offset: int = 0, limit: int = 100):
        state = session.state
        clusters = session.cluster_set.clusters
        if offset < 0 or limit < 1:
            raise HTTPException(422, "offset must be >= 0 and limit >= 1")
        window = clusters[offset : offset + limit]
        return {
            "total": len(clusters),
            "offset": offset,
            "limit": limit,
            "state_version": state.version,
            "items": [_cluster_payload(c, state.assignment) for c in window],
        }

    @app.get("/api/clusters/{cluster_id:path}")
    def get_cluster(cluster_id: str):
        cluster = session.cluster(cluster_id)
        if cluster is None:
            raise HTTPException(404, f"unknown cluster: {cluster_id}")
        state = session.state
        return {
            "state_version": state.version,
            **_cluster_payload(cluster, state.assignment, detail=True),
        }

    @app.get("/api/groups")
    def list_groups():
        state = session.state
        return {
            "state_version": state.version,
            "items": [_group_payload(g) for g in state.named_groups],
        }

    @app.post("/api/groups", status_code=201)
    def create_group(request: GroupRequest):
        try:
            group = session.create_group(
                label_text=request.label_text,
                member_cluster_ids=request.member_cluster_ids,
                author=request.author,
                expected_state_version=request.expected_state_version,
            )
        except StaleVersion as e:
            raise HTTPException(
                409,
                {"error": "stale_version", "expected": e.expected, "actual": e.actual},
            ) from e
        except (UnknownClusterId, ConflictingDecision, ValueError) as e:
            raise HTTPException(422, f"{type(e).__name__}: {e}") from e
        return {
            "state_version": session.state_version,
            "group": _group_payload(group),
        }

    @app.delete("/api/groups/{group_id:path}")
    def delete_group(group_id: str, request: DeleteRequest | None = None):
        request = request or DeleteRequest()
        try:
            session.delete_group(
                group_id,
                author=request.author,
                expected_state_version=request.expected_state_version,
            )
        except StaleVersion as e:
            raise HTTPException(
                409,
                {"error": "stale_version", "expected": e.expected, "actual": e.actual},
            ) from e
        except UnknownGroupId as e:
            raise HTTPException(404, f"unknown group: {group_id}") from e
        except LabelSetError as e:
            raise HTTPException(422, f"{type(e).__name__}: {e}") from e
        return {"state_version": session.state_version, "deleted": group_id}

    @app.post("/api/export")
    def export(request: ExportRequest | None = None):
        request = request or ExportRequest()
        return session.export(min_support=request.min_support, dense=request.dense)

    @app.get("/api/stats")
    def stats():
        return session.stats()

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(
    session: ReviewSession,
    host: str = "127.0.0.1",
    port: int = 8080,
    ui_dir=None,
    ready_file=None,
    log_level: str = "info",
) -> None:
    """Bind the socket, optionally announce the bound port, run until
    interrupted. Binding before announcing lets callers pick port 0 and
    discover the real port from the ready file."""
    app = create_app(session, ui_dir=ui_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as e:
        sock.close()
        raise BindError(f"cannot bind {host}:{port}: {e}") from e
    sock.listen(128)
    actual_port = sock.getsockname()[1]
    logger.info("serving on %s:%d", host, actual_port)
    if ready_file is not None:
        Path(ready_file).write_text(f"{host}:{actual_port}\n", encoding="utf-8")
    config = uvicorn.Config(app, log_level=log_level, access_log=False)
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
        session.close()
