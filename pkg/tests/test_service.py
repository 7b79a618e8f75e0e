import json
import threading
from urllib.parse import quote

import pytest
from fastapi.testclient import TestClient

from labelforge.clustering import cluster_corpus
from labelforge.errors import CorruptLog
from labelforge.service import ReviewSession, create_app
from labelforge.similarity import SimilarityParams
from labelforge.storage import write_clusters

from conftest import sent

PARAMS = SimilarityParams(tau=0.6, delta=0.1, gamma=0.7)
TEXTS = ("aaaa bbbb", "cccc dddd", "eeee ffff")
IMAGES = {"r0": ("im0a", "im0b"), "r1": ("im1a",), "r2": ("im2a",)}


@pytest.fixture
def paths(tmp_path):
    sentences = [sent(t, report_id=f"r{i}") for i, t in enumerate(TEXTS)]
    cs = cluster_corpus(sentences, PARAMS)
    clusters_path = tmp_path / "clusters.json"
    write_clusters(cs, IMAGES, clusters_path)
    return clusters_path, tmp_path / "decisions.jsonl"


@pytest.fixture
def session(paths):
    s = ReviewSession(*paths, min_support=1, export_dir=paths[0].parent / "export")
    yield s
    s.close()


@pytest.fixture
def client(session):
    return TestClient(create_app(session))


def cluster_ids(client):
    return [c["cluster_id"] for c in client.get("/api/clusters").json()["items"]]


class TestReadEndpoints:
    def test_healthz(self, client):
        body = client.get("/healthz").json()
        assert body["status"] == "ok"
        assert body["backend"] in ("c", "python")
        assert body["state_version"] == 0

    def test_cluster_listing_and_pagination(self, client):
        body = client.get("/api/clusters").json()
        assert body["total"] == 3
        assert len(body["items"]) == 3
        assert all(item["group_id"] is None for item in body["items"])

        page = client.get("/api/clusters", params={"offset": 1, "limit": 1}).json()
        assert len(page["items"]) == 1
        assert page["items"][0]["cluster_id"] == body["items"][1]["cluster_id"]

    def test_pagination_validation(self, client):
        assert client.get("/api/clusters", params={"offset": -1}).status_code == 422
        assert client.get("/api/clusters", params={"limit": 0}).status_code == 422

    def test_cluster_detail(self, client):
        # ids contain '#', so clients must percent-encode the path segment
        cid = cluster_ids(client)[0]
        body = client.get(f"/api/clusters/{quote(cid, safe='')}").json()
        assert body["cluster_id"] == cid
        assert body["members"][0]["sources"] == [{"report_id": "r0", "index": 0}]

    def test_cluster_detail_unknown(self, client):
        assert client.get("/api/clusters/ghost").status_code == 404

    def test_stats_fresh_session(self, client):
        body = client.get("/api/stats").json()
        assert body["clusters"] == 3
        assert body["groups"] == 3
        assert body["state_version"] == 0

    def test_groups_empty_before_decisions(self, client):
        assert client.get("/api/groups").json()["items"] == []


class TestMutations:
    def test_create_group(self, client):
        ids = cluster_ids(client)
        resp = client.post(
            "/api/groups",
            json={"label_text": "merged", "member_cluster_ids": ids[:2], "author": "ann"},
        )
        assert resp.status_code == 201
        body = resp.json()
        assert body["state_version"] == 1
        assert body["group"]["group_id"] == "g0001"
        assert body["group"]["cluster_ids"] == ids[:2]
        assert body["group"]["image_support"] == 3

        groups = client.get("/api/groups").json()["items"]
        assert [g["group_id"] for g in groups] == ["g0001"]
        listed = client.get("/api/clusters").json()["items"]
        assert [c["group_id"] for c in listed] == ["g0001", "g0001", None]
        stats = client.get("/api/stats").json()
        assert stats["groups"] == 2  # one named group + one singleton

    def test_unknown_cluster_rejected(self, client):
        resp = client.post(
            "/api/groups", json={"label_text": "x", "member_cluster_ids": ["ghost"]}
        )
        assert resp.status_code == 422
        assert "UnknownClusterId" in resp.json()["detail"]

    def test_empty_label_rejected(self, client):
        ids = cluster_ids(client)
        resp = client.post(
            "/api/groups", json={"label_text": "  ", "member_cluster_ids": ids[:1]}
        )
        assert resp.status_code == 422

    def test_version_conflict(self, client):
        ids = cluster_ids(client)
        ok = client.post(
            "/api/groups",
            json={
                "label_text": "first",
                "member_cluster_ids": ids[:1],
                "expected_state_version": 0,
            },
        )
        assert ok.status_code == 201
        stale = client.post(
            "/api/groups",
            json={
                "label_text": "second",
                "member_cluster_ids": ids[1:2],
                "expected_state_version": 0,
            },
        )
        assert stale.status_code == 409
        detail = stale.json()["detail"]
        assert detail["error"] == "stale_version"
        assert detail["expected"] == 0
        assert detail["actual"] == 1

    def test_delete_group(self, client):
        ids = cluster_ids(client)
        client.post("/api/groups", json={"label_text": "g", "member_cluster_ids": ids[:2]})
        resp = client.delete("/api/groups/g0001")
        assert resp.status_code == 200
        assert resp.json()["state_version"] == 2
        assert client.get("/api/groups").json()["items"] == []

    def test_delete_unknown_group(self, client):
        assert client.delete("/api/groups/ghost").status_code == 404

    def test_delete_version_conflict(self, client):
        ids = cluster_ids(client)
        client.post("/api/groups", json={"label_text": "g", "member_cluster_ids": ids[:1]})
        resp = client.request(
            "DELETE", "/api/groups/g0001", json={"expected_state_version": 0}
        )
        assert resp.status_code == 409

    def test_rejected_mutation_not_logged(self, client, paths):
        ids = cluster_ids(client)
        client.post("/api/groups", json={"label_text": "x", "member_cluster_ids": ["ghost"]})
        client.post("/api/groups", json={"label_text": "ok", "member_cluster_ids": ids[:1]})
        lines = paths[1].read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["label_text"] == "ok"


class TestExport:
    def test_no_decision_export_is_singletons(self, client, paths):
        resp = client.post("/api/export", json={"min_support": 1}).json()
        assert resp["labels"] == 3
        export_dir = paths[0].parent / "export"
        lines = (export_dir / "labels.csv").read_text().splitlines()
        assert len(lines) == 4

    def test_export_after_merge(self, client, paths):
        ids = cluster_ids(client)
        client.post("/api/groups", json={"label_text": "merged", "member_cluster_ids": ids[:2]})
        resp = client.post("/api/export", json={"min_support": 1}).json()
        assert resp["labels"] == 2
        assert resp["state_version"] == 1
        matrix_lines = (paths[0].parent / "export" / "matrix.csv").read_text().splitlines()
        # merged label reaches 3 images, singleton 1: 4 cells + header
        assert len(matrix_lines) == 5

    def test_export_threshold_drops(self, client):
        resp = client.post("/api/export", json={"min_support": 2}).json()
        assert resp["labels"] == 1  # only r0's cluster has two images
        assert len(resp["dropped_groups"]) == 2

    def test_export_body_optional(self, client):
        assert client.post("/api/export").json()["min_support"] == 1

    def test_dense_export(self, client, paths):
        resp = client.post("/api/export", json={"dense": True}).json()
        assert "matrix_dense.csv" in resp["files"]
        assert (paths[0].parent / "export" / "matrix_dense.csv").exists()


class TestReplayAndDurability:
    def test_replay_restores_state(self, paths):
        s1 = ReviewSession(*paths, min_support=1)
        ids = [c.cluster_id for c in s1.cluster_set.clusters]
        s1.create_group("merged", ids[:2])
        s1.delete_group("g0001")
        s1.create_group("again", ids[1:])
        s1.close()

        s2 = ReviewSession(*paths, min_support=1)
        assert s2.state_version == 3
        assert [g.group_id for g in s2.state.named_groups] == ["g0002"]
        assert s2.state.named_groups[0].cluster_ids == tuple(ids[1:])
        # id counter resumes past every replayed id
        group = s2.create_group("third", ids[:1])
        assert group.group_id == "g0003"
        s2.close()

    def test_torn_tail_truncated_on_startup(self, paths):
        clusters_path, decisions_path = paths
        s1 = ReviewSession(*paths, min_support=1)
        ids = [c.cluster_id for c in s1.cluster_set.clusters]
        s1.create_group("kept", ids[:1])
        s1.close()
        good = decisions_path.stat().st_size
        with open(decisions_path, "a", encoding="utf-8") as fh:
            fh.write('{"type": "merge", "group_id"')

        s2 = ReviewSession(*paths, min_support=1)
        assert decisions_path.stat().st_size == good
        assert s2.state_version == 1
        s2.create_group("after", ids[1:2])
        s2.close()
        s3 = ReviewSession(*paths, min_support=1)
        assert s3.state_version == 2
        s3.close()

    def test_corrupt_log_refuses_startup(self, paths):
        clusters_path, decisions_path = paths
        decisions_path.write_text("terminated garbage\n")
        with pytest.raises(CorruptLog):
            ReviewSession(*paths, min_support=1)

    def test_serialized_concurrent_mutations(self, paths):
        session = ReviewSession(*paths, min_support=1)
        ids = [c.cluster_id for c in session.cluster_set.clusters]
        errors = []

        def worker(k):
            try:
                session.create_group(f"label {k}", [ids[k % 3]])
            except Exception as e:  # pragma: no cover
                errors.append(e)

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(9)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert session.state_version == 9
        lines = paths[1].read_text().splitlines()
        assert len(lines) == 9
        gids = [json.loads(l)["group_id"] for l in lines]
        assert len(set(gids)) == 9
        session.close()


class TestStaticUi:
    def test_ui_mounted_when_dir_given(self, session, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<!doctype html><title>review</title>")
        client = TestClient(create_app(session, ui_dir=ui))
        page = client.get("/")
        assert page.status_code == 200
        assert "review" in page.text
        # API still wins over the static mount
        assert client.get("/api/stats").status_code == 200
