import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from durability import run_crash_rounds
from interestboard.api import create_app
from interestboard.features import FeatureStore
from interestboard.service import ComparisonLog, Session
from stub_extractor import StubExtractorServer, pixel_features


@pytest.fixture
def store(rng):
    matrix = np.abs(rng.standard_normal((6, 16))) + 0.05
    return FeatureStore.from_arrays(
        [f"img{i}" for i in range(6)],
        matrix,
        [f"img{i}.png" for i in range(6)],
    )


@pytest.fixture
def session(store, tmp_path):
    return Session(
        store,
        ComparisonLog(tmp_path / "comparisons.jsonl"),
        skip_log_path=tmp_path / "skips.jsonl",
        rng_seed=7,
        auto_recompute_every=0,
    )


class TestComparisonLog:
    def test_append_and_replay(self, tmp_path):
        path = tmp_path / "log.jsonl"
        log = ComparisonLog(path)
        from interestboard.ranking import Comparison

        assert log.append(Comparison("a", "b")) == 1
        assert log.append(Comparison("b", "a")) == 2
        log.close()
        reopened = ComparisonLog(path)
        entries = reopened.entries()
        assert [(c.winner_id, c.loser_id) for c in entries] == [("a", "b"), ("b", "a")]

    def test_partial_trailing_line_ignored(self, tmp_path):
        path = tmp_path / "log.jsonl"
        log = ComparisonLog(path)
        from interestboard.ranking import Comparison

        log.append(Comparison("a", "b"))
        log.close()
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"winner": "b", "loser"')  # torn write, no newline
        reopened = ComparisonLog(path)
        assert len(reopened) == 1

    def test_duplicate_ref_is_idempotent(self, tmp_path):
        from interestboard.ranking import Comparison

        log = ComparisonLog(tmp_path / "log.jsonl")
        assert log.append(Comparison("a", "b"), ref="r1") == 1
        assert log.append(Comparison("a", "b"), ref="r1") == 1
        assert log.append(Comparison("a", "b"), ref="r2") == 2
        log.close()
        assert len(ComparisonLog(tmp_path / "log.jsonl")) == 2

    def test_durable_append_survives_kill(self, tmp_path):
        """Kill -9 the appender at random moments; every acknowledged append
        must be present after recovery. (The acceptance suite runs the full
        100-round version.)"""
        run_crash_rounds(tmp_path, rounds=10)


class TestSession:
    def test_sample_pair_distinct_and_deterministic(self, store, tmp_path):
        make = lambda: Session(
            store, ComparisonLog(tmp_path / f"l{np.random.randint(1e9)}.jsonl"),
            rng_seed=11, auto_recompute_every=0,
        )
        s1, s2 = make(), make()
        seq1 = [s1.sample_pair() for _ in range(25)]
        seq2 = [s2.sample_pair() for _ in range(25)]
        assert seq1 == seq2
        assert all(a != b for a, b in seq1)

    def test_two_image_store_returns_the_only_pair(self, rng, tmp_path):
        store = FeatureStore.from_arrays(["x", "y"], np.abs(rng.normal(size=(2, 4))) + 0.1)
        session = Session(store, ComparisonLog(tmp_path / "log.jsonl"),
                          auto_recompute_every=0)
        assert set(session.sample_pair()) == {"x", "y"}

    def test_pair_needs_two_images(self, rng, tmp_path):
        store = FeatureStore.from_arrays(["x"], np.ones((1, 4)))
        session = Session(store, ComparisonLog(tmp_path / "log.jsonl"),
                          auto_recompute_every=0)
        with pytest.raises(ValueError):
            session.sample_pair()

    def test_record_validates_ids(self, session):
        with pytest.raises(ValueError, match="unknown"):
            session.record_comparison("img0", "nope")
        with pytest.raises(ValueError):
            session.record_comparison("img0", "img0")

    def test_recompute_scores_every_image(self, session):
        session.record_comparison("img0", "img1")
        session.record_comparison("img2", "img1")
        smoothed = session.recompute()
        assert smoothed is not None
        assert set(smoothed.ids) == {f"img{i}" for i in range(6)}
        assert session.status()["covered_prefix"] == 2
        assert session.status()["recompute"]["state"] == "idle"

    def test_recompute_empty_log_rejected(self, session):
        with pytest.raises(ValueError, match="empty"):
            session.recompute()

    def test_recompute_deterministic_bitwise(self, session):
        session.record_comparison("img0", "img1")
        session.record_comparison("img3", "img4")
        first = session.recompute()
        second = session.recompute()
        np.testing.assert_array_equal(first.means, second.means)
        np.testing.assert_array_equal(first.variances, second.variances)

    def test_skip_logged_but_not_evidence(self, session, tmp_path):
        session.record_skip("img0", "img1", "sess")
        assert len(session.log) == 0
        lines = (tmp_path / "skips.jsonl").read_text().strip().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["a"] == "img0"

    def test_auto_recompute_trigger(self, store, tmp_path):
        session = Session(
            store, ComparisonLog(tmp_path / "log.jsonl"), auto_recompute_every=3,
        )
        for k in range(3):
            session.record_comparison("img0", "img1")
        deadline = time.time() + 10.0
        while session.scores is None and time.time() < deadline:
            time.sleep(0.02)
        assert session.scores is not None


class TestApi:
    @pytest.fixture
    def client(self, session, store, tmp_path):
        images_root = tmp_path / "images"
        images_root.mkdir()
        from PIL import Image

        for image_id in store.ids:
            Image.new("RGB", (32, 32), (100, 120, 140)).save(
                images_root / f"{image_id}.png"
            )
        app = create_app(session, images_root=images_root)
        return TestClient(app)

    def test_pair_endpoint(self, client):
        body = client.get("/api/pair").json()
        assert body["a"]["id"] != body["b"]["id"]
        assert body["a"]["path"].startswith("/images/")

    def test_comparison_flow(self, client):
        pair = client.get("/api/pair").json()
        resp = client.post(
            "/api/comparison",
            json={"winner": pair["a"]["id"], "loser": pair["b"]["id"], "session": "s"},
        )
        assert resp.status_code == 200
        assert resp.json()["log_length"] == 1

    def test_comparison_validation_errors(self, client):
        assert client.post(
            "/api/comparison", json={"winner": "img0", "loser": "img0"}
        ).status_code == 400
        assert client.post(
            "/api/comparison", json={"winner": "img0", "loser": "zzz"}
        ).status_code == 400

    def test_duplicate_ref_not_double_logged(self, client):
        body = {"winner": "img0", "loser": "img1", "session": "s", "ref": "j-1"}
        first = client.post("/api/comparison", json=body).json()
        second = client.post("/api/comparison", json=body).json()
        assert first["log_length"] == 1
        assert second["log_length"] == 1

    def test_scores_before_recompute_is_conflict(self, client):
        assert client.get("/api/scores").status_code == 409

    def test_full_read_paths_after_recompute(self, client):
        client.post("/api/comparison", json={"winner": "img0", "loser": "img1"})
        client.post("/api/comparison", json={"winner": "img0", "loser": "img2"})
        assert client.post("/api/recompute").status_code == 200
        scores = client.get("/api/scores").json()
        assert len(scores) == 6
        top = max(scores, key=lambda r: r["mean"])
        assert top["id"] == "img0"

        board = client.get("/api/storyboard", params={"n": 3, "d": 0}).json()
        assert len(board["images"]) == 3
        assert board["complete"]

        cluster = client.get(
            "/api/storyboard", params={"n": 2, "method": "cluster"}
        ).json()
        assert len(cluster["images"]) == 2

        status = client.get("/api/status").json()
        assert status["scores_available"]
        assert status["log_length"] == 2

    def test_storyboard_bad_method(self, client):
        assert client.get(
            "/api/storyboard", params={"method": "nope"}
        ).status_code == 400

    def test_skip_endpoint(self, client):
        resp = client.post("/api/skip", json={"a": "img0", "b": "img1"})
        assert resp.status_code == 200

    def test_images_served(self, client):
        resp = client.get("/images/img0.png")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"

    def test_get_endpoints_are_read_only(self, client):
        client.post("/api/comparison", json={"winner": "img0", "loser": "img1"})
        client.post("/api/recompute")
        before = client.get("/api/status").json()
        for _ in range(5):
            client.get("/api/pair")
            client.get("/api/scores")
            client.get("/api/storyboard", params={"n": 2})
        assert client.get("/api/status").json() == before

    def test_saliency_without_extractor_is_503(self, client):
        assert client.get("/api/saliency/img0").status_code == 503


class TestApiSaliency:
    def test_saliency_endpoint_with_stub_extractor(self, rng, tmp_path):
        from PIL import Image

        dim = 16
        images_root = tmp_path / "images"
        images_root.mkdir()
        ids, rows = [], []
        for k in range(4):
            img = Image.fromarray(
                (rng.uniform(0, 255, size=(64, 64, 3))).astype(np.uint8)
            )
            img.save(images_root / f"im{k}.png")
            ids.append(f"im{k}")
            rows.append(pixel_features(img, dim))
        store = FeatureStore.from_arrays(ids, np.array(rows),
                                         [f"im{k}.png" for k in range(4)])
        session = Session(store, ComparisonLog(tmp_path / "log.jsonl"),
                          auto_recompute_every=0)
        session.record_comparison("im0", "im1")
        session.recompute()
        with StubExtractorServer(dim=dim) as server:
            app = create_app(session, images_root=images_root,
                             extractor_url=server.url)
            client = TestClient(app)
            resp = client.get("/api/saliency/im0", params={"window": 56, "stride": 56})
            assert resp.status_code == 200
            body = resp.json()
            assert body["rows"] == body["cols"] == 4
            assert len(body["deltas"]) == 4
            assert server.calls == 4 * 4 + 1

    def test_unknown_image_404(self, rng, tmp_path):
        store = FeatureStore.from_arrays(["a", "b"], np.abs(rng.normal(size=(2, 4))) + 0.1)
        session = Session(store, ComparisonLog(tmp_path / "log.jsonl"),
                          auto_recompute_every=0)
        session.record_comparison("a", "b")
        session.recompute()
        with StubExtractorServer(dim=4) as server:
            app = create_app(session, images_root=tmp_path, extractor_url=server.url)
            client = TestClient(app)
            assert client.get("/api/saliency/zzz").status_code == 404
