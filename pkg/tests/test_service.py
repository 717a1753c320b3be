"""HTTP API tests for the annotation service.

One module-scoped world bootstraps a real query iteration and leaves
its batch awaiting labels. Read-only assertions compare the wire
responses against the live store and driver state, so tests that
mutate the store (submitting labels, resolving discussions) do not
invalidate them. Each mutating test owns one queued segment.
"""

import json
from dataclasses import replace
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from gdprscan.active import ActiveLearningConfig, ActiveLearningDriver
from gdprscan.annotation import LabelStore
from gdprscan.compliance import ComplianceVector, aggregate
from gdprscan.errors import IterationStalled
from gdprscan.service import AnnotationService, create_app, load_tokens
from gdprscan.synth import labeled_segments

from conftest import TINY_CLASSIFIER

TOKENS = {"alice": "tok-alice", "bob": "tok-bob",
          "carol": "tok-carol", "dave": "tok-dave"}
ANNOTATORS = list(TOKENS)


def _auth(annotator):
    return {"Authorization": "Bearer %s" % (TOKENS[annotator],)}


def _summary():
    vectors = [
        ComplianceVector(doc_id="pol-a", covered=[True] * 18,
                         evidence=[[(0, 0.9)]] * 18),
        ComplianceVector(doc_id="pol-b", covered=[False] * 18,
                         evidence=[[] for _ in range(18)]),
    ]
    return aggregate(vectors)


@pytest.fixture(scope="module")
def world(tmp_path_factory, tiny_world):
    root = tmp_path_factory.mktemp("service")
    store = LabelStore()
    store.add_documents(tiny_world.docs)
    for doc in tiny_world.docs[:4]:
        for seg in doc.segments:
            code = tiny_world.oracle[seg.ref]
            for k in range(store.n_annotators):
                store.record_label(seg.doc_id, seg.seg_id, "seed-%d" % (k,), code)
    driver = ActiveLearningDriver(
        tiny_world.docs, store, tiny_world.embeddings,
        replace(TINY_CLASSIFIER, epochs=10),
        ActiveLearningConfig(pool_docs=3, query_budget=5,
                             discard_threshold=0.05, seed=11),
        labeled_segments(tiny_world.docs[30:], tiny_world.oracle),
        state_path=root / "state.json")
    driver.bootstrap()
    with pytest.raises(IterationStalled):
        driver.run_iteration()

    labels_path = root / "labels.jsonl"
    consolidations_path = root / "consolidations.jsonl"

    def persist():
        store.save(labels_path, consolidations_path)

    service = AnnotationService(store, TOKENS, driver=driver,
                                report=_summary(), on_change=persist)
    adjudication = AnnotationService(store, TOKENS, driver=driver,
                                     report=_summary(), reveal_hints=True)
    return SimpleNamespace(
        store=store, driver=driver, service=service,
        client=TestClient(create_app(service)),
        adjudicator=TestClient(create_app(adjudication)),
        labels_path=labels_path, consolidations_path=consolidations_path,
        pending=list(driver.pending))


def _expected_queue(world, annotator):
    refs = []
    for ref in world.pending:
        if world.store.consolidation(*ref) is not None:
            continue
        if annotator in world.store.labels_for(*ref):
            continue
        refs.append(ref)
    return refs


class TestAuthentication:
    def test_missing_token_is_401(self, world):
        response = world.client.get("/api/metrics")
        assert response.status_code == 401
        assert response.json()["error"] == "unauthorized"

    def test_unknown_token_is_401(self, world):
        response = world.client.get(
            "/api/metrics", headers={"Authorization": "Bearer nope"})
        assert response.status_code == 401

    def test_queue_rejects_a_token_for_someone_else(self, world):
        response = world.client.get(
            "/api/queue", params={"annotator": "bob"}, headers=_auth("alice"))
        assert response.status_code == 401


class TestTokenFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "tokens.json"
        path.write_text(json.dumps(TOKENS))
        assert load_tokens(path) == TOKENS

    @pytest.mark.parametrize("raw", [
        "[]", "{}", '{"a": ""}', '{"a": 5}', '{"a": "t", "b": "t"}',
        "not json"])
    def test_malformed_token_files_rejected(self, tmp_path, raw):
        from gdprscan.errors import FormatError
        path = tmp_path / "tokens.json"
        path.write_text(raw)
        with pytest.raises(FormatError):
            load_tokens(path)


class TestQueue:
    def test_batch_served_in_selection_order(self, world):
        response = world.client.get(
            "/api/queue", params={"annotator": "alice"}, headers=_auth("alice"))
        assert response.status_code == 200
        served = [(e["doc_id"], e["seg_id"]) for e in response.json()]
        assert served == _expected_queue(world, "alice")

    def test_entries_carry_text_and_iteration(self, world):
        entries = world.client.get(
            "/api/queue", params={"annotator": "bob"},
            headers=_auth("bob")).json()
        assert entries
        for entry in entries:
            assert entry["text"] == world.store.segment(
                entry["doc_id"], entry["seg_id"]).text
            assert entry["iteration"] == world.driver.iteration

    def test_pagination_truncates_after_page_size(self, world):
        full = _expected_queue(world, "carol")
        entries = world.client.get(
            "/api/queue", params={"annotator": "carol", "page_size": 2},
            headers=_auth("carol")).json()
        assert [(e["doc_id"], e["seg_id"]) for e in entries] == full[:2]

    def test_page_size_must_be_positive(self, world):
        response = world.client.get(
            "/api/queue", params={"annotator": "carol", "page_size": 0},
            headers=_auth("carol"))
        assert response.status_code == 422

    def test_hints_hidden_from_regular_annotators(self, world):
        entries = world.client.get(
            "/api/queue", params={"annotator": "dave"},
            headers=_auth("dave")).json()
        assert all(entry["hint"] is None for entry in entries)

    def test_hints_revealed_in_adjudication_mode(self, world):
        entries = world.adjudicator.get(
            "/api/queue", params={"annotator": "dave"},
            headers=_auth("dave")).json()
        assert entries
        for entry in entries:
            hint = entry["hint"]
            assert 1 <= hint["top1"]["code"] <= 18
            assert hint["top1"]["code"] != hint["top2"]["code"]
            assert hint["margin"] == pytest.approx(
                hint["top1"]["probability"] - hint["top2"]["probability"])

    def test_no_driver_means_no_queue(self, world):
        bare = TestClient(create_app(AnnotationService(world.store, TOKENS)))
        response = bare.get("/api/queue", params={"annotator": "alice"},
                            headers=_auth("alice"))
        assert response.status_code == 409
        assert response.json()["error"] == "no_active_iteration"


class TestLabelSubmission:
    def test_fourth_agreeing_label_consolidates(self, world):
        doc_id, seg_id = world.pending[0]
        body = {"doc_id": doc_id, "seg_id": seg_id, "label_code": 7}
        for annotator in ANNOTATORS[:3]:
            response = world.client.post(
                "/api/labels", json=body, headers=_auth(annotator))
            assert response.status_code == 201
            assert response.json()["consolidation"] is None
        response = world.client.post(
            "/api/labels", json=body, headers=_auth("dave"))
        assert response.status_code == 201
        result = response.json()["consolidation"]
        assert result["status"] == "accepted"
        assert result["gold_label_code"] == 7
        assert result["agreement"] == pytest.approx(1.0)

    def test_consolidated_segment_leaves_everyones_queue(self, world):
        doc_id, seg_id = world.pending[0]
        for annotator in ANNOTATORS:
            served = world.client.get(
                "/api/queue", params={"annotator": annotator},
                headers=_auth(annotator)).json()
            assert (doc_id, seg_id) not in {
                (e["doc_id"], e["seg_id"]) for e in served}

    def test_resubmission_returns_200_and_updates(self, world):
        doc_id, seg_id = world.pending[1]
        first = world.client.post(
            "/api/labels", json={"doc_id": doc_id, "seg_id": seg_id,
                                 "label_code": 3}, headers=_auth("alice"))
        assert first.status_code == 201
        second = world.client.post(
            "/api/labels", json={"doc_id": doc_id, "seg_id": seg_id,
                                 "label_code": 5}, headers=_auth("alice"))
        assert second.status_code == 200
        assert second.json()["label_code"] == 5
        labels = world.store.labels_for(doc_id, seg_id)
        assert labels["alice"].label_code == 5

    def test_labeled_segment_leaves_only_that_annotators_queue(self, world):
        doc_id, seg_id = world.pending[1]
        mine = world.client.get(
            "/api/queue", params={"annotator": "alice"},
            headers=_auth("alice")).json()
        assert (doc_id, seg_id) not in {(e["doc_id"], e["seg_id"]) for e in mine}
        theirs = world.client.get(
            "/api/queue", params={"annotator": "bob"},
            headers=_auth("bob")).json()
        assert (doc_id, seg_id) in {(e["doc_id"], e["seg_id"]) for e in theirs}

    def test_label_outside_batch_is_404(self, world, tiny_world):
        queued = set(world.pending)
        ref = next(seg.ref for doc in tiny_world.docs
                   for seg in doc.segments if seg.ref not in queued)
        response = world.client.post(
            "/api/labels", json={"doc_id": ref[0], "seg_id": ref[1],
                                 "label_code": 2}, headers=_auth("alice"))
        assert response.status_code == 404
        assert response.json()["error"] == "not_queued"

    def test_out_of_range_code_is_422(self, world):
        doc_id, seg_id = world.pending[4]
        response = world.client.post(
            "/api/labels", json={"doc_id": doc_id, "seg_id": seg_id,
                                 "label_code": 99}, headers=_auth("alice"))
        assert response.status_code == 422
        assert response.json()["error"] == "invalid_label"

    def test_non_integer_code_is_422(self, world):
        doc_id, seg_id = world.pending[4]
        response = world.client.post(
            "/api/labels", json={"doc_id": doc_id, "seg_id": seg_id,
                                 "label_code": "many"}, headers=_auth("alice"))
        assert response.status_code == 422
        assert response.json()["error"] == "validation"

    def test_labels_survive_a_store_reload(self, world, tiny_world):
        doc_id, seg_id = world.pending[0]
        segments = [seg for doc in tiny_world.docs for seg in doc.segments]
        reloaded = LabelStore.load(segments, world.labels_path,
                                   world.consolidations_path)
        assert len(reloaded.labels_for(doc_id, seg_id)) == 4
        restored = reloaded.consolidation(doc_id, seg_id)
        live = world.store.consolidation(doc_id, seg_id)
        assert restored.status == live.status
        assert restored.gold_label_code == live.gold_label_code


class TestDiscussions:
    def test_split_vote_then_group_resolution(self, world):
        doc_id, seg_id = world.pending[2]
        for annotator, code in zip(ANNOTATORS, [2, 2, 9, 9]):
            response = world.client.post(
                "/api/labels", json={"doc_id": doc_id, "seg_id": seg_id,
                                     "label_code": code},
                headers=_auth(annotator))
            assert response.status_code == 201
        assert response.json()["consolidation"]["status"] == "discuss"

        resolved = world.client.post(
            "/api/discussions/%s/%d/resolve" % (doc_id, seg_id),
            json={"outcome": "accept", "label_code": 2},
            headers=_auth("alice"))
        assert resolved.status_code == 200
        assert resolved.json()["status"] == "accepted"
        assert resolved.json()["gold_label_code"] == 2
        assert resolved.json()["resolved_by"] == "alice"

    def test_resolving_twice_is_409(self, world):
        doc_id, seg_id = world.pending[2]
        response = world.client.post(
            "/api/discussions/%s/%d/resolve" % (doc_id, seg_id),
            json={"outcome": "accept", "label_code": 2},
            headers=_auth("bob"))
        assert response.status_code == 409
        assert response.json()["error"] == "not_under_discussion"

    def test_resolving_unknown_segment_is_404(self, world):
        response = world.client.post(
            "/api/discussions/ghost/0/resolve",
            json={"outcome": "accept", "label_code": 2},
            headers=_auth("alice"))
        assert response.status_code == 404

    def test_accept_without_label_is_422(self, world):
        doc_id, seg_id = world.pending[3]
        response = world.client.post(
            "/api/discussions/%s/%d/resolve" % (doc_id, seg_id),
            json={"outcome": "accept"}, headers=_auth("alice"))
        assert response.status_code == 422

    def test_unknown_outcome_is_422(self, world):
        doc_id, seg_id = world.pending[3]
        response = world.client.post(
            "/api/discussions/%s/%d/resolve" % (doc_id, seg_id),
            json={"outcome": "postpone"}, headers=_auth("alice"))
        assert response.status_code == 422


class TestMetricsAndReport:
    def test_metrics_mirror_driver_records(self, world):
        payload = world.client.get(
            "/api/metrics", headers=_auth("alice")).json()
        assert payload == [r.to_dict() for r in world.driver.records]
        assert len(payload) >= 1

    def test_metrics_empty_without_driver(self, world):
        bare = TestClient(create_app(AnnotationService(world.store, TOKENS)))
        assert bare.get("/api/metrics", headers=_auth("alice")).json() == []

    def test_report_matches_summary(self, world):
        payload = world.client.get("/api/report", headers=_auth("bob")).json()
        assert payload == _summary().to_dict()

    def test_report_404_when_none_produced(self, world):
        bare = TestClient(create_app(AnnotationService(world.store, TOKENS)))
        response = bare.get("/api/report", headers=_auth("bob"))
        assert response.status_code == 404
        assert response.json()["error"] == "no_report"


class TestSegmentLookup:
    def test_read_your_own_write(self, world):
        doc_id, seg_id = world.pending[1]
        payload = world.client.get(
            "/api/segments/%s/%d" % (doc_id, seg_id),
            headers=_auth("alice")).json()
        assert payload["my_label"] == 5
        assert payload["n_labels"] == len(world.store.labels_for(doc_id, seg_id))
        assert "labels" not in payload

    def test_adjudicator_sees_everyones_labels(self, world):
        doc_id, seg_id = world.pending[0]
        payload = world.adjudicator.get(
            "/api/segments/%s/%d" % (doc_id, seg_id),
            headers=_auth("alice")).json()
        assert payload["labels"] == {a: 7 for a in ANNOTATORS}
        assert payload["consolidation"]["status"] == "accepted"

    def test_unknown_segment_is_404(self, world):
        response = world.client.get(
            "/api/segments/ghost/3", headers=_auth("alice"))
        assert response.status_code == 404


class TestStaticUi:
    def test_bundle_served_when_configured(self, world, tmp_path):
        (tmp_path / "index.html").write_text("<html><body>console</body></html>")
        client = TestClient(create_app(world.service, static_dir=tmp_path))
        response = client.get("/")
        assert response.status_code == 200
        assert "console" in response.text

    def test_root_is_404_without_a_bundle(self, world):
        response = world.client.get("/")
        assert response.status_code == 404
