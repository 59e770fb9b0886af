import json

import pytest
from fastapi.testclient import TestClient

from narrativetime import DocumentStore, RevisionConflict, StoreConfig
from narrativetime.server import create_app
from narrativetime.notation import serialize_annotation_doc

from conftest import fixture_bytes, load_fixture


@pytest.fixture
def store(tmp_path):
    root = tmp_path / "store"
    root.mkdir()
    return DocumentStore(root)


@pytest.fixture
def client(tmp_path):
    root = tmp_path / "store"
    root.mkdir()
    app = create_app(StoreConfig(root=root))
    return TestClient(app)


def put_fixture(client, name, doc_id, revision=None):
    params = {} if revision is None else {"revision": revision}
    return client.put(
        f"/api/docs/{doc_id}/annotation",
        content=fixture_bytes(name),
        params=params,
    )


# --- store ---------------------------------------------------------------------

def test_put_then_get_returns_identical_document(store, fable_doc):
    revision = store.put(fable_doc)
    assert revision == 1
    got_revision, got = store.get(fable_doc.doc_id, fable_doc.annotator_id)
    assert got_revision == 1
    assert got == fable_doc


def test_revisions_increase_and_conflict(store, fable_doc):
    assert store.put(fable_doc) == 1
    assert store.put(fable_doc, expected_revision=1) == 2
    with pytest.raises(RevisionConflict):
        store.put(fable_doc, expected_revision=1)


def test_two_annotators_live_side_by_side(store, fable_doc, fable_doc_b):
    store.put(fable_doc)
    store.put(fable_doc_b)
    assert store.annotators(fable_doc.doc_id) == ["ann-a", "ann-b"]
    entries = store.list_entries()
    assert {(e.doc_id, e.annotator_id) for e in entries} == {
        ("two-travellers", "ann-a"),
        ("two-travellers", "ann-b"),
    }


def test_no_partial_file_after_failed_write(store, fable_doc, monkeypatch):
    import os

    store.put(fable_doc)
    real_replace = os.replace

    def explode(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", explode)
    with pytest.raises(OSError):
        store.put(fable_doc)
    monkeypatch.setattr(os, "replace", real_replace)
    revision, got = store.get(fable_doc.doc_id, fable_doc.annotator_id)
    assert revision == 1
    assert got == fable_doc
    leftovers = [p for p in store.root.rglob("*.tmp")]
    assert leftovers == []


# --- HTTP API --------------------------------------------------------------------

def test_listing_and_fetching(client):
    response = put_fixture(client, "two_travellers.ann_a.json", "two-travellers")
    assert response.status_code == 200
    body = response.json()
    assert body["revision"] == 1
    assert all(d["severity"] != "ERROR" for d in body["diagnostics"])

    listing = client.get("/api/docs").json()
    assert listing == [
        {
            "doc_id": "two-travellers",
            "annotator_id": "ann-a",
            "revision": 1,
            "n_events": 18,
            "n_spans": 11,
        }
    ]

    fetched = client.get("/api/docs/two-travellers").json()
    assert fetched["revision"] == 1
    assert fetched["document"] == json.loads(fixture_bytes("two_travellers.ann_a.json"))


def test_put_get_round_trip_is_identity(client, fable_doc):
    client.put(
        "/api/docs/two-travellers/annotation",
        content=serialize_annotation_doc(fable_doc),
    )
    fetched = client.get("/api/docs/two-travellers").json()["document"]
    assert json.dumps(fetched, sort_keys=True) == json.dumps(
        json.loads(serialize_annotation_doc(fable_doc)), sort_keys=True
    )


def test_stale_revision_conflicts(client):
    put_fixture(client, "two_travellers.ann_a.json", "two-travellers")
    response = put_fixture(client, "two_travellers.ann_a.json", "two-travellers", revision=0)
    assert response.status_code == 409
    assert response.json()["revision"] == 1


def test_invalid_body_is_a_coded_400(client):
    response = client.put(
        "/api/docs/broken/annotation", content=b'{"doc_id": "broken"'
    )
    assert response.status_code == 400
    assert response.json()["detail"]["code"] == "BAD_JSON"


def test_doc_id_mismatch_rejected(client):
    response = put_fixture(client, "two_travellers.ann_a.json", "other-doc")
    assert response.status_code == 400
    assert response.json()["detail"]["code"] == "DOC_ID_MISMATCH"


def test_derive_endpoint_returns_dense_graph(client):
    put_fixture(client, "two_travellers.ann_a.json", "two-travellers")
    response = client.post("/api/docs/two-travellers/derive")
    assert response.status_code == 200
    body = response.json()
    n = len(body["event_ids"])
    assert len(body["tlinks"]) == n * (n - 1) // 2 == 153
    assert body["uncovered"] == []
    assert all(link["rule"] for link in body["tlinks"])
    records = {r["event_id"]: r for r in body["records"]}
    assert len(records) == 18
    assert any(r.get("seq_index") for r in body["records"])


def test_derive_endpoint_rejects_broken_annotation(client):
    broken = json.loads(fixture_bytes("two_travellers.ann_a.json"))
    del broken["spans"][1]["tml"]  # bounded span without a position
    response = client.put(
        "/api/docs/two-travellers/annotation", content=json.dumps(broken)
    )
    assert response.status_code == 400  # rejected at parse time

    # A parseable but invalid document: event covered twice.
    covered_twice = json.loads(fixture_bytes("meeting.json"))
    covered_twice["spans"].append(
        {
            "id": "s3",
            "ranges": covered_twice["spans"][0]["ranges"],
            "type": "U",
            "speech": "narrator",
        }
    )
    response = client.put(
        "/api/docs/meeting/annotation", content=json.dumps(covered_twice)
    )
    assert response.status_code == 200
    assert any(d["code"] == "EVENT_IN_MULTIPLE_SPANS" for d in response.json()["diagnostics"])
    response = client.post("/api/docs/meeting/derive")
    assert response.status_code == 422


def test_timeml_endpoint(client):
    put_fixture(client, "two_travellers.ann_a.json", "two-travellers")
    response = client.get("/api/docs/two-travellers/timeml")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/xml")
    assert response.content.count(b"<TLINK") == 153


def test_agreement_endpoint(client):
    put_fixture(client, "two_travellers.ann_a.json", "two-travellers")
    put_fixture(client, "two_travellers.ann_b.json", "two-travellers")
    response = client.post(
        "/api/agreement",
        json={
            "doc_id": "two-travellers",
            "annotator_a": "ann-a",
            "annotator_b": "ann-b",
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["n_pairs"] == 153
    assert len(body["confusion"]) == 5
    assert body["confusion_labels"] == ["[B]", "[I]", "[U}", "{U]", "{U}"]


def test_missing_document_is_404(client):
    assert client.get("/api/docs/nope").status_code == 404
    assert client.post("/api/docs/nope/derive").status_code == 404


def test_root_serves_placeholder_without_ui(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "annotation service" in response.text


def test_root_serves_ui_assets_when_built(tmp_path):
    root = tmp_path / "store"
    root.mkdir()
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<html><body>timeline editor</body></html>")
    app = create_app(StoreConfig(root=root, ui_dir=ui))
    client = TestClient(app)
    response = client.get("/")
    assert response.status_code == 200
    assert "timeline editor" in response.text
