"""HTTP service for the annotation workflow.

The API payload for annotations is exactly the notation module's JSON
schema; derivation and agreement endpoints are pure functions of the
stored documents and the configured vagueness horizon. Static UI assets,
when present, are served at the root path.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .agreement import compare_documents
from .inference import derive_document
from .interchange import export_timeml
from .notation import DocumentError, document_to_jsonable, parse_annotation_doc
from .store import DocumentStore, RevisionConflict, StoreConfig
from .timeline import AnnotationError, validate

_PLACEHOLDER = """<!doctype html>
<html><head><title>narrativetime</title></head>
<body><h1>narrativetime annotation service</h1>
<p>No UI build found. The JSON API lives under <code>/api</code>.</p>
</body></html>
"""


def _record_to_jsonable(record) -> dict:
    out = {
        "event_id": record.event_id,
        "etype": record.etype.value,
        "generic": record.generic,
        "span_id": record.span_id,
        "speech": record.speech.source.value
        if record.speech.character is None
        else f"character:{record.speech.character}",
    }
    if record.coord is not None:
        out["timeline"] = record.coord.timeline_id
        out["slot_lo"] = str(record.coord.slot_lo)
        out["slot_hi"] = str(record.coord.slot_hi)
        out["seq_index"] = record.coord.seq_index
        out["left_fuzzy"] = record.coord.left_kind.value == "fuzzy"
        out["right_fuzzy"] = record.coord.right_kind.value == "fuzzy"
    if record.branch is not None:
        out["branch"] = {
            "branch": record.branch.branch_id,
            "dir": record.branch.direction.value,
            "anchor": str(record.branch.anchor),
        }
    return out


def _resolve_annotator(store: DocumentStore, doc_id: str, annotator: str | None) -> str:
    if annotator:
        return annotator
    known = store.annotators(doc_id)
    if not known:
        raise HTTPException(404, f"no annotations stored for document {doc_id!r}")
    return known[0]


def create_app(config: StoreConfig) -> FastAPI:
    store = DocumentStore(config.root)
    app = FastAPI(title="narrativetime", docs_url=None, redoc_url=None)

    @app.get("/api/docs")
    def list_docs() -> list[dict]:
        return [entry.to_jsonable() for entry in store.list_entries()]

    @app.get("/api/docs/{doc_id}")
    def get_doc(doc_id: str, annotator: str | None = Query(default=None)) -> dict:
        name = _resolve_annotator(store, doc_id, annotator)
        try:
            revision, document = store.get(doc_id, name)
        except KeyError:
            raise HTTPException(404, f"document {doc_id!r} / annotator {name!r} not found")
        return {"revision": revision, "document": document_to_jsonable(document)}

    @app.put("/api/docs/{doc_id}/annotation")
    async def put_annotation(
        doc_id: str, request: Request, revision: int | None = Query(default=None)
    ) -> dict:
        body = await request.body()
        try:
            document = parse_annotation_doc(body)
        except DocumentError as err:
            raise HTTPException(400, {"code": err.code, "message": err.message})
        if document.doc_id != doc_id:
            raise HTTPException(
                400,
                {"code": "DOC_ID_MISMATCH", "message": "body doc_id differs from path"},
            )
        try:
            new_revision = store.put(document, expected_revision=revision)
        except RevisionConflict as err:
            return JSONResponse(
                status_code=409,
                content={"revision": err.current, "error": str(err)},
            )
        diagnostics = validate(document)
        return {
            "revision": new_revision,
            "diagnostics": [d.to_jsonable() for d in diagnostics],
        }

    @app.post("/api/docs/{doc_id}/derive")
    def derive(doc_id: str, annotator: str | None = Query(default=None)) -> dict:
        name = _resolve_annotator(store, doc_id, annotator)
        try:
            _, document = store.get(doc_id, name)
        except KeyError:
            raise HTTPException(404, f"document {doc_id!r} / annotator {name!r} not found")
        try:
            derivation = derive_document(document, vague_horizon=config.vague_horizon)
        except AnnotationError as err:
            return JSONResponse(
                status_code=422,
                content={"diagnostics": [d.to_jsonable() for d in err.diagnostics]},
            )
        payload = derivation.graph.to_jsonable()
        payload["records"] = [_record_to_jsonable(r) for r in derivation.records]
        payload["uncovered"] = list(derivation.uncovered)
        payload["diagnostics"] = [d.to_jsonable() for d in derivation.diagnostics]
        return payload

    @app.get("/api/docs/{doc_id}/timeml")
    def timeml(doc_id: str, annotator: str | None = Query(default=None)) -> Response:
        name = _resolve_annotator(store, doc_id, annotator)
        try:
            _, document = store.get(doc_id, name)
        except KeyError:
            raise HTTPException(404, f"document {doc_id!r} / annotator {name!r} not found")
        try:
            derivation = derive_document(document, vague_horizon=config.vague_horizon)
        except AnnotationError as err:
            return JSONResponse(
                status_code=422,
                content={"diagnostics": [d.to_jsonable() for d in err.diagnostics]},
            )
        return Response(
            content=export_timeml(document, derivation.graph),
            media_type="application/xml",
        )

    @app.post("/api/agreement")
    async def agreement(request: Request) -> dict:
        body = await request.json()
        for key in ("doc_id", "annotator_a", "annotator_b"):
            if not isinstance(body.get(key), str):
                raise HTTPException(400, f"missing field {key!r}")
        try:
            _, doc_a = store.get(body["doc_id"], body["annotator_a"])
            _, doc_b = store.get(body["doc_id"], body["annotator_b"])
        except KeyError as err:
            raise HTTPException(404, f"annotation not found: {err.args[0]}")
        try:
            report = compare_documents(doc_a, doc_b, vague_horizon=config.vague_horizon)
        except AnnotationError as err:
            return JSONResponse(
                status_code=422,
                content={"diagnostics": [d.to_jsonable() for d in err.diagnostics]},
            )
        return report.to_jsonable()

    ui_dir = config.ui_dir
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _PLACEHOLDER

    return app


def run(config: StoreConfig) -> None:
    import uvicorn

    host, _, port = config.listen.rpartition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port))
