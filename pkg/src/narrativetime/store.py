"""File-backed store for annotation documents.

One JSON file per (document, annotator) pair under the store root, each
holding a monotonically increasing revision next to the document. Writes
go through a temporary file and an atomic rename, and mutation is
serialized per key, so a crash never leaves a partial document visible.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote, unquote

from .model import AnnotationDocument, NarrativeTimeError
from .notation import parse_annotation_doc, serialize_annotation_doc


class StoreError(NarrativeTimeError):
    pass


class RevisionConflict(StoreError):
    def __init__(self, current: int, supplied: int):
        super().__init__(f"revision conflict: store has {current}, write supplied {supplied}")
        self.current = current
        self.supplied = supplied


@dataclass(frozen=True)
class StoreConfig:
    """Runtime configuration of the service."""

    root: Path
    listen: str = "127.0.0.1:8023"
    vague_horizon: int | None = 1
    ui_dir: Path | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Path(self.root))
        if self.ui_dir is not None:
            object.__setattr__(self, "ui_dir", Path(self.ui_dir))


@dataclass(frozen=True)
class StoreEntry:
    doc_id: str
    annotator_id: str
    revision: int
    n_events: int
    n_spans: int

    def to_jsonable(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "annotator_id": self.annotator_id,
            "revision": self.revision,
            "n_events": self.n_events,
            "n_spans": self.n_spans,
        }


class DocumentStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise StoreError(f"store root {self.root} does not exist")
        if not os.access(self.root, os.W_OK):
            raise StoreError(f"store root {self.root} is not writable")
        self._locks: dict[tuple[str, str], threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, key: tuple[str, str]) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def _path(self, doc_id: str, annotator_id: str) -> Path:
        return self.root / quote(doc_id, safe="") / (quote(annotator_id, safe="") + ".json")

    def list_entries(self) -> list[StoreEntry]:
        entries = []
        for doc_dir in sorted(p for p in self.root.iterdir() if p.is_dir()):
            for file in sorted(doc_dir.glob("*.json")):
                payload = json.loads(file.read_text("utf-8"))
                document = payload["document"]
                entries.append(
                    StoreEntry(
                        doc_id=unquote(doc_dir.name),
                        annotator_id=unquote(file.stem),
                        revision=payload["revision"],
                        n_events=len(document.get("events", [])),
                        n_spans=len(document.get("spans", [])),
                    )
                )
        return entries

    def annotators(self, doc_id: str) -> list[str]:
        doc_dir = self.root / quote(doc_id, safe="")
        if not doc_dir.is_dir():
            return []
        return sorted(unquote(f.stem) for f in doc_dir.glob("*.json"))

    def get(self, doc_id: str, annotator_id: str) -> tuple[int, AnnotationDocument]:
        path = self._path(doc_id, annotator_id)
        if not path.is_file():
            raise KeyError((doc_id, annotator_id))
        payload = json.loads(path.read_text("utf-8"))
        document = parse_annotation_doc(json.dumps(payload["document"]))
        return payload["revision"], document

    def put(
        self,
        document: AnnotationDocument,
        *,
        expected_revision: int | None = None,
    ) -> int:
        """Store a document; returns the new revision.

        With expected_revision set, the write succeeds only when it
        matches the stored revision (0 for a not-yet-existing document).
        """
        key = (document.doc_id, document.annotator_id)
        with self._lock(key):
            path = self._path(*key)
            current = 0
            if path.is_file():
                current = json.loads(path.read_text("utf-8"))["revision"]
            if expected_revision is not None and expected_revision != current:
                raise RevisionConflict(current, expected_revision)
            revision = current + 1
            payload = {
                "revision": revision,
                "document": json.loads(serialize_annotation_doc(document)),
            }
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(
                dir=path.parent, prefix=path.name, suffix=".tmp"
            )
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    json.dump(payload, handle, indent=2, ensure_ascii=False)
                    handle.write("\n")
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
            return revision
