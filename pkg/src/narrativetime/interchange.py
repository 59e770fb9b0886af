"""Import of pre-marked mentions and TimeML-style XML interchange.

Export is standoff: elements carry character offsets into the untouched
source text, so discontinuous spans need no nested markup. WHILE maps
to the TimeML relType SIMULTANEOUS and back; no other relabeling is
applied. Output bytes are deterministic for identical inputs.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.parsers.expat import ExpatError

from .model import (
    AnnotationDocument,
    DocumentText,
    EventMention,
    NarrativeTimeError,
    Relation,
    SpeechSource,
    TLink,
    TimexMention,
)
from .notation import DocumentError, _parse_events, _parse_timexes, _require
from .timeline import Diagnostic, Severity, _merge_spans, _project
from .inference import TLinkGraph

_RELTYPE_OUT = {
    Relation.BEFORE: "BEFORE",
    Relation.AFTER: "AFTER",
    Relation.WHILE: "SIMULTANEOUS",
    Relation.VAGUE: "VAGUE",
    Relation.IS_INCLUDED: "IS_INCLUDED",
}
_RELTYPE_IN = {v: k for k, v in _RELTYPE_OUT.items()}


@dataclass(frozen=True)
class PremarkBundle:
    """A document with its pre-marked events and timexes, ready to be
    annotated."""

    doc_id: str
    text: str
    events: tuple[EventMention, ...]
    timexes: tuple[TimexMention, ...]

    def to_document(self, annotator_id: str) -> AnnotationDocument:
        return AnnotationDocument(
            doc=DocumentText(self.doc_id, self.text),
            events=self.events,
            timexes=self.timexes,
            spans=(),
            annotator_id=annotator_id,
        )


def import_premarked(data: bytes | str) -> tuple[PremarkBundle, list[Diagnostic]]:
    """Read a premark JSON file (the annotation schema minus spans)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise DocumentError("BAD_JSON", f"not valid UTF-8: {err}") from err
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as err:
        raise DocumentError("BAD_JSON", f"malformed JSON: {err}") from err
    if not isinstance(obj, dict):
        raise DocumentError("SCHEMA_ERROR", "top level must be an object")
    doc_id = _require(obj, "doc_id", str, "bundle")
    text = _require(obj, "text", str, "bundle")
    if not text:
        raise DocumentError("EMPTY_TEXT", "bundle text must be non-empty")
    events = _parse_events(_require(obj, "events", list, "bundle"), text)
    timexes = _parse_timexes(obj.get("timexes", []) or [], text)
    warnings: list[Diagnostic] = []
    if not events:
        warnings.append(
            Diagnostic("NO_EVENTS", Severity.WARNING, (doc_id,), "bundle has no events")
        )
    return PremarkBundle(doc_id, text, events, timexes), warnings


def _offsets_attr(ranges: tuple[tuple[int, int], ...]) -> str:
    return ";".join(f"{start} {end}" for start, end in ranges)


def _parse_offsets(raw: str, where: str) -> tuple[tuple[int, int], ...]:
    ranges = []
    for piece in raw.split(";"):
        parts = piece.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise DocumentError("SCHEMA_ERROR", f"bad offsets {raw!r} on {where}")
        ranges.append((int(parts[0]), int(parts[1])))
    return tuple(ranges)


def _speech_attr(record) -> str:
    if record.speech.source is SpeechSource.CHARACTER:
        return f"character:{record.speech.character}"
    return record.speech.source.value


def export_timeml(doc: AnnotationDocument, graph: TLinkGraph) -> bytes:
    """Serialize a document and its derived graph as standoff XML.

    Events are ordered by offset, links by canonical pair key; repeated
    calls yield byte-identical output.
    """
    if graph.doc_id != doc.doc_id:
        raise NarrativeTimeError(
            f"graph belongs to {graph.doc_id!r}, not {doc.doc_id!r}"
        )
    known = {e.event_id for e in doc.events}
    missing = [i for i in graph.event_ids if i not in known]
    if missing:
        raise NarrativeTimeError(f"graph references unknown events: {missing}")

    logicals, merge_diags = _merge_spans(doc.spans)
    if merge_diags:
        raise NarrativeTimeError("cannot export a document with merge conflicts")
    records, _, _ = _project(doc, logicals)
    by_event = {record.event_id: record for record in records}

    root = ET.Element("TimeML")
    root.set("docID", doc.doc_id)
    root.set("annotator", doc.annotator_id)
    text_el = ET.SubElement(root, "TEXT")
    text_el.text = doc.text

    for event in sorted(doc.events, key=lambda e: (e.first_start, e.event_id)):
        attrs = {"eid": event.event_id, "offsets": _offsets_attr(event.ranges)}
        record = by_event.get(event.event_id)
        if record is not None:
            attrs["class"] = record.etype.value
            if record.generic:
                attrs["generic"] = "true"
            attrs["speech"] = _speech_attr(record)
        ET.SubElement(root, "EVENT", attrs)

    for timex in sorted(doc.timexes, key=lambda t: (t.range[0], t.timex_id)):
        ET.SubElement(
            root, "TIMEX3", {"tid": timex.timex_id, "offsets": _offsets_attr((timex.range,))}
        )

    lid = 0
    for key in sorted(graph.labels):
        link = graph.labels[key]
        lid += 1
        ET.SubElement(
            root,
            "TLINK",
            {
                "lid": f"l{lid}",
                "eventID": link.source_id,
                "relatedToEvent": link.target_id,
                "relType": _RELTYPE_OUT[link.relation],
                "rule": link.provenance,
            },
        )
    for link in sorted(graph.timex_links, key=lambda l: (l.source_id, l.target_id)):
        lid += 1
        ET.SubElement(
            root,
            "TLINK",
            {
                "lid": f"l{lid}",
                "eventID": link.source_id,
                "relatedToTime": link.target_id,
                "relType": _RELTYPE_OUT[link.relation],
                "rule": link.provenance,
            },
        )

    ET.indent(root)
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


@dataclass(frozen=True)
class TimemlImport:
    """The standoff content read back from exported XML."""

    doc_id: str
    events: tuple[tuple[str, tuple[tuple[int, int], ...], str | None], ...]
    timexes: tuple[tuple[str, tuple[int, int]], ...]
    tlinks: tuple[TLink, ...]


def import_timeml(data: bytes | str) -> TimemlImport:
    """Parse exported XML back into events, timexes and links."""
    try:
        root = ET.fromstring(data)
    except (ET.ParseError, ExpatError) as err:
        raise DocumentError("BAD_XML", f"malformed XML: {err}") from err
    if root.tag != "TimeML":
        raise DocumentError("SCHEMA_ERROR", f"unexpected root element {root.tag!r}")

    events = []
    event_ids = set()
    for el in root.iter("EVENT"):
        eid = el.get("eid")
        offsets = el.get("offsets")
        if not eid or not offsets:
            raise DocumentError("SCHEMA_ERROR", "EVENT needs eid and offsets")
        if eid in event_ids:
            raise DocumentError("DUPLICATE_ID", f"duplicate event id {eid!r}", (eid,))
        event_ids.add(eid)
        events.append((eid, _parse_offsets(offsets, f"EVENT {eid}"), el.get("class")))

    timexes = []
    timex_ids = set()
    for el in root.iter("TIMEX3"):
        tid = el.get("tid")
        offsets = el.get("offsets")
        if not tid or not offsets:
            raise DocumentError("SCHEMA_ERROR", "TIMEX3 needs tid and offsets")
        if tid in timex_ids:
            raise DocumentError("DUPLICATE_ID", f"duplicate timex id {tid!r}", (tid,))
        timex_ids.add(tid)
        ranges = _parse_offsets(offsets, f"TIMEX3 {tid}")
        timexes.append((tid, ranges[0]))

    tlinks = []
    for el in root.iter("TLINK"):
        reltype = el.get("relType", "")
        relation = _RELTYPE_IN.get(reltype)
        if relation is None:
            raise DocumentError(
                "UNKNOWN_RELTYPE", f"relType {reltype!r} is not in the vocabulary"
            )
        source = el.get("eventID")
        if not source or source not in event_ids:
            raise DocumentError(
                "DANGLING_REF", f"TLINK references unknown event {source!r}"
            )
        target_event = el.get("relatedToEvent")
        target_time = el.get("relatedToTime")
        if target_event is not None:
            if target_event not in event_ids:
                raise DocumentError(
                    "DANGLING_REF", f"TLINK references unknown event {target_event!r}"
                )
            target = target_event
        elif target_time is not None:
            if target_time not in timex_ids:
                raise DocumentError(
                    "DANGLING_REF", f"TLINK references unknown timex {target_time!r}"
                )
            target = target_time
        else:
            raise DocumentError("SCHEMA_ERROR", "TLINK needs a related element")
        tlinks.append(TLink(source, target, relation, el.get("rule", "")))

    return TimemlImport(
        doc_id=root.get("docID", ""),
        events=tuple(events),
        timexes=tuple(timexes),
        tlinks=tuple(tlinks),
    )
