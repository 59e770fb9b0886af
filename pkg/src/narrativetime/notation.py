"""Parsing and serialization of the annotation notation.

Two surfaces live here: the timeline-position mini-grammar typed into
the Tml column, and the JSON file format for whole annotation documents.

Position grammar::

    position := NUMBER ("-" NUMBER)? INDEX?
    NUMBER   := digits ("." digits)?
    INDEX    := one character from "%#@&*+=~"

Numbers are exact decimals starting at 1. "4-5" denotes an extent from
slot 4 through slot 5. A trailing index character marks one piece of a
discontinuous annotation; pieces sharing position and index character
are merged downstream. Canonical form strips trailing zeros, so "4.50"
and "4.5" name the same slot and reserialize as "4.5".

Every rejected input carries a stable diagnostic code; parsing never
yields a partial result.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    INDEX_CHARS,
    MAIN_TIMELINE,
    NARRATOR,
    AnnotationDocument,
    AnnotationSpan,
    BranchDirection,
    BranchRef,
    DocumentText,
    EventMention,
    NarrativeTimeError,
    POSITION_REQUIRED,
    SpanType,
    SpeechAttribution,
    SpeechSource,
    TimexMention,
    TmlPosition,
)


class TmlError(NarrativeTimeError):
    """A timeline-position string violates the grammar."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class DocumentError(NarrativeTimeError):
    """An annotation document violates the file format or its invariants."""

    def __init__(self, code: str, message: str, subjects: tuple[str, ...] = ()):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.subjects = subjects


_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")


def parse_rational(text: str) -> Fraction:
    """Parse a plain decimal number into an exact rational."""
    if not _NUMBER_RE.fullmatch(text):
        raise TmlError("MALFORMED_NUMBER", f"not a decimal number: {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    """Render a rational as its shortest decimal form.

    Only rationals whose denominator divides a power of ten are
    representable; anything else has no decimal spelling in the grammar.
    """
    value = Fraction(value)
    if value < 0:
        raise ValueError("positions are non-negative")
    rem = value.denominator
    twos = fives = 0
    while rem % 2 == 0:
        rem //= 2
        twos += 1
    while rem % 5 == 0:
        rem //= 5
        fives += 1
    if rem != 1:
        raise ValueError(f"{value} has no finite decimal form")
    places = max(twos, fives)
    if places == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**places // value.denominator
    digits = str(scaled).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:].rstrip("0")
    return f"{whole}.{frac}" if frac else whole


def parse_tml(raw: str) -> TmlPosition:
    """Parse a Tml column value into a position."""
    text = raw.strip()
    if not text:
        raise TmlError("EMPTY_TML", "position is empty")
    match = _NUMBER_RE.match(text)
    if not match:
        raise TmlError("MALFORMED_NUMBER", f"position must start with a number: {raw!r}")
    lo = Fraction(match.group())
    rest = text[match.end():]
    hi = lo
    if rest.startswith("-"):
        match = _NUMBER_RE.match(rest[1:])
        if not match:
            raise TmlError("MALFORMED_NUMBER", f"extent needs a number after '-': {raw!r}")
        hi = Fraction(match.group())
        rest = rest[1 + match.end():]
    index_char: str | None = None
    if rest:
        if len(rest) > 1:
            raise TmlError("MULTIPLE_INDEX_CHARS", f"at most one index character: {raw!r}")
        if rest not in INDEX_CHARS:
            raise TmlError(
                "INVALID_INDEX_CHAR", f"index character must be one of {INDEX_CHARS!r}: {raw!r}"
            )
        index_char = rest
    if lo < 1:
        raise TmlError("POSITION_BELOW_ONE", f"positions start at 1: {raw!r}")
    if hi < lo:
        raise TmlError("RANGE_REVERSED", f"extent runs backwards: {raw!r}")
    return TmlPosition(lo, hi, index_char)


def format_tml(position: TmlPosition) -> str:
    """Render a position in canonical form; parse_tml inverts this."""
    text = format_rational(position.lo)
    if position.hi != position.lo:
        text += "-" + format_rational(position.hi)
    if position.index_char:
        text += position.index_char
    return text


@dataclass(frozen=True)
class TmlToken:
    """A raw Tml string together with its parsed position."""

    raw: str
    parsed: TmlPosition

    @classmethod
    def from_raw(cls, raw: str) -> "TmlToken":
        return cls(raw, parse_tml(raw))

    @property
    def canonical(self) -> str:
        return format_tml(self.parsed)


# ---------------------------------------------------------------------------
# Annotation document JSON
# ---------------------------------------------------------------------------

_SPAN_CODES = {t.value: t for t in SpanType}


def _fail(code: str, message: str, *subjects: str):
    raise DocumentError(code, message, tuple(subjects))


def _require(obj, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        _fail("SCHEMA_ERROR", f"missing key {key!r} in {where}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        _fail("SCHEMA_ERROR", f"{where}.{key} has wrong type")
    return value


def _parse_ranges(raw, where: str, text_len: int) -> tuple[tuple[int, int], ...]:
    if not isinstance(raw, list) or not raw:
        _fail("SCHEMA_ERROR", f"{where} needs a non-empty list of ranges")
    out: list[tuple[int, int]] = []
    for item in raw:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            _fail("SCHEMA_ERROR", f"{where} ranges must be [start, end] integer pairs")
        start, end = item
        if start < 0 or end <= start:
            _fail("INVALID_RANGE", f"{where} has an empty or negative range [{start}, {end})", where)
        if end > text_len:
            _fail(
                "RANGE_OUT_OF_BOUNDS",
                f"{where} range [{start}, {end}) exceeds text length {text_len}",
                where,
            )
        out.append((start, end))
    for (s1, e1), (s2, _) in zip(out, out[1:]):
        if s2 < e1:
            _fail("OVERLAPPING_RANGES", f"{where} ranges overlap or are unsorted", where)
    return tuple(out)


def _parse_speech(raw, where: str) -> SpeechAttribution:
    if raw == "narrator":
        return NARRATOR
    if raw == "implicit":
        return SpeechAttribution(SpeechSource.IMPLICIT)
    if isinstance(raw, dict) and set(raw) == {"character"}:
        name = raw["character"]
        if isinstance(name, str) and name:
            return SpeechAttribution.for_character(name)
    _fail("SCHEMA_ERROR", f"{where}.speech must be 'narrator', 'implicit' or {{'character': name}}")


def _parse_rel_to(raw, where: str) -> BranchRef:
    branch = _require(raw, "branch", str, where)
    if not branch or branch == MAIN_TIMELINE:
        _fail("SCHEMA_ERROR", f"{where}.rel_to.branch must be a non-empty branch name")
    direction = _require(raw, "dir", str, where)
    if direction not in ("before", "after"):
        _fail("SCHEMA_ERROR", f"{where}.rel_to.dir must be 'before' or 'after'")
    anchor_raw = _require(raw, "anchor", str, where)
    try:
        anchor = parse_rational(anchor_raw)
    except TmlError as err:
        raise DocumentError(err.code, f"{where}.rel_to.anchor: {err.message}", (where,)) from err
    return BranchRef(branch, BranchDirection(direction), anchor)


def parse_annotation_doc(data: bytes | str) -> AnnotationDocument:
    """Parse and fully validate an annotation document from JSON bytes.

    Rejection is total: any violation raises DocumentError (or TmlError
    wrapped into one) with a stable code, never a partial document. The
    returned document is canonical: events, timexes and spans are sorted
    by first offset, then id.
    """
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
        _fail("SCHEMA_ERROR", "top level must be an object")

    doc_id = _require(obj, "doc_id", str, "document")
    annotator = _require(obj, "annotator_id", str, "document")
    text = _require(obj, "text", str, "document")
    if not text:
        _fail("EMPTY_TEXT", "document text must be non-empty")
    if not doc_id:
        _fail("SCHEMA_ERROR", "doc_id must be non-empty")

    events = _parse_events(_require(obj, "events", list, "document"), text)
    timexes = _parse_timexes(_require(obj, "timexes", list, "document"), text)
    spans = _parse_spans(_require(obj, "spans", list, "document"), text)

    return AnnotationDocument(
        doc=DocumentText(doc_id, text),
        events=events,
        timexes=timexes,
        spans=spans,
        annotator_id=annotator,
    )


def _parse_events(raw: list, text: str) -> tuple[EventMention, ...]:
    events = []
    seen: set[str] = set()
    for item in raw:
        event_id = _require(item, "id", str, "event")
        if event_id in seen:
            _fail("DUPLICATE_ID", f"duplicate event id {event_id!r}", event_id)
        seen.add(event_id)
        ranges = _parse_ranges(item.get("ranges"), f"event {event_id}", len(text))
        events.append(EventMention.extract(event_id, ranges, text))
    events.sort(key=lambda e: (e.first_start, e.event_id))
    _check_event_overlap(events)
    return tuple(events)


def _check_event_overlap(events: list[EventMention]) -> None:
    flat = sorted(
        (rng, event.event_id) for event in events for rng in event.ranges
    )
    for ((_, end1), id1), ((start2, _), id2) in zip(flat, flat[1:]):
        if start2 < end1:
            _fail(
                "OVERLAPPING_EVENTS",
                f"events {id1!r} and {id2!r} overlap in the text",
                id1,
                id2,
            )


def _parse_timexes(raw: list, text: str) -> tuple[TimexMention, ...]:
    timexes = []
    seen: set[str] = set()
    for item in raw:
        timex_id = _require(item, "id", str, "timex")
        if timex_id in seen:
            _fail("DUPLICATE_ID", f"duplicate timex id {timex_id!r}", timex_id)
        seen.add(timex_id)
        rng = item.get("range")
        ranges = _parse_ranges([rng] if rng is not None else None, f"timex {timex_id}", len(text))
        timexes.append(TimexMention.extract(timex_id, ranges[0], text))
    timexes.sort(key=lambda t: (t.range[0], t.timex_id))
    return tuple(timexes)


def _parse_spans(raw: list, text: str) -> tuple[AnnotationSpan, ...]:
    spans = []
    seen: set[str] = set()
    for item in raw:
        span_id = _require(item, "id", str, "span")
        if span_id in seen:
            _fail("DUPLICATE_ID", f"duplicate span id {span_id!r}", span_id)
        seen.add(span_id)
        where = f"span {span_id}"
        ranges = _parse_ranges(item.get("ranges"), where, len(text))
        type_code = _require(item, "type", str, where)
        span_type = _SPAN_CODES.get(type_code)
        if span_type is None:
            _fail("UNKNOWN_SPAN_TYPE", f"{where} has unknown type {type_code!r}", span_id)
        tml = None
        if "tml" in item and item["tml"] is not None:
            tml_raw = item["tml"]
            if not isinstance(tml_raw, str):
                _fail("SCHEMA_ERROR", f"{where}.tml must be a string")
            if span_type is SpanType.IRREALIS:
                _fail(
                    "IRREALIS_HAS_POSITION",
                    f"{where} is irrealis but carries position {tml_raw!r}",
                    span_id,
                )
            try:
                tml = parse_tml(tml_raw)
            except TmlError as err:
                raise DocumentError(err.code, f"{where}.tml: {err.message}", (span_id,)) from err
        elif span_type in POSITION_REQUIRED:
            _fail(
                "MISSING_POSITION",
                f"{where} of type {type_code} needs a timeline position",
                span_id,
            )
        rel_to = None
        if "rel_to" in item and item["rel_to"] is not None:
            rel_to = _parse_rel_to(item["rel_to"], where)
        speech = NARRATOR
        if "speech" in item:
            speech = _parse_speech(item["speech"], where)
        spans.append(
            AnnotationSpan(
                span_id=span_id,
                ranges=ranges,
                span_type=span_type,
                tml=tml,
                rel_to=rel_to,
                speech=speech,
            )
        )
    spans.sort(key=lambda s: (s.first_start, s.span_id))
    return tuple(spans)


def _speech_to_jsonable(speech: SpeechAttribution):
    if speech.source is SpeechSource.NARRATOR:
        return "narrator"
    if speech.source is SpeechSource.IMPLICIT:
        return "implicit"
    return {"character": speech.character}


def _span_to_jsonable(span: AnnotationSpan) -> dict:
    out: dict = {
        "id": span.span_id,
        "ranges": [list(r) for r in span.ranges],
        "type": span.span_type.value,
    }
    if span.tml is not None:
        out["tml"] = format_tml(span.tml)
    if span.rel_to is not None:
        out["rel_to"] = {
            "branch": span.rel_to.branch_id,
            "dir": span.rel_to.direction.value,
            "anchor": format_rational(span.rel_to.anchor),
        }
    out["speech"] = _speech_to_jsonable(span.speech)
    return out


def document_to_jsonable(doc: AnnotationDocument) -> dict:
    """Project a document onto the JSON schema with canonical ordering."""
    return {
        "doc_id": doc.doc_id,
        "annotator_id": doc.annotator_id,
        "text": doc.text,
        "events": [
            {"id": e.event_id, "ranges": [list(r) for r in e.ranges]}
            for e in sorted(doc.events, key=lambda e: (e.first_start, e.event_id))
        ],
        "timexes": [
            {"id": t.timex_id, "range": list(t.range)}
            for t in sorted(doc.timexes, key=lambda t: (t.range[0], t.timex_id))
        ],
        "spans": [
            _span_to_jsonable(s)
            for s in sorted(doc.spans, key=lambda s: (s.first_start, s.span_id))
        ],
    }


def serialize_annotation_doc(doc: AnnotationDocument) -> bytes:
    """Serialize deterministically; parse_annotation_doc inverts this."""
    payload = json.dumps(document_to_jsonable(doc), indent=2, ensure_ascii=False)
    return (payload + "\n").encode("utf-8")
