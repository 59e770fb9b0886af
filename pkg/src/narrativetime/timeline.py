"""From raw spans to per-event timeline records.

Spans are first merged: pieces that share a timeline, a position and an
index character are one discontinuous logical annotation. Each
pre-marked event wholly inside a logical annotation then inherits its
type and timeline coordinate; members of a sequence cluster additionally
receive an ordinal. The validator runs the same machinery and reports
every problem as a coded diagnostic instead of stopping at the first.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .model import (
    MAIN_TIMELINE,
    AnnotationDocument,
    AnnotationSpan,
    BranchRef,
    NarrativeTimeError,
    SpanType,
    SpeechAttribution,
    POSITION_REQUIRED,
    TmlPosition,
)


class Severity(Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    subjects: tuple[str, ...]
    message: str

    def to_jsonable(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "subjects": list(self.subjects),
            "message": self.message,
        }


def _error(code: str, message: str, *subjects: str) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, tuple(subjects), message)


def _warning(code: str, message: str, *subjects: str) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, tuple(subjects), message)


class AnnotationError(NarrativeTimeError):
    """Raised when an operation requires a clean annotation but the
    document carries ERROR-level diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        summary = "; ".join(f"{d.code}({', '.join(d.subjects)})" for d in diagnostics)
        super().__init__(f"annotation has errors: {summary}")


class BoundKind(Enum):
    CLOSED = "closed"
    FUZZY = "fuzzy"


@dataclass(frozen=True)
class TimelineCoordinate:
    """Where an event sits: a timeline, a slot interval, an optional
    ordinal within a sequence cluster, and the nature of each side.

    A fuzzy side means the event extends an underspecified distance in
    that direction beyond its slot.
    """

    timeline_id: str
    slot_lo: Fraction
    slot_hi: Fraction
    seq_index: int | None = None
    left_kind: BoundKind = BoundKind.CLOSED
    right_kind: BoundKind = BoundKind.CLOSED

    def __post_init__(self) -> None:
        object.__setattr__(self, "slot_lo", Fraction(self.slot_lo))
        object.__setattr__(self, "slot_hi", Fraction(self.slot_hi))
        if self.slot_hi < self.slot_lo:
            raise ValueError("slot interval runs backwards")


@dataclass(frozen=True)
class EventRecord:
    """Per-event normalized projection of one logical annotation.

    Sequence members keep their cluster's slot interval and are ordered
    by seq_index; etype never contains SEQUENCE. Generic records (states
    holding throughout the narrative) and irrealis records carry no
    coordinate. span_id names the logical annotation the record came
    from; doc_id and branch ride along for relation computation.
    """

    event_id: str
    etype: SpanType
    coord: TimelineCoordinate | None
    generic: bool
    speech: SpeechAttribution
    span_id: str
    doc_id: str = ""
    branch: BranchRef | None = None

    def __post_init__(self) -> None:
        if self.etype is SpanType.SEQUENCE:
            raise ValueError("sequence membership is positional; records use BOUNDED")
        if self.etype is SpanType.IRREALIS and self.coord is not None:
            raise ValueError("irrealis records carry no coordinate")
        if self.generic and (self.etype is not SpanType.UNBOUNDED or self.coord is not None):
            raise ValueError("generic records are unbounded and carry no coordinate")
        if not self.generic and self.etype is not SpanType.IRREALIS and self.coord is None:
            raise ValueError("positioned records need a coordinate")


@dataclass(frozen=True)
class LogicalAnnotation:
    """An annotation after discontinuous pieces are merged.

    n_pieces counts the text pieces the annotator drew; ranges is their
    coalesced union.
    """

    logical_id: str
    span_ids: tuple[str, ...]
    ranges: tuple[tuple[int, int], ...]
    span_type: SpanType
    tml: TmlPosition | None
    rel_to: BranchRef | None
    speech: SpeechAttribution
    n_pieces: int

    @property
    def first_start(self) -> int:
        return self.ranges[0][0]

    @property
    def timeline_id(self) -> str:
        return self.rel_to.branch_id if self.rel_to else MAIN_TIMELINE


def _union_ranges(ranges: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    merged: list[list[int]] = []
    for start, end in sorted(ranges):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return tuple((s, e) for s, e in merged)


def _merge_spans(
    spans: tuple[AnnotationSpan, ...] | list[AnnotationSpan],
) -> tuple[list[LogicalAnnotation], list[Diagnostic]]:
    diagnostics: list[Diagnostic] = []
    groups: dict[tuple, list[AnnotationSpan]] = {}
    for span in spans:
        if span.tml is not None and span.tml.index_char is not None:
            key = (span.timeline_id, span.tml.lo, span.tml.hi, span.tml.index_char)
        else:
            key = ("", span.span_id)  # unshared: every span its own annotation
        groups.setdefault(key, []).append(span)

    logicals: list[LogicalAnnotation] = []
    for members in groups.values():
        members.sort(key=lambda s: (s.first_start, s.span_id))
        head = members[0]
        mismatched = [
            s
            for s in members[1:]
            if s.span_type is not head.span_type
            or s.rel_to != head.rel_to
            or s.speech != head.speech
        ]
        if mismatched:
            diagnostics.append(
                _error(
                    "MERGE_TYPE_MISMATCH",
                    "discontinuous pieces disagree on type, branch or speech",
                    *(s.span_id for s in members),
                )
            )
            continue
        logicals.append(
            LogicalAnnotation(
                logical_id=head.span_id,
                span_ids=tuple(s.span_id for s in members),
                ranges=_union_ranges([r for s in members for r in s.ranges]),
                span_type=head.span_type,
                tml=head.tml,
                rel_to=head.rel_to,
                speech=head.speech,
                n_pieces=sum(len(s.ranges) for s in members),
            )
        )
    logicals.sort(key=lambda a: (a.first_start, a.logical_id))
    return logicals, diagnostics


def merge_discontinuous(spans) -> list[LogicalAnnotation]:
    """Merge discontinuous pieces into logical annotations.

    Spans sharing (timeline, position, index character) become one
    annotation whose ranges are the union of the pieces; spans sharing a
    position without index characters stay distinct and will later be
    related as roughly simultaneous.
    """
    logicals, diagnostics = _merge_spans(spans)
    if diagnostics:
        raise AnnotationError(diagnostics)
    return logicals


def _contains(outer: tuple[tuple[int, int], ...], inner: tuple[tuple[int, int], ...]) -> bool:
    return all(
        any(o_start <= start and end <= o_end for o_start, o_end in outer)
        for start, end in inner
    )


def _touches(a: tuple[tuple[int, int], ...], b: tuple[tuple[int, int], ...]) -> bool:
    return any(
        s1 < e2 and s2 < e1 for s1, e1 in a for s2, e2 in b
    )


_KINDS = {
    SpanType.BOUNDED: (BoundKind.CLOSED, BoundKind.CLOSED),
    SpanType.SEQUENCE: (BoundKind.CLOSED, BoundKind.CLOSED),
    SpanType.UNBOUNDED: (BoundKind.FUZZY, BoundKind.FUZZY),
    SpanType.LEFT_BOUNDED: (BoundKind.CLOSED, BoundKind.FUZZY),
    SpanType.RIGHT_BOUNDED: (BoundKind.FUZZY, BoundKind.CLOSED),
}


def _project(
    doc: AnnotationDocument, logicals: list[LogicalAnnotation]
) -> tuple[list[EventRecord], list[str], list[Diagnostic]]:
    diagnostics: list[Diagnostic] = []
    uncovered: list[str] = []
    assignment: dict[str, LogicalAnnotation] = {}

    for event in doc.events:
        covering = [la for la in logicals if _contains(la.ranges, event.ranges)]
        covering_ids = {la.logical_id for la in covering}
        partial = [
            la
            for la in logicals
            if la.logical_id not in covering_ids and _touches(la.ranges, event.ranges)
        ]
        if len(covering) > 1:
            diagnostics.append(
                _error(
                    "EVENT_IN_MULTIPLE_SPANS",
                    f"event {event.event_id!r} lies wholly inside several annotations",
                    event.event_id,
                    *sorted(covering_ids),
                )
            )
            continue
        for la in partial:
            diagnostics.append(
                _error(
                    "EVENT_PARTIALLY_COVERED",
                    f"event {event.event_id!r} straddles the boundary of {la.logical_id!r}",
                    event.event_id,
                    la.logical_id,
                )
            )
        if partial:
            continue
        if not covering:
            uncovered.append(event.event_id)
            continue
        assignment[event.event_id] = covering[0]

    members: dict[str, list[str]] = {}
    for event in doc.events:  # document order = textual order
        la = assignment.get(event.event_id)
        if la is not None:
            members.setdefault(la.logical_id, []).append(event.event_id)

    records: list[EventRecord] = []
    by_id = {la.logical_id: la for la in logicals}
    for logical_id, event_ids in members.items():
        la = by_id[logical_id]
        records.extend(_records_for(doc.doc_id, la, event_ids))
    records.sort(key=lambda r: r.event_id)
    return records, uncovered, diagnostics


def _records_for(
    doc_id: str, la: LogicalAnnotation, event_ids: list[str]
) -> list[EventRecord]:
    etype = SpanType.BOUNDED if la.span_type is SpanType.SEQUENCE else la.span_type
    generic = la.span_type is SpanType.UNBOUNDED and la.tml is None
    records = []
    for ordinal, event_id in enumerate(event_ids, start=1):
        coord = None
        if la.tml is not None:
            seq = (
                ordinal
                if la.span_type is SpanType.SEQUENCE and len(event_ids) > 1
                else None
            )
            left, right = _KINDS[la.span_type]
            coord = TimelineCoordinate(
                timeline_id=la.timeline_id,
                slot_lo=la.tml.lo,
                slot_hi=la.tml.hi,
                seq_index=seq,
                left_kind=left,
                right_kind=right,
            )
        records.append(
            EventRecord(
                event_id=event_id,
                etype=etype,
                coord=coord,
                generic=generic,
                speech=la.speech,
                span_id=la.logical_id,
                doc_id=doc_id,
                branch=la.rel_to,
            )
        )
    return records


def project_events(doc: AnnotationDocument) -> tuple[list[EventRecord], list[str]]:
    """Project spans onto per-event records.

    Returns the records for covered events plus the ids of events no
    annotation covers; any coverage conflict raises AnnotationError.
    """
    logicals = merge_discontinuous(doc.spans)
    records, uncovered, diagnostics = _project(doc, logicals)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        raise AnnotationError(errors)
    return records, uncovered


def _span_level_diagnostics(doc: AnnotationDocument) -> list[Diagnostic]:
    diagnostics = []
    for span in doc.spans:
        if span.span_type is SpanType.IRREALIS and span.tml is not None:
            diagnostics.append(
                _error(
                    "IRREALIS_HAS_POSITION",
                    f"irrealis span {span.span_id!r} carries a timeline position",
                    span.span_id,
                )
            )
        if span.span_type in POSITION_REQUIRED and span.tml is None:
            diagnostics.append(
                _error(
                    "MISSING_POSITION",
                    f"span {span.span_id!r} of type {span.span_type.value} needs a position",
                    span.span_id,
                )
            )
        if span.rel_to is not None and span.rel_to.anchor < 1:
            diagnostics.append(
                _error(
                    "BRANCH_ANCHOR_INVALID",
                    f"branch {span.rel_to.branch_id!r} anchors below slot 1",
                    span.span_id,
                )
            )
    return diagnostics


def _branch_diagnostics(
    logicals: list[LogicalAnnotation],
) -> list[Diagnostic]:
    diagnostics = []
    branches: dict[str, list[LogicalAnnotation]] = {}
    for la in logicals:
        if la.rel_to is not None:
            branches.setdefault(la.rel_to.branch_id, []).append(la)

    main_intervals = [
        (la.tml.lo, la.tml.hi)
        for la in logicals
        if la.rel_to is None and la.tml is not None
    ]

    for branch_id, members in sorted(branches.items()):
        definitions = {(la.rel_to.direction, la.rel_to.anchor) for la in members}
        if len(definitions) > 1:
            diagnostics.append(
                _error(
                    "DANGLING_BRANCH",
                    f"branch {branch_id!r} has conflicting direction/anchor definitions",
                    branch_id,
                )
            )
            continue
        if not any(la.tml is not None for la in members):
            diagnostics.append(
                _error(
                    "DANGLING_BRANCH",
                    f"branch {branch_id!r} has no positioned annotations",
                    branch_id,
                )
            )
            continue
        anchor = members[0].rel_to.anchor
        if anchor >= 1 and not any(lo <= anchor <= hi for lo, hi in main_intervals):
            diagnostics.append(
                _warning(
                    "ANCHOR_UNOCCUPIED",
                    f"branch {branch_id!r} anchors at unoccupied main slot {anchor}",
                    branch_id,
                )
            )
    return diagnostics


def validate(doc: AnnotationDocument) -> list[Diagnostic]:
    """Collect every diagnostic for a parsed document.

    The document derives cleanly downstream exactly when no ERROR
    severity diagnostic is returned.
    """
    diagnostics = _span_level_diagnostics(doc)
    logicals, merge_diags = _merge_spans(doc.spans)
    diagnostics.extend(merge_diags)
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return diagnostics

    records, uncovered, project_diags = _project(doc, logicals)
    diagnostics.extend(project_diags)
    for event_id in uncovered:
        diagnostics.append(
            _warning(
                "UNCOVERED_EVENT",
                f"event {event_id!r} is not covered by any annotation",
                event_id,
            )
        )

    covered_by: dict[str, int] = {la.logical_id: 0 for la in logicals}
    for record in records:
        covered_by[record.span_id] = covered_by.get(record.span_id, 0) + 1
    for la in logicals:
        timex_inside = any(
            _contains(la.ranges, (t.range,)) for t in doc.timexes
        )
        if covered_by.get(la.logical_id, 0) == 0 and not timex_inside:
            diagnostics.append(
                _warning(
                    "EMPTY_SPAN",
                    f"annotation {la.logical_id!r} contains no event and no timex",
                    la.logical_id,
                )
            )

    diagnostics.extend(_branch_diagnostics(logicals))
    return diagnostics


def occupied_slots(records: list[EventRecord], timeline_id: str) -> list[Fraction]:
    """Sorted distinct slot positions with coordinate-bearing records."""
    slots = {
        record.coord.slot_lo
        for record in records
        if record.coord is not None and record.coord.timeline_id == timeline_id
    }
    return sorted(slots)
