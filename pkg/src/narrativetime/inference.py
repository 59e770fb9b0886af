"""Dense temporal-link derivation over projected event records.

Every unordered pair of covered events receives exactly one label from
{BEFORE, AFTER, WHILE, VAGUE}. The decision cascade, first match wins:

1. either record is generic            -> WHILE (states hold throughout
   the narrative, branches included)
2. either record is irrealis           -> VAGUE
3. main timeline vs branch             -> branch events precede (follow)
   every main event at or past (before) the attachment anchor; VAGUE
   toward the opposite side of the anchor
4. two distinct branches               -> VAGUE
5. same sequence cluster               -> BEFORE/AFTER by cluster ordinal
6. overlapping slot intervals          -> WHILE
7. disjoint intervals                  -> BEFORE/AFTER by slot order,
   upgraded to VAGUE when the earlier record's right side or the later
   record's left side is fuzzy and the two sit within `vague_horizon`
   occupied slots of one another

Each emitted link carries the identifier of the rule that produced it.
The consistency checker composes BEFORE/AFTER/WHILE labels through a
point-style table; WHILE links whose provenance marks them as mere
interval overlap ("generic-overlap", "interval-overlap") assert
co-occurrence rather than co-location and compose like VAGUE.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .model import (
    AnnotationDocument,
    BranchDirection,
    NarrativeTimeError,
    Relation,
    SpanType,
    TLink,
    TimexMention,
    invert,
)
from .timeline import (
    AnnotationError,
    BoundKind,
    Diagnostic,
    EventRecord,
    LogicalAnnotation,
    Severity,
    _contains,
    _merge_spans,
    _project,
    occupied_slots,
    validate,
)

RULE_GENERIC = "generic-overlap"
RULE_IRREALIS = "irrealis-vague"
RULE_BRANCH_ORDER = "branch-order"
RULE_BRANCH_VAGUE = "branch-vague"
RULE_CROSS_BRANCH = "cross-branch-vague"
RULE_SEQUENCE = "sequence-order"
RULE_SIMULTANEOUS = "simultaneous"
RULE_OVERLAP = "interval-overlap"
RULE_SLOT_ORDER = "slot-order"
RULE_FUZZY_NEIGHBOR = "fuzzy-neighbor-vague"
RULE_TIMEX = "timex-container"

# WHILE links produced by these rules assert overlap, not co-location,
# and are exempt from point-style composition.
OVERLAP_WHILE_RULES = frozenset({RULE_GENERIC, RULE_OVERLAP})


class SlotIndex:
    """Occupied slots per timeline, for nearest-neighbour queries."""

    def __init__(self, records: list[EventRecord]):
        timelines: set[str] = {
            r.coord.timeline_id for r in records if r.coord is not None
        }
        self._slots: dict[str, list[Fraction]] = {
            tl: occupied_slots(records, tl) for tl in timelines
        }

    def slots(self, timeline_id: str) -> list[Fraction]:
        return self._slots.get(timeline_id, [])

    def within_after(
        self, timeline_id: str, slot: Fraction, target: Fraction, horizon: int | None
    ) -> bool:
        """True when `target` is among the next `horizon` occupied slots
        strictly after `slot`; horizon None means unbounded."""
        if horizon is None:
            return target > slot
        slots = self.slots(timeline_id)
        start = bisect_right(slots, slot)
        return target in slots[start : start + horizon]

    def within_before(
        self, timeline_id: str, slot: Fraction, target: Fraction, horizon: int | None
    ) -> bool:
        if horizon is None:
            return target < slot
        slots = self.slots(timeline_id)
        end = bisect_left(slots, slot)
        return target in slots[max(0, end - horizon) : end]


def _relate(
    a: EventRecord,
    b: EventRecord,
    slots: SlotIndex,
    vague_horizon: int | None,
) -> tuple[Relation, str]:
    if a.doc_id != b.doc_id:
        raise NarrativeTimeError(
            f"records come from different documents: {a.doc_id!r} vs {b.doc_id!r}"
        )
    if a.generic or b.generic:
        return Relation.WHILE, RULE_GENERIC
    if a.etype is SpanType.IRREALIS or b.etype is SpanType.IRREALIS:
        return Relation.VAGUE, RULE_IRREALIS

    ca, cb = a.coord, b.coord
    assert ca is not None and cb is not None
    if ca.timeline_id != cb.timeline_id:
        if a.branch is not None and b.branch is not None:
            return Relation.VAGUE, RULE_CROSS_BRANCH
        if a.branch is not None:
            return _relate_branch_to_main(a, cb)
        relation, rule = _relate_branch_to_main(b, ca)
        return invert(relation), rule

    # Same timeline from here on.
    if (
        ca.seq_index is not None
        and cb.seq_index is not None
        and a.span_id == b.span_id
    ):
        if ca.seq_index < cb.seq_index:
            return Relation.BEFORE, RULE_SEQUENCE
        return Relation.AFTER, RULE_SEQUENCE

    if ca.slot_lo <= cb.slot_hi and cb.slot_lo <= ca.slot_hi:
        co_located = (
            (ca.slot_lo, ca.slot_hi) == (cb.slot_lo, cb.slot_hi)
            and ca.seq_index is None
            and cb.seq_index is None
        )
        return Relation.WHILE, (RULE_SIMULTANEOUS if co_located else RULE_OVERLAP)

    if ca.slot_hi < cb.slot_lo:
        earlier, later, relation = ca, cb, Relation.BEFORE
    else:
        earlier, later, relation = cb, ca, Relation.AFTER
    fuzzy_gap = (
        earlier.right_kind is BoundKind.FUZZY
        and slots.within_after(
            earlier.timeline_id, earlier.slot_lo, later.slot_lo, vague_horizon
        )
    ) or (
        later.left_kind is BoundKind.FUZZY
        and slots.within_before(
            later.timeline_id, later.slot_lo, earlier.slot_lo, vague_horizon
        )
    )
    if fuzzy_gap:
        return Relation.VAGUE, RULE_FUZZY_NEIGHBOR
    return relation, RULE_SLOT_ORDER


def _relate_branch_to_main(branch_rec: EventRecord, main_coord) -> tuple[Relation, str]:
    ref = branch_rec.branch
    assert ref is not None
    if ref.direction is BranchDirection.BEFORE:
        if main_coord.slot_lo >= ref.anchor:
            return Relation.BEFORE, RULE_BRANCH_ORDER
        return Relation.VAGUE, RULE_BRANCH_VAGUE
    if main_coord.slot_hi <= ref.anchor:
        return Relation.AFTER, RULE_BRANCH_ORDER
    return Relation.VAGUE, RULE_BRANCH_VAGUE


def relate_events(
    a: EventRecord,
    b: EventRecord,
    slots: SlotIndex,
    vague_horizon: int | None = 1,
) -> Relation:
    """Label one pair of records; see the module docstring for the rules."""
    relation, _ = _relate(a, b, slots, vague_horizon)
    return relation


@dataclass(frozen=True, eq=True)
class TLinkGraph:
    """Dense labeled relation over all covered event pairs of one
    document, plus event-timex containment links.

    Labels are stored once per unordered pair under the key
    (min(id), max(id)); querying the opposite orientation inverts."""

    doc_id: str
    event_ids: tuple[str, ...]
    labels: dict[tuple[str, str], TLink]
    timex_links: tuple[TLink, ...] = ()

    @staticmethod
    def pair_key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def link(self, a: str, b: str) -> TLink:
        return self.labels[self.pair_key(a, b)]

    def label(self, a: str, b: str) -> Relation:
        link = self.link(a, b)
        return link.relation if link.source_id == a else invert(link.relation)

    @property
    def n_pairs(self) -> int:
        return len(self.labels)

    def check_dense(self) -> None:
        expected = len(self.event_ids) * (len(self.event_ids) - 1) // 2
        if len(self.labels) != expected:
            raise NarrativeTimeError(
                f"graph is not dense: {len(self.labels)} labels for "
                f"{len(self.event_ids)} events (need {expected})"
            )

    def to_jsonable(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "event_ids": list(self.event_ids),
            "tlinks": [
                {
                    "source": link.source_id,
                    "target": link.target_id,
                    "relation": link.relation.value,
                    "rule": link.provenance,
                }
                for _, link in sorted(self.labels.items())
            ],
            "timex_links": [
                {
                    "source": link.source_id,
                    "target": link.target_id,
                    "relation": link.relation.value,
                    "rule": link.provenance,
                }
                for link in self.timex_links
            ],
        }


def derive_tlinks(
    records: list[EventRecord],
    uncovered: list[str],
    timexes: tuple[TimexMention, ...] | list[TimexMention],
    logical_annotations: list[LogicalAnnotation],
    *,
    vague_horizon: int | None = 1,
    doc_id: str | None = None,
) -> TLinkGraph:
    """Label every unordered pair of covered events and attach timexes.

    Uncovered events stay out of the graph. A timex lying inside a
    logical annotation's ranges is linked IS_INCLUDED to every event of
    that annotation.
    """
    del uncovered  # excluded by construction; accepted for symmetry with projection
    if doc_id is None:
        doc_id = records[0].doc_id if records else ""
    by_id = {record.event_id: record for record in records}
    slots = SlotIndex(records)

    labels: dict[tuple[str, str], TLink] = {}
    ordered = sorted(by_id)
    for id_a, id_b in combinations(ordered, 2):
        relation, rule = _relate(by_id[id_a], by_id[id_b], slots, vague_horizon)
        labels[(id_a, id_b)] = TLink(id_a, id_b, relation, rule)

    members: dict[str, list[str]] = {}
    for record in sorted(records, key=lambda r: r.event_id):
        members.setdefault(record.span_id, []).append(record.event_id)
    timex_links: list[TLink] = []
    for la in sorted(logical_annotations, key=lambda a: a.logical_id):
        inside = [t for t in timexes if _contains(la.ranges, (t.range,))]
        for timex in inside:
            for event_id in members.get(la.logical_id, []):
                timex_links.append(
                    TLink(event_id, timex.timex_id, Relation.IS_INCLUDED, RULE_TIMEX)
                )

    return TLinkGraph(
        doc_id=doc_id,
        event_ids=tuple(ordered),
        labels=labels,
        timex_links=tuple(timex_links),
    )


@dataclass(frozen=True)
class ConsistencyViolation:
    """An ordered event triple whose third label contradicts the
    composition of the first two."""

    first: str
    middle: str
    last: str
    first_middle: Relation
    middle_last: Relation
    first_last: Relation

    def __str__(self) -> str:
        return (
            f"{self.first} {self.first_middle.value} {self.middle}, "
            f"{self.middle} {self.middle_last.value} {self.last}, "
            f"but {self.first} {self.first_last.value} {self.last}"
        )


_COMPOSITION: dict[tuple[Relation, Relation], frozenset[Relation]] = {
    (Relation.BEFORE, Relation.BEFORE): frozenset({Relation.BEFORE}),
    (Relation.BEFORE, Relation.WHILE): frozenset({Relation.BEFORE}),
    (Relation.WHILE, Relation.BEFORE): frozenset({Relation.BEFORE}),
    (Relation.WHILE, Relation.WHILE): frozenset({Relation.WHILE}),
    (Relation.AFTER, Relation.AFTER): frozenset({Relation.AFTER}),
    (Relation.AFTER, Relation.WHILE): frozenset({Relation.AFTER}),
    (Relation.WHILE, Relation.AFTER): frozenset({Relation.AFTER}),
}


def _constrains(link: TLink) -> bool:
    if link.relation is Relation.VAGUE:
        return False
    if link.relation is Relation.WHILE:
        return link.provenance not in OVERLAP_WHILE_RULES
    return True


def check_consistency(graph: TLinkGraph) -> list[ConsistencyViolation]:
    """Find event triples whose labels cannot coexist.

    BEFORE/AFTER compose transitively and WHILE acts as co-location;
    VAGUE and overlap-style WHILE links constrain nothing.
    """
    graph.check_dense()
    violations: list[ConsistencyViolation] = []
    ids = list(graph.event_ids)

    def oriented(x: str, y: str) -> tuple[Relation, bool]:
        link = graph.link(x, y)
        relation = link.relation if link.source_id == x else invert(link.relation)
        return relation, _constrains(link)

    for a, b, c in combinations(ids, 3):
        for first, middle, last in ((a, b, c), (b, a, c), (a, c, b)):
            r1, ok1 = oriented(first, middle)
            r2, ok2 = oriented(middle, last)
            r3, ok3 = oriented(first, last)
            if not (ok1 and ok2 and ok3):
                continue
            allowed = _COMPOSITION.get((r1, r2))
            if allowed is not None and r3 not in allowed:
                violations.append(
                    ConsistencyViolation(first, middle, last, r1, r2, r3)
                )
                break  # one report per triple
    return violations


@dataclass(frozen=True)
class Derivation:
    """Everything the pipeline produces for one clean document."""

    graph: TLinkGraph
    records: list[EventRecord]
    uncovered: list[str]
    logical_annotations: list[LogicalAnnotation]
    diagnostics: list[Diagnostic]


def derive_document(
    doc: AnnotationDocument, *, vague_horizon: int | None = 1
) -> Derivation:
    """Validate, project and derive in one step.

    Raises AnnotationError when the document carries ERROR diagnostics;
    warnings ride along in the result.
    """
    diagnostics = validate(doc)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        raise AnnotationError(errors)
    logicals, _ = _merge_spans(doc.spans)
    records, uncovered, _ = _project(doc, logicals)
    graph = derive_tlinks(
        records,
        uncovered,
        doc.timexes,
        logicals,
        vague_horizon=vague_horizon,
        doc_id=doc.doc_id,
    )
    return Derivation(graph, records, uncovered, logicals, diagnostics)
