"""Core domain model for timeline-based temporal annotation.

Value types shared by every other module: source documents, pre-marked
event/timex mentions, annotation spans with timeline positions, branch
attachments, speech attribution, and the coarse temporal relation
vocabulary. Everything here is immutable and free of I/O; character
offsets count Unicode scalar values from zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

MAIN_TIMELINE = "main"

# Punctuation accepted as discontinuity markers on timeline positions.
# Digits, dot and dash are excluded: they belong to the position grammar.
INDEX_CHARS = "%#@&*+=~"


class NarrativeTimeError(Exception):
    """Base class for all errors raised by this package."""


class SpanType(Enum):
    """Kind of an annotation span.

    BOUNDED events occupy a slot between their timeline neighbours;
    SEQUENCE spans cluster several consecutive bounded events into one
    record; UNBOUNDED events overlap an anchor slot with underspecified
    endpoints (or, without a position, hold throughout the narrative);
    LEFT_BOUNDED / RIGHT_BOUNDED anchor exactly one endpoint; IRREALIS
    content stays off the timeline entirely.
    """

    BOUNDED = "B"
    SEQUENCE = "S"
    UNBOUNDED = "U"
    LEFT_BOUNDED = "UL"
    RIGHT_BOUNDED = "UR"
    IRREALIS = "I"

    @property
    def display(self) -> str:
        return _SPAN_DISPLAY[self]


_SPAN_DISPLAY = {
    SpanType.BOUNDED: "[B]",
    SpanType.SEQUENCE: "[S]",
    SpanType.UNBOUNDED: "{U}",
    SpanType.LEFT_BOUNDED: "[U}",
    SpanType.RIGHT_BOUNDED: "{U]",
    SpanType.IRREALIS: "[I]",
}

# Span types that must carry an explicit timeline position.
POSITION_REQUIRED = frozenset(
    {SpanType.BOUNDED, SpanType.SEQUENCE, SpanType.LEFT_BOUNDED, SpanType.RIGHT_BOUNDED}
)


class Relation(Enum):
    """Coarse temporal relation between two annotated elements."""

    BEFORE = "BEFORE"
    AFTER = "AFTER"
    WHILE = "WHILE"
    VAGUE = "VAGUE"
    IS_INCLUDED = "IS_INCLUDED"

    def invert(self) -> "Relation":
        return invert(self)


EVENT_RELATIONS = frozenset(
    {Relation.BEFORE, Relation.AFTER, Relation.WHILE, Relation.VAGUE}
)


def invert(relation: Relation) -> Relation:
    """Flip the orientation of an event-event relation.

    BEFORE and AFTER swap; WHILE and VAGUE are their own inverses.
    IS_INCLUDED links event to timex and has no event-event inverse.
    """
    if relation is Relation.BEFORE:
        return Relation.AFTER
    if relation is Relation.AFTER:
        return Relation.BEFORE
    if relation in (Relation.WHILE, Relation.VAGUE):
        return relation
    raise ValueError(f"{relation.value} is not an event-event relation")


def _check_ranges(ranges: tuple[tuple[int, int], ...]) -> None:
    if not ranges:
        raise ValueError("ranges must be non-empty")
    prev_end = None
    for start, end in ranges:
        if start < 0 or end <= start:
            raise ValueError(f"invalid range [{start}, {end})")
        if prev_end is not None and start < prev_end:
            raise ValueError("ranges must be sorted and non-overlapping")
        prev_end = end


def _as_range_tuple(ranges) -> tuple[tuple[int, int], ...]:
    return tuple((int(s), int(e)) for s, e in ranges)


def covered_text(text: str, ranges: tuple[tuple[int, int], ...]) -> str:
    """Concatenate the text pieces selected by half-open ranges."""
    return "".join(text[s:e] for s, e in ranges)


@dataclass(frozen=True)
class DocumentText:
    """A narrative text with a stable identifier."""

    doc_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.text:
            raise ValueError("text must be non-empty")


@dataclass(frozen=True)
class EventMention:
    """A pre-marked event: possibly discontinuous character ranges."""

    event_id: str
    ranges: tuple[tuple[int, int], ...]
    surface: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranges", _as_range_tuple(self.ranges))
        if not self.event_id:
            raise ValueError("event_id must be non-empty")
        _check_ranges(self.ranges)

    @classmethod
    def extract(cls, event_id: str, ranges, text: str) -> "EventMention":
        rng = _as_range_tuple(ranges)
        return cls(event_id, rng, covered_text(text, rng))

    @property
    def first_start(self) -> int:
        return self.ranges[0][0]


@dataclass(frozen=True)
class TimexMention:
    """A pre-marked temporal expression over one contiguous range."""

    timex_id: str
    range: tuple[int, int]
    surface: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "range", (int(self.range[0]), int(self.range[1])))
        if not self.timex_id:
            raise ValueError("timex_id must be non-empty")
        _check_ranges((self.range,))

    @classmethod
    def extract(cls, timex_id: str, rng, text: str) -> "TimexMention":
        r = (int(rng[0]), int(rng[1]))
        return cls(timex_id, r, text[r[0]: r[1]])


@dataclass(frozen=True)
class TmlPosition:
    """A timeline position: a slot, or a lo-hi extent, plus an optional
    discontinuity marker.

    Positions are exact rationals so that fractional insertions such as
    4.5 order deterministically between 4 and 5.
    """

    lo: Fraction
    hi: Fraction
    index_char: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo < 1:
            raise ValueError("timeline positions start at 1")
        if self.hi < self.lo:
            raise ValueError("extent upper bound below lower bound")
        if self.index_char is not None and self.index_char not in INDEX_CHARS:
            raise ValueError(f"index char must be one of {INDEX_CHARS!r}")

    @classmethod
    def at(cls, slot, index_char: str | None = None) -> "TmlPosition":
        slot = Fraction(slot)
        return cls(slot, slot, index_char)


class BranchDirection(Enum):
    BEFORE = "before"
    AFTER = "after"


@dataclass(frozen=True)
class BranchRef:
    """Attachment of a mini-timeline to a slot on the main timeline."""

    branch_id: str
    direction: BranchDirection
    anchor: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchor", Fraction(self.anchor))
        if not self.branch_id or self.branch_id == MAIN_TIMELINE:
            raise ValueError("branch_id must be non-empty and distinct from the main timeline")
        if self.anchor < 0:
            raise ValueError("anchor must be non-negative")


class SpeechSource(Enum):
    NARRATOR = "narrator"
    CHARACTER = "character"
    IMPLICIT = "implicit"


@dataclass(frozen=True)
class SpeechAttribution:
    """Who the annotated information comes from: the narrator, a named
    character, or an implicit speech event."""

    source: SpeechSource = SpeechSource.NARRATOR
    character: str | None = None

    def __post_init__(self) -> None:
        if self.source is SpeechSource.CHARACTER:
            if not self.character:
                raise ValueError("character speech requires a non-empty name")
        elif self.character is not None:
            raise ValueError("character name only valid for character speech")

    @classmethod
    def for_character(cls, name: str) -> "SpeechAttribution":
        return cls(SpeechSource.CHARACTER, name)


NARRATOR = SpeechAttribution()
IMPLICIT = SpeechAttribution(SpeechSource.IMPLICIT)


@dataclass(frozen=True)
class AnnotationSpan:
    """One annotator action: a text span with a type, an optional
    timeline position, an optional branch attachment and a speech source.

    Scheme-level coherence (irrealis spans never positioned, bounded
    spans always positioned) is checked by the notation parser and the
    validator, so that violations surface as diagnostics rather than
    construction failures.
    """

    span_id: str
    ranges: tuple[tuple[int, int], ...]
    span_type: SpanType
    tml: TmlPosition | None = None
    rel_to: BranchRef | None = None
    speech: SpeechAttribution = NARRATOR

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranges", _as_range_tuple(self.ranges))
        if not self.span_id:
            raise ValueError("span_id must be non-empty")
        _check_ranges(self.ranges)

    @property
    def first_start(self) -> int:
        return self.ranges[0][0]

    @property
    def timeline_id(self) -> str:
        return self.rel_to.branch_id if self.rel_to else MAIN_TIMELINE


@dataclass(frozen=True)
class TLink:
    """A labeled temporal link between two elements, tagged with the
    identifier of the rule that produced it."""

    source_id: str
    target_id: str
    relation: Relation
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.source_id == self.target_id:
            raise ValueError("a link cannot relate an element to itself")


@dataclass(frozen=True)
class AnnotationDocument:
    """A document plus one annotator's spans over its pre-marked events."""

    doc: DocumentText
    events: tuple[EventMention, ...] = ()
    timexes: tuple[TimexMention, ...] = ()
    spans: tuple[AnnotationSpan, ...] = ()
    annotator_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "timexes", tuple(self.timexes))
        object.__setattr__(self, "spans", tuple(self.spans))
        n = len(self.doc.text)
        for kind, ids in (
            ("event", [e.event_id for e in self.events]),
            ("timex", [t.timex_id for t in self.timexes]),
            ("span", [s.span_id for s in self.spans]),
        ):
            if len(ids) != len(set(ids)):
                raise ValueError(f"duplicate {kind} ids")
        for mention in self.events:
            _check_bounds(mention.ranges, n, mention.event_id)
        for timex in self.timexes:
            _check_bounds((timex.range,), n, timex.timex_id)
        for span in self.spans:
            _check_bounds(span.ranges, n, span.span_id)

    @property
    def doc_id(self) -> str:
        return self.doc.doc_id

    @property
    def text(self) -> str:
        return self.doc.text

    def event_by_id(self, event_id: str) -> EventMention:
        for event in self.events:
            if event.event_id == event_id:
                return event
        raise KeyError(event_id)


def _check_bounds(ranges: tuple[tuple[int, int], ...], text_len: int, owner: str) -> None:
    for start, end in ranges:
        if end > text_len:
            raise ValueError(f"range [{start}, {end}) of {owner} exceeds text length {text_len}")
