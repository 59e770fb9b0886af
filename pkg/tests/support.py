"""Shared test helpers: record builders, independent oracles, and a
seeded generator of random valid annotation documents."""
from __future__ import annotations

import json
import random
from fractions import Fraction
from itertools import combinations

from narrativetime import (
    AnnotationDocument,
    BranchDirection,
    BranchRef,
    EventRecord,
    Relation,
    SpanType,
    TLink,
    TLinkGraph,
    TimelineCoordinate,
    parse_annotation_doc,
    validate,
)
from narrativetime.model import NARRATOR
from narrativetime.timeline import BoundKind, Severity

_KINDS = {
    "B": (BoundKind.CLOSED, BoundKind.CLOSED),
    "U": (BoundKind.FUZZY, BoundKind.FUZZY),
    "UL": (BoundKind.CLOSED, BoundKind.FUZZY),
    "UR": (BoundKind.FUZZY, BoundKind.CLOSED),
}


def rec(
    event_id: str,
    etype: str,
    lo=None,
    hi=None,
    *,
    seq: int | None = None,
    timeline: str = "main",
    span: str | None = None,
    generic: bool = False,
    branch: BranchRef | None = None,
    doc: str = "doc",
) -> EventRecord:
    """Build an event record directly, bypassing document projection."""
    span_id = span or f"span-{event_id}"
    if etype == "I":
        return EventRecord(event_id, SpanType.IRREALIS, None, False, NARRATOR, span_id, doc)
    if generic:
        return EventRecord(event_id, SpanType.UNBOUNDED, None, True, NARRATOR, span_id, doc)
    left, right = _KINDS[etype]
    coord = TimelineCoordinate(
        timeline_id=branch.branch_id if branch else timeline,
        slot_lo=Fraction(lo),
        slot_hi=Fraction(hi if hi is not None else lo),
        seq_index=seq,
        left_kind=left,
        right_kind=right,
    )
    return EventRecord(
        event_id, SpanType(etype), coord, False, NARRATOR, span_id, doc, branch
    )


def before_branch(anchor, branch_id: str = "b1") -> BranchRef:
    return BranchRef(branch_id, BranchDirection.BEFORE, Fraction(anchor))


def after_branch(anchor, branch_id: str = "b1") -> BranchRef:
    return BranchRef(branch_id, BranchDirection.AFTER, Fraction(anchor))


def intervals_overlap(lo1, hi1, lo2, hi2) -> bool:
    """Independent interval-overlap oracle."""
    return Fraction(lo1) <= Fraction(hi2) and Fraction(lo2) <= Fraction(hi1)


def random_dense_graph(rng: random.Random, n: int | None = None) -> TLinkGraph:
    """A dense graph with arbitrary labels under canonical pair keys."""
    if n is None:
        n = rng.randint(2, 12)
    ids = tuple(f"e{i:02d}" for i in range(n))
    relations = [Relation.BEFORE, Relation.AFTER, Relation.WHILE, Relation.VAGUE]
    labels = {
        (a, b): TLink(a, b, rng.choice(relations), "")
        for a, b in combinations(ids, 2)
    }
    return TLinkGraph("doc", ids, labels, ())


# ---------------------------------------------------------------------------
# Random valid annotation documents
# ---------------------------------------------------------------------------

_TYPE_WEIGHTS = [
    ("B", 30),
    ("S", 20),
    ("U", 15),
    ("U-generic", 8),
    ("UL", 10),
    ("UR", 10),
    ("I", 7),
]
_SPEECHES = ["narrator"] * 8 + [{"character": "Bear"}, "implicit"]


def _pick_type(rng: random.Random) -> str:
    total = sum(w for _, w in _TYPE_WEIGHTS)
    roll = rng.randrange(total)
    for name, weight in _TYPE_WEIGHTS:
        roll -= weight
        if roll < 0:
            return name
    return "B"


class _Timeline:
    def __init__(self) -> None:
        self.next_int = 1
        self.slots: list[Fraction] = []
        self.index_chars_used: set[tuple[Fraction, str]] = set()

    def fresh_slot(self, rng: random.Random) -> tuple[Fraction, Fraction]:
        roll = rng.random()
        if roll < 0.12 and self.slots:
            slot = rng.choice(self.slots)  # deliberate tie
            self.slots.append(slot)
            return slot, slot
        if roll < 0.22 and len(set(self.slots)) >= 2:
            distinct = sorted(set(self.slots))
            i = rng.randrange(len(distinct) - 1)
            mid = (distinct[i] + distinct[i + 1]) / 2
            if mid not in self.slots:
                self.slots.append(mid)
                return mid, mid
        lo = Fraction(self.next_int)
        self.next_int += 1
        if roll > 0.92:  # extent over two fresh integer slots
            hi = Fraction(self.next_int)
            self.next_int += 1
            self.slots.extend([lo, hi])
            return lo, hi
        self.slots.append(lo)
        return lo, lo


def random_document(
    rng: random.Random, *, max_events: int = 30, max_branches: int = 2
) -> AnnotationDocument:
    """A random valid annotation document exercising every span type,
    ties, fractional insertions, extents, discontinuous pieces, branches,
    uncovered events and timexes. Validation must come back ERROR-free."""
    n_events = rng.randint(1, max_events)

    words: list[tuple[str, bool]] = []  # (word, is_event)
    for i in range(n_events):
        for _ in range(rng.randrange(3)):
            words.append((f"w{len(words)}", False))
        words.append((f"ev{i}", True))
    if rng.random() < 0.5:
        words.append(("end", False))

    text_parts: list[str] = []
    offset = 0
    positions: list[tuple[int, int]] = []
    event_ranges: list[tuple[int, int]] = []
    for word, is_event in words:
        if text_parts:
            offset += 1  # single space
        start = offset
        end = start + len(word)
        text_parts.append(word)
        positions.append((start, end))
        if is_event:
            event_ranges.append((start, end))
        offset = end
    text = " ".join(text_parts)

    events = [
        {"id": f"e{i:02d}", "ranges": [list(rng_)]}
        for i, rng_ in enumerate(event_ranges)
    ]

    # Partition events into clusters of consecutive events.
    clusters: list[list[int]] = []
    i = 0
    while i < n_events:
        size = rng.choice([1, 1, 1, 2, 2, 3, 4, 5])
        clusters.append(list(range(i, min(i + size, n_events))))
        i += size

    word_index_of_event: dict[int, int] = {}
    seen_events = 0
    for w_idx, (_, is_event) in enumerate(words):
        if is_event:
            word_index_of_event[seen_events] = w_idx
            seen_events += 1

    timelines: dict[str, _Timeline] = {"main": _Timeline()}
    branch_defs: dict[str, dict] = {}
    n_branches = rng.randint(0, max_branches)
    spans: list[dict] = []
    timexes: list[dict] = []
    split_chars = iter("%#@&*+=~")

    for cluster_no, cluster in enumerate(clusters):
        if rng.random() < 0.05:
            continue  # leave these events uncovered

        first_w = word_index_of_event[cluster[0]]
        last_w = word_index_of_event[cluster[-1]]
        c_start = positions[first_w][0]
        c_end = positions[last_w][1]

        type_name = _pick_type(rng)
        if type_name == "S" and len(cluster) == 1:
            type_name = "B"
        speech = rng.choice(_SPEECHES)

        rel_to = None
        timeline_key = "main"
        if n_branches and rng.random() < 0.2 and type_name not in ("I", "U-generic"):
            branch_no = rng.randrange(n_branches)
            branch_id = f"br{branch_no}"
            if branch_id not in branch_defs:
                branch_defs[branch_id] = {
                    "branch": branch_id,
                    "dir": rng.choice(["before", "after"]),
                    "anchor": str(rng.randint(1, 6)),
                }
                timelines[branch_id] = _Timeline()
            rel_to = branch_defs[branch_id]
            timeline_key = branch_id

        base = {"type": type_name, "speech": speech}
        if rel_to is not None:
            base["rel_to"] = rel_to

        if type_name in ("I", "U-generic"):
            if type_name == "U-generic":
                base["type"] = "U"
            spans.append(
                {"id": f"s{cluster_no:02d}", "ranges": [[c_start, c_end]], **base}
            )
            continue

        tl = timelines[timeline_key]
        lo, hi = tl.fresh_slot(rng)
        tml = _format_slot(lo, hi)

        fresh_integer = lo == hi and lo.denominator == 1 and tl.slots.count(lo) == 1
        if len(cluster) >= 2 and fresh_integer and rng.random() < 0.25:
            char = next(split_chars, None)
            if char is not None:
                cut = rng.randrange(1, len(cluster))
                mid_end = positions[word_index_of_event[cluster[cut - 1]]][1]
                mid_start = positions[word_index_of_event[cluster[cut]]][0]
                spans.append(
                    {
                        "id": f"s{cluster_no:02d}",
                        "ranges": [[c_start, mid_end]],
                        "tml": tml + char,
                        **base,
                    }
                )
                spans.append(
                    {
                        "id": f"s{cluster_no:02d}x",
                        "ranges": [[mid_start, c_end]],
                        "tml": tml + char,
                        **base,
                    }
                )
                continue

        spans.append(
            {"id": f"s{cluster_no:02d}", "ranges": [[c_start, c_end]], "tml": tml, **base}
        )

        filler_inside = [
            w
            for w in range(first_w, last_w + 1)
            if not words[w][1]
        ]
        if filler_inside and rng.random() < 0.2:
            w = rng.choice(filler_inside)
            timexes.append(
                {"id": f"t{len(timexes)}", "range": list(positions[w])}
            )

    payload = {
        "doc_id": f"random-{rng.randrange(10**9)}",
        "annotator_id": "gen",
        "text": text,
        "events": events,
        "timexes": timexes,
        "spans": spans,
    }
    document = parse_annotation_doc(json.dumps(payload))
    errors = [d for d in validate(document) if d.severity is Severity.ERROR]
    assert not errors, (payload["doc_id"], errors)
    return document


def _format_slot(lo: Fraction, hi: Fraction) -> str:
    from narrativetime.notation import format_rational

    if lo == hi:
        return format_rational(lo)
    return f"{format_rational(lo)}-{format_rational(hi)}"
