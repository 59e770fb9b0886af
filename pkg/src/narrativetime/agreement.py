"""Inter-annotator agreement over two annotations of one document.

Comparison happens at the per-event level, never at span level, so
annotators are free to chunk differently. Cohen's kappa
k = (p_o - p_e) / (1 - p_e) is computed twice: over the dense pairwise
relation labels and over the five-way event types. All intermediate
counts stay integral, so the result is exactly invariant under pair
enumeration order and joint label renaming.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import AnnotationDocument, NarrativeTimeError, SpanType
from .inference import TLinkGraph, derive_document
from .timeline import EventRecord, _merge_spans, _project

# Row/column order of the event-type confusion matrix.
TYPE_ORDER = (
    SpanType.BOUNDED,
    SpanType.IRREALIS,
    SpanType.LEFT_BOUNDED,
    SpanType.RIGHT_BOUNDED,
    SpanType.UNBOUNDED,
)


@dataclass(frozen=True)
class KappaResult:
    """Cohen's kappa with its ingredients.

    degenerate marks pathological marginals: expected agreement of one
    (a single shared label) or zero (annotators share no label at all).
    In both cases kappa's denominator carries no information and the
    value falls back to 1.0 for perfect observed agreement, else 0.0.
    """

    kappa: float
    p_observed: float
    p_expected: float
    n_items: int
    agree: int
    counts_a: dict[str, int]
    counts_b: dict[str, int]
    agree_by_label: dict[str, int]
    degenerate: bool

    def per_label(self) -> dict[str, dict[str, float]]:
        """Observed and chance-expected agreement mass per label."""
        labels = sorted(set(self.counts_a) | set(self.counts_b))
        n = self.n_items or 1
        return {
            label: {
                "observed": self.agree_by_label.get(label, 0) / n,
                "expected": self.counts_a.get(label, 0)
                * self.counts_b.get(label, 0)
                / (n * n),
            }
            for label in labels
        }

    def to_jsonable(self) -> dict:
        return {
            "kappa": self.kappa,
            "p_observed": self.p_observed,
            "p_expected": self.p_expected,
            "n_items": self.n_items,
            "agree": self.agree,
            "counts_a": dict(self.counts_a),
            "counts_b": dict(self.counts_b),
            "per_label": self.per_label(),
            "degenerate": self.degenerate,
        }


DEGENERATE_MARGINALS = "DEGENERATE_MARGINALS"


def cohen_kappa(labels_a: list[str], labels_b: list[str]) -> KappaResult:
    """Chance-corrected agreement between two parallel label sequences."""
    if len(labels_a) != len(labels_b):
        raise NarrativeTimeError("label sequences differ in length")
    n = len(labels_a)
    if n == 0:
        return KappaResult(1.0, 1.0, 1.0, 0, 0, {}, {}, {}, True)
    counts_a: dict[str, int] = {}
    counts_b: dict[str, int] = {}
    agree_by_label: dict[str, int] = {}
    for a, b in zip(labels_a, labels_b):
        counts_a[a] = counts_a.get(a, 0) + 1
        counts_b[b] = counts_b.get(b, 0) + 1
        if a == b:
            agree_by_label[a] = agree_by_label.get(a, 0) + 1
    agree = sum(agree_by_label.values())
    pe_numerator = sum(
        count * counts_b.get(label, 0) for label, count in counts_a.items()
    )
    p_observed = agree / n
    p_expected = pe_numerator / (n * n)
    if pe_numerator == n * n:
        return KappaResult(
            1.0 if agree == n else 0.0,
            p_observed, p_expected, n, agree, counts_a, counts_b, agree_by_label, True,
        )
    if pe_numerator == 0:
        return KappaResult(
            0.0, p_observed, p_expected, n, agree, counts_a, counts_b, agree_by_label, True
        )
    kappa = (agree * n - pe_numerator) / (n * n - pe_numerator)
    return KappaResult(
        kappa, p_observed, p_expected, n, agree, counts_a, counts_b, agree_by_label, False
    )


def tlink_kappa(graph_a: TLinkGraph, graph_b: TLinkGraph) -> tuple[float, KappaResult]:
    """Kappa over the relation labels of all canonically oriented pairs."""
    if set(graph_a.event_ids) != set(graph_b.event_ids):
        raise NarrativeTimeError("graphs cover different event sets")
    graph_a.check_dense()
    graph_b.check_dense()
    keys = sorted(graph_a.labels)
    labels_a = [graph_a.labels[key].relation.value for key in keys]
    labels_b = [graph_b.labels[key].relation.value for key in keys]
    result = cohen_kappa(labels_a, labels_b)
    return result.kappa, result


def _type_label(record: EventRecord) -> SpanType:
    # Sequence members already projected to BOUNDED; generic stays UNBOUNDED.
    return record.etype


def _paired_types(
    records_a: list[EventRecord], records_b: list[EventRecord]
) -> list[tuple[SpanType, SpanType]]:
    by_a = {r.event_id: _type_label(r) for r in records_a}
    by_b = {r.event_id: _type_label(r) for r in records_b}
    if set(by_a) != set(by_b):
        raise NarrativeTimeError("annotators cover different event sets")
    return [(by_a[event_id], by_b[event_id]) for event_id in sorted(by_a)]


def type_kappa(
    records_a: list[EventRecord], records_b: list[EventRecord]
) -> tuple[float, KappaResult]:
    """Kappa over per-event five-way type labels."""
    pairs = _paired_types(records_a, records_b)
    result = cohen_kappa(
        [a.value for a, _ in pairs], [b.value for _, b in pairs]
    )
    return result.kappa, result


def type_confusion(
    records_a: list[EventRecord], records_b: list[EventRecord]
) -> list[list[int]]:
    """5x5 matrix of event-type decisions; rows are annotator A."""
    index = {etype: i for i, etype in enumerate(TYPE_ORDER)}
    matrix = [[0] * len(TYPE_ORDER) for _ in TYPE_ORDER]
    for type_a, type_b in _paired_types(records_a, records_b):
        matrix[index[type_a]][index[type_b]] += 1
    return matrix


def format_confusion(matrix: list[list[int]]) -> str:
    """Render the confusion matrix as an aligned plain-text table."""
    headers = [t.display for t in TYPE_ORDER]
    width = max(
        [len(h) for h in headers] + [len(str(v)) for row in matrix for v in row]
    )
    lines = [" " * (width + 2) + "  ".join(h.rjust(width) for h in headers)]
    for header, row in zip(headers, matrix):
        cells = "  ".join(str(v).rjust(width) for v in row)
        lines.append(f"{header.rjust(width)}  {cells}")
    return "\n".join(lines)


@dataclass(frozen=True)
class ActionCount:
    """Annotator effort for one document, against a pair-based baseline
    of one click per pair plus one per relation type choice."""

    nt_actions: int
    pair_baseline: int

    def to_jsonable(self) -> dict:
        return {"nt_actions": self.nt_actions, "pair_baseline": self.pair_baseline}


def count_actions(doc: AnnotationDocument) -> ActionCount:
    """Count annotation actions recoverable from the saved document.

    One action per drawn piece (merged annotations count each piece)
    plus one per position that differs from the auto-populated value,
    i.e. from the consecutive integer the annotation would have received
    when created in timeline order.
    """
    logicals, merge_diags = _merge_spans(doc.spans)
    if merge_diags:
        raise NarrativeTimeError("cannot count actions on inconsistent merges")
    actions = sum(la.n_pieces for la in logicals)

    per_timeline: dict[str, list] = {}
    for la in logicals:
        if la.tml is not None:
            per_timeline.setdefault(la.timeline_id, []).append(la)
    for members in per_timeline.values():
        members.sort(key=lambda la: (la.tml.lo, la.tml.hi, la.first_start, la.logical_id))
        for rank, la in enumerate(members, start=1):
            if la.tml.lo != rank or la.tml.hi != rank:
                actions += 1

    records, _, project_diags = _project(doc, logicals)
    if any(d.severity.value == "ERROR" for d in project_diags):
        raise NarrativeTimeError("cannot count actions on conflicting coverage")
    n = len(records)
    return ActionCount(nt_actions=actions, pair_baseline=n * (n - 1))


@dataclass(frozen=True)
class AgreementReport:
    """Pairwise comparison of two annotators on one document."""

    doc_id: str
    annotator_a: str
    annotator_b: str
    kappa_tlink: float
    kappa_type: float
    confusion: list[list[int]]
    n_pairs: int
    tlink_detail: KappaResult
    type_detail: KappaResult
    actions_a: ActionCount
    actions_b: ActionCount

    def to_jsonable(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "annotator_a": self.annotator_a,
            "annotator_b": self.annotator_b,
            "kappa_tlink": self.kappa_tlink,
            "kappa_type": self.kappa_type,
            "confusion": [list(row) for row in self.confusion],
            "confusion_labels": [t.display for t in TYPE_ORDER],
            "n_pairs": self.n_pairs,
            "tlink_detail": self.tlink_detail.to_jsonable(),
            "type_detail": self.type_detail.to_jsonable(),
            "actions_a": self.actions_a.to_jsonable(),
            "actions_b": self.actions_b.to_jsonable(),
        }

    def render_text(self) -> str:
        lines = [
            f"document:     {self.doc_id}",
            f"annotators:   {self.annotator_a} vs {self.annotator_b}",
            f"kappa_tlink:  {self.kappa_tlink:.6f}"
            + ("  (degenerate marginals)" if self.tlink_detail.degenerate else ""),
            f"kappa_type:   {self.kappa_type:.6f}"
            + ("  (degenerate marginals)" if self.type_detail.degenerate else ""),
            f"event pairs:  {self.n_pairs}",
            "",
            "type confusion (rows = " + self.annotator_a + "):",
            format_confusion(self.confusion),
            "",
            f"actions {self.annotator_a}: {self.actions_a.nt_actions} "
            f"(pair-based baseline {self.actions_a.pair_baseline})",
            f"actions {self.annotator_b}: {self.actions_b.nt_actions} "
            f"(pair-based baseline {self.actions_b.pair_baseline})",
        ]
        return "\n".join(lines)


def compare_documents(
    doc_a: AnnotationDocument,
    doc_b: AnnotationDocument,
    *,
    vague_horizon: int | None = 1,
) -> AgreementReport:
    """Full agreement report for two annotations of the same text."""
    if doc_a.doc_id != doc_b.doc_id or doc_a.text != doc_b.text:
        raise NarrativeTimeError("annotations describe different documents")
    if {e.event_id for e in doc_a.events} != {e.event_id for e in doc_b.events}:
        raise NarrativeTimeError("annotations carry different pre-marked events")
    derivation_a = derive_document(doc_a, vague_horizon=vague_horizon)
    derivation_b = derive_document(doc_b, vague_horizon=vague_horizon)
    kappa_t, tlink_detail = tlink_kappa(derivation_a.graph, derivation_b.graph)
    kappa_y, type_detail = type_kappa(derivation_a.records, derivation_b.records)
    confusion = type_confusion(derivation_a.records, derivation_b.records)
    return AgreementReport(
        doc_id=doc_a.doc_id,
        annotator_a=doc_a.annotator_id,
        annotator_b=doc_b.annotator_id,
        kappa_tlink=kappa_t,
        kappa_type=kappa_y,
        confusion=confusion,
        n_pairs=tlink_detail.n_items,
        tlink_detail=tlink_detail,
        type_detail=type_detail,
        actions_a=count_actions(doc_a),
        actions_b=count_actions(doc_b),
    )
