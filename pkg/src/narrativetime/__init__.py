"""Timeline-based temporal annotation toolkit.

Annotators place pre-marked events on an interactive timeline using a
handful of span types (bounded, sequence, unbounded, partially bounded,
irrealis), branches for off-timeline episodes, and speech attribution.
This package validates such annotations, derives the dense pairwise
temporal-link graph they imply, measures inter-annotator agreement,
exports TimeML-style XML, and serves the browser annotation UI.
"""

from .model import (
    AnnotationDocument,
    AnnotationSpan,
    BranchDirection,
    BranchRef,
    DocumentText,
    EventMention,
    NarrativeTimeError,
    Relation,
    SpanType,
    SpeechAttribution,
    SpeechSource,
    TLink,
    TimexMention,
    TmlPosition,
    MAIN_TIMELINE,
    invert,
)
from .notation import (
    DocumentError,
    TmlError,
    TmlToken,
    format_tml,
    parse_annotation_doc,
    parse_tml,
    serialize_annotation_doc,
)
from .timeline import (
    AnnotationError,
    BoundKind,
    Diagnostic,
    EventRecord,
    LogicalAnnotation,
    Severity,
    TimelineCoordinate,
    merge_discontinuous,
    occupied_slots,
    project_events,
    validate,
)
from .inference import (
    ConsistencyViolation,
    SlotIndex,
    TLinkGraph,
    check_consistency,
    derive_document,
    derive_tlinks,
    relate_events,
)
from .agreement import (
    ActionCount,
    AgreementReport,
    KappaResult,
    cohen_kappa,
    compare_documents,
    count_actions,
    format_confusion,
    tlink_kappa,
    type_confusion,
    type_kappa,
)
from .interchange import (
    PremarkBundle,
    TimemlImport,
    export_timeml,
    import_premarked,
    import_timeml,
)
from .store import DocumentStore, RevisionConflict, StoreConfig, StoreEntry

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
