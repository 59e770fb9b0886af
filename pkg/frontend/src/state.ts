/**
 * Session state for one loaded document: selection, input mode, dirty
 * tracking, and the span mutations behind the toolbar.
 *
 * Every mutation mirrors the server's grammar checks so that a save is
 * never attempted with cells the server would bounce; the server's
 * validation remains authoritative on save.
 */
import { parseTml, tmlProblem } from "./tml.js";
import type {
  CharRange,
  DocumentJson,
  RelToJson,
  SpanJson,
  SpanTypeCode,
} from "./types.js";

export type InputMode = "normal" | "branch_before" | "branch_after";

export interface SessionState {
  document: DocumentJson | null;
  revision: number;
  dirty: boolean;
  mode: InputMode;
  selection: CharRange | null;
  /** span id -> diagnostic code for cells that fail the grammar */
  invalidCells: Map<string, string>;
  /** span created in branch mode that still needs an anchor click */
  awaitingAnchor: string | null;
}

export function emptySession(): SessionState {
  return {
    document: null,
    revision: 0,
    dirty: false,
    mode: "normal",
    selection: null,
    invalidCells: new Map(),
    awaitingAnchor: null,
  };
}

export function loadDocument(state: SessionState, document: DocumentJson, revision: number): void {
  state.document = document;
  state.revision = revision;
  state.dirty = false;
  state.mode = "normal";
  state.selection = null;
  state.invalidCells = new Map();
  state.awaitingAnchor = null;
}

/** Positions needed before a save may go out. */
export function canSave(state: SessionState): boolean {
  return state.document !== null && state.invalidCells.size === 0;
}

const POSITION_REQUIRED: SpanTypeCode[] = ["B", "S", "UL", "UR"];

/**
 * Next unused integer position on the main timeline: one past the
 * highest occupied slot, so auto-filled positions grow monotonically.
 */
export function nextIntegerSlot(spans: SpanJson[]): number {
  let highest = 0;
  for (const span of spans) {
    if (!span.tml || span.rel_to) {
      continue;
    }
    const problem = tmlProblem(span.tml);
    if (problem) {
      continue;
    }
    const value = parseTml(span.tml);
    highest = Math.max(highest, Math.floor(value.hi));
  }
  return highest + 1;
}

function freshSpanId(spans: SpanJson[]): string {
  let n = spans.length + 1;
  while (spans.some((s) => s.id === `s${n}`)) {
    n += 1;
  }
  return `s${n}`;
}

function freshBranchId(spans: SpanJson[]): string {
  let n = 1;
  while (spans.some((s) => s.rel_to && s.rel_to.branch === `b${n}`)) {
    n += 1;
  }
  return `b${n}`;
}

export interface CreateResult {
  span: SpanJson | null;
  problem: string | null;
  /** non-blocking notice, e.g. overlap with a span of another type */
  warning: string | null;
}

function overlapsConflictingSpan(
  spans: SpanJson[],
  ranges: CharRange[],
  type: SpanTypeCode,
): boolean {
  return spans.some(
    (other) =>
      other.type !== type &&
      other.ranges.some(([os, oe]) =>
        ranges.some(([s, e]) => s < oe && os < e),
      ),
  );
}

/**
 * Turn the current text selection into a new annotation row. B and S
 * spans auto-fill the next integer position; irrealis gets no position
 * cell at all; partially bounded spans start empty and stay flagged
 * until the annotator types an anchor. In branch mode the row carries a
 * fresh branch id and waits for an anchor click on the main track.
 */
export function createSpan(state: SessionState, type: SpanTypeCode): CreateResult {
  const document = state.document;
  if (!document || !state.selection) {
    return { span: null, problem: "NO_SELECTION", warning: null };
  }
  const [start, end] = state.selection;
  if (end <= start) {
    return { span: null, problem: "NO_SELECTION", warning: null };
  }
  const warning = overlapsConflictingSpan(document.spans, [[start, end]], type)
    ? "OVERLAPS_CONFLICTING_SPAN"
    : null;

  const span: SpanJson = {
    id: freshSpanId(document.spans),
    ranges: [[start, end]],
    type,
    speech: "narrator",
  };

  const onBranch = state.mode !== "normal";
  if (type === "B" || type === "S") {
    const scope = onBranch ? [] : document.spans;
    span.tml = String(nextIntegerSlot(scope));
  }
  if (onBranch) {
    if (type === "I") {
      return { span: null, problem: "IRREALIS_OFF_BRANCH", warning: null };
    }
    const rel_to: RelToJson = {
      branch: freshBranchId(document.spans),
      dir: state.mode === "branch_before" ? "before" : "after",
      anchor: "",
    };
    span.rel_to = rel_to;
    state.awaitingAnchor = span.id;
    state.invalidCells.set(span.id, "ANCHOR_PENDING");
  } else if (type === "UL" || type === "UR") {
    state.invalidCells.set(span.id, "MISSING_POSITION");
  }

  document.spans.push(span);
  state.dirty = true;
  state.selection = null;
  state.mode = "normal";
  return { span, problem: null, warning };
}

export interface EditResult {
  accepted: boolean;
  problem: string | null;
}

/**
 * Apply a Tml cell edit. Invalid text keeps the raw value visible,
 * flags the cell with the grammar's code and blocks saving; valid text
 * re-sorts the timeline on the next render without touching any other
 * row's number.
 */
export function editTml(state: SessionState, spanId: string, text: string): EditResult {
  const document = state.document;
  if (!document) {
    return { accepted: false, problem: "NO_DOCUMENT" };
  }
  const span = document.spans.find((s) => s.id === spanId);
  if (!span) {
    return { accepted: false, problem: "NO_SUCH_SPAN" };
  }
  if (span.type === "I") {
    return { accepted: false, problem: "IRREALIS_HAS_POSITION" };
  }
  state.dirty = true;
  const trimmed = text.trim();
  if (!trimmed && span.type === "U") {
    delete span.tml;
    state.invalidCells.delete(spanId);
    return { accepted: true, problem: null };
  }
  const problem = trimmed
    ? tmlProblem(trimmed)
    : "MISSING_POSITION";
  if (problem) {
    span.tml = text;
    state.invalidCells.set(spanId, problem);
    return { accepted: false, problem };
  }
  span.tml = trimmed;
  if (state.invalidCells.get(spanId) !== "ANCHOR_PENDING") {
    state.invalidCells.delete(spanId);
  }
  return { accepted: true, problem: null };
}

export function setSpeech(state: SessionState, spanId: string, speech: SpanJson["speech"]): void {
  const span = state.document?.spans.find((s) => s.id === spanId);
  if (span) {
    span.speech = speech;
    state.dirty = true;
  }
}

export function deleteSpan(state: SessionState, spanId: string): void {
  const document = state.document;
  if (!document) {
    return;
  }
  document.spans = document.spans.filter((s) => s.id !== spanId);
  state.invalidCells.delete(spanId);
  if (state.awaitingAnchor === spanId) {
    state.awaitingAnchor = null;
  }
  state.dirty = true;
}

export function enterBranchMode(state: SessionState, dir: "before" | "after"): void {
  state.mode = dir === "before" ? "branch_before" : "branch_after";
}

/**
 * Resolve the pending branch attachment with a clicked main-track slot.
 * Clicks while nothing is pending are ignored.
 */
export function setBranchAnchor(state: SessionState, slot: string): boolean {
  const document = state.document;
  if (!document || !state.awaitingAnchor) {
    return false;
  }
  if (tmlProblem(slot)) {
    return false;
  }
  const span = document.spans.find((s) => s.id === state.awaitingAnchor);
  if (!span || !span.rel_to) {
    return false;
  }
  span.rel_to.anchor = slot;
  state.invalidCells.delete(span.id);
  state.awaitingAnchor = null;
  state.dirty = true;
  return true;
}

export interface TimelineRow {
  span: SpanJson;
  lo: number;
  hi: number;
  timeline: string;
}

export interface TimelineElement {
  spans: SpanJson[];
  lo: number;
  hi: number;
  timeline: string;
  tml: string;
}

/**
 * Timeline elements in display order. Rows that share a timeline and an
 * index-marked position ("1%" twice) are pieces of one discontinuous
 * annotation and fuse into a single element.
 */
export function timelineElements(document: DocumentJson): TimelineElement[] {
  const elements = new Map<string, TimelineElement>();
  let serial = 0;
  for (const row of timelineRows(document)) {
    const tml = row.span.tml ?? "";
    const fusable = /[%#@&*+=~]$/.test(tml);
    const key = fusable ? `${row.timeline}|${tml}` : `one|${(serial += 1)}`;
    const existing = elements.get(key);
    if (existing) {
      existing.spans.push(row.span);
    } else {
      elements.set(key, {
        spans: [row.span],
        lo: row.lo,
        hi: row.hi,
        timeline: row.timeline,
        tml,
      });
    }
  }
  return [...elements.values()];
}

/** Positioned rows in timeline order, grouped main-track first. */
export function timelineRows(document: DocumentJson): TimelineRow[] {
  const rows: TimelineRow[] = [];
  for (const span of document.spans) {
    if (!span.tml || tmlProblem(span.tml)) {
      continue;
    }
    const value = parseTml(span.tml);
    rows.push({
      span,
      lo: value.lo,
      hi: value.hi,
      timeline: span.rel_to ? span.rel_to.branch : "main",
    });
  }
  rows.sort((a, b) => {
    if (a.timeline !== b.timeline) {
      if (a.timeline === "main") return -1;
      if (b.timeline === "main") return 1;
      return a.timeline < b.timeline ? -1 : 1;
    }
    if (a.lo !== b.lo) return a.lo - b.lo;
    if (a.hi !== b.hi) return a.hi - b.hi;
    const sa = a.span.ranges[0]?.[0] ?? 0;
    const sb = b.span.ranges[0]?.[0] ?? 0;
    return sa - sb;
  });
  return rows;
}
