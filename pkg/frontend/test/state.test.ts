import { beforeEach, describe, expect, it } from "vitest";

import {
  canSave,
  createSpan,
  editTml,
  emptySession,
  enterBranchMode,
  loadDocument,
  nextIntegerSlot,
  setBranchAnchor,
  timelineElements,
  timelineRows,
} from "../src/state.js";
import type { SessionState } from "../src/state.js";
import type { DocumentJson } from "../src/types.js";

function blankDocument(): DocumentJson {
  return {
    doc_id: "d1",
    annotator_id: "ui",
    text: "aaa bbb ccc ddd eee",
    events: [
      { id: "e1", ranges: [[0, 3]] },
      { id: "e2", ranges: [[4, 7]] },
      { id: "e3", ranges: [[8, 11]] },
    ],
    timexes: [],
    spans: [],
  };
}

describe("session state", () => {
  let state: SessionState;

  beforeEach(() => {
    state = emptySession();
    loadDocument(state, blankDocument(), 1);
  });

  it("refuses edits before a document is loaded", () => {
    const fresh = emptySession();
    expect(createSpan(fresh, "B").problem).toBe("NO_SELECTION");
    expect(editTml(fresh, "s1", "2").problem).toBe("NO_DOCUMENT");
  });

  it("auto-fills the first bounded span with position 1", () => {
    state.selection = [0, 3];
    const { span } = createSpan(state, "B");
    expect(span!.tml).toBe("1");
    expect(state.dirty).toBe(true);
  });

  it("auto-fills the next integer after the occupied slots", () => {
    const doc = state.document!;
    doc.spans.push(
      { id: "x1", ranges: [[0, 3]], type: "B", tml: "1", speech: "narrator" },
      { id: "x2", ranges: [[4, 7]], type: "B", tml: "2", speech: "narrator" },
      { id: "x3", ranges: [[8, 11]], type: "S", tml: "3", speech: "narrator" },
    );
    expect(nextIntegerSlot(doc.spans)).toBe(4);
    state.selection = [12, 15];
    const { span } = createSpan(state, "S");
    expect(span!.tml).toBe("4");
  });

  it("fractional insertions do not bump the next integer past them", () => {
    const doc = state.document!;
    doc.spans.push({ id: "x1", ranges: [[0, 3]], type: "B", tml: "4.5", speech: "narrator" });
    expect(nextIntegerSlot(doc.spans)).toBe(5);
  });

  it("irrealis spans carry no position", () => {
    state.selection = [0, 3];
    const { span } = createSpan(state, "I");
    expect(span!.tml).toBeUndefined();
    expect(editTml(state, span!.id, "3").problem).toBe("IRREALIS_HAS_POSITION");
  });

  it("partially bounded spans stay flagged until anchored", () => {
    state.selection = [0, 3];
    const { span } = createSpan(state, "UL");
    expect(state.invalidCells.get(span!.id)).toBe("MISSING_POSITION");
    expect(canSave(state)).toBe(false);
    expect(editTml(state, span!.id, "2").accepted).toBe(true);
    expect(canSave(state)).toBe(true);
  });

  it("a fractional edit reorders the timeline without renumbering", () => {
    const doc = state.document!;
    for (const [i, tml] of ["1", "2", "3"].entries()) {
      doc.spans.push({
        id: `x${i}`,
        ranges: [[i * 4, i * 4 + 3]],
        type: "B",
        tml,
        speech: "narrator",
      });
    }
    const result = editTml(state, "x0", "4.5");
    expect(result.accepted).toBe(true);
    expect(timelineRows(doc).map((r) => r.span.id)).toEqual(["x1", "x2", "x0"]);
    expect(doc.spans.map((s) => s.tml)).toEqual(["4.5", "2", "3"]);
  });

  it("rejects grammar violations with the server's code and blocks saving", () => {
    const doc = state.document!;
    doc.spans.push({ id: "x0", ranges: [[0, 3]], type: "B", tml: "1", speech: "narrator" });
    const result = editTml(state, "x0", "0");
    expect(result.problem).toBe("POSITION_BELOW_ONE");
    expect(state.invalidCells.get("x0")).toBe("POSITION_BELOW_ONE");
    expect(canSave(state)).toBe(false);
    expect(doc.spans[0]!.tml).toBe("0"); // raw text stays visible for fixing
  });

  it("branch mode assigns a fresh branch and waits for an anchor", () => {
    const doc = state.document!;
    doc.spans.push({ id: "x0", ranges: [[0, 3]], type: "B", tml: "1", speech: "narrator" });
    enterBranchMode(state, "before");
    state.selection = [4, 7];
    const { span } = createSpan(state, "B");
    expect(span!.rel_to).toEqual({ branch: "b1", dir: "before", anchor: "" });
    expect(state.awaitingAnchor).toBe(span!.id);
    expect(canSave(state)).toBe(false);
    expect(span!.tml).toBe("1"); // branch timeline numbers independently

    expect(setBranchAnchor(state, "1")).toBe(true);
    expect(span!.rel_to!.anchor).toBe("1");
    expect(canSave(state)).toBe(true);
    expect(state.mode).toBe("normal");
  });

  it("anchor clicks with nothing pending are ignored", () => {
    expect(setBranchAnchor(state, "1")).toBe(false);
  });

  it("warns when the selection overlaps a span of another type", () => {
    const doc = state.document!;
    doc.spans.push({ id: "x0", ranges: [[0, 7]], type: "B", tml: "1", speech: "narrator" });
    state.selection = [4, 11];
    const conflicting = createSpan(state, "U");
    expect(conflicting.warning).toBe("OVERLAPS_CONFLICTING_SPAN");
    state.selection = [12, 15];
    const clean = createSpan(state, "U");
    expect(clean.warning).toBeNull();
  });

  it("rows sharing an indexed position fuse into one timeline element", () => {
    const doc = state.document!;
    doc.spans.push(
      { id: "x0", ranges: [[0, 3]], type: "B", tml: "1%", speech: "narrator" },
      { id: "x1", ranges: [[8, 11]], type: "B", tml: "1%", speech: "narrator" },
      { id: "x2", ranges: [[4, 7]], type: "B", tml: "1", speech: "narrator" },
    );
    const elements = timelineElements(doc);
    expect(elements.length).toBe(2);
    const fused = elements.find((e) => e.tml === "1%")!;
    expect(fused.spans.map((s) => s.id)).toEqual(["x0", "x1"]);
  });
});
