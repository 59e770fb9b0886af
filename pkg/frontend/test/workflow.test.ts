/**
 * Scripted browser-style workflow against the real service: load the
 * travellers fable bundle, annotate with buttons, keyboard and anchor
 * clicks, then save and render the derivation preview.
 */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { setupApp } from "../src/main.js";
import type { SessionState } from "../src/state.js";
import type { DocumentJson } from "../src/types.js";
import { startServer, type RunningServer } from "./server.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const PREMARK = JSON.parse(
  readFileSync(
    join(HERE, "..", "..", "tests", "fixtures", "two_travellers.premark.json"),
    "utf-8",
  ),
);

let server: RunningServer;
let api: ApiClient;
let root: HTMLElement;
let state: SessionState;

async function until(check: () => boolean, what: string): Promise<void> {
  const deadline = Date.now() + 10_000;
  while (!check()) {
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((r) => setTimeout(r, 25));
  }
}

function textPane(): HTMLElement {
  return root.querySelector<HTMLElement>("#text-pane")!;
}

/** Build a real DOM selection over a substring of the document text. */
function selectText(substring: string): void {
  const doc = state.document as DocumentJson;
  const start = doc.text.indexOf(substring);
  expect(start).toBeGreaterThanOrEqual(0);
  const end = start + substring.length;
  const segments = [...textPane().querySelectorAll<HTMLElement>(".seg")];
  const startSeg = segments.find(
    (s) => Number(s.dataset.start) <= start && start < Number(s.dataset.end),
  )!;
  const endSeg = segments.find(
    (s) => Number(s.dataset.start) < end && end <= Number(s.dataset.end),
  )!;
  const range = document.createRange();
  range.setStart(startSeg.firstChild!, start - Number(startSeg.dataset.start));
  range.setEnd(endSeg.firstChild!, end - Number(endSeg.dataset.start));
  const selection = window.getSelection()!;
  selection.removeAllRanges();
  selection.addRange(range);
  textPane().dispatchEvent(new MouseEvent("mouseup", { bubbles: true }));
}

function clickType(code: string): void {
  root.querySelector<HTMLButtonElement>(`#toolbar button[data-type="${code}"]`)!.click();
}

function tmlValues(): (string | undefined)[] {
  return (state.document as DocumentJson).spans.map((s) => s.tml);
}

function timelineChipIds(track = "main"): string[] {
  return [
    ...root.querySelectorAll<HTMLElement>(
      `#timeline-pane .track[data-track="${track}"] .slot-chip`,
    ),
  ].map((chip) => chip.dataset.spanId!);
}

beforeAll(async () => {
  server = await startServer();
  api = new ApiClient(server.base);
  const annotation = { ...PREMARK, annotator_id: "ui", spans: [] };
  const seeded = await fetch(
    `${server.base}/api/docs/${PREMARK.doc_id}/annotation`,
    {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(annotation),
    },
  );
  expect(seeded.status).toBe(200);

  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  state = setupApp(root, api);
}, 60_000);

afterAll(() => {
  server?.stop();
});

describe("annotator workflow on the fable bundle", () => {
  it("lists and loads the seeded bundle", async () => {
    const picker = root.querySelector<HTMLSelectElement>("#doc-picker")!;
    await until(() => picker.options.length > 1, "document listing");
    picker.value = picker.options[1]!.value;
    picker.dispatchEvent(new Event("change", { bubbles: true }));
    await until(() => state.document !== null, "document load");
    expect(state.document!.doc_id).toBe("two-travellers");
    expect(state.document!.events.length).toBe(18);
    expect(textPane().textContent).toContain("Two Travellers");
  });

  it("creating an S span auto-fills the next integer position", () => {
    selectText(
      "one made for a tree at the side of the road, and climbed up into the branches and hid there",
    );
    clickType("S");
    expect(tmlValues()).toEqual(["1"]);

    selectText("The Bear came up and sniffed all round him");
    clickType("S");
    expect(tmlValues()).toEqual(["1", "2"]);

    selectText("took him for a corpse");
    clickType("B");
    expect(tmlValues()).toEqual(["1", "2", "3"]);
  });

  it("supports single-key shortcuts", () => {
    selectText("went away");
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "b", bubbles: true }));
    expect(tmlValues()).toEqual(["1", "2", "3", "4"]);
  });

  it("an irrealis span disables its position cell", () => {
    selectText("will not touch a dead body");
    clickType("I");
    const spans = state.document!.spans;
    const irrealis = spans[spans.length - 1]!;
    expect(irrealis.tml).toBeUndefined();
    const input = root.querySelector<HTMLInputElement>(
      `.tml-input[data-span-id="${irrealis.id}"]`,
    )!;
    expect(input.disabled).toBe(true);
  });

  it("entering 4.5 reorders the timeline without renumbering other rows", () => {
    const spans = state.document!.spans;
    const first = spans[0]!; // the S span at position 1
    const before = timelineChipIds();
    expect(before[0]).toBe(first.id);

    const input = root.querySelector<HTMLInputElement>(
      `.tml-input[data-span-id="${first.id}"]`,
    )!;
    input.value = "4.5";
    input.dispatchEvent(new Event("change", { bubbles: true }));

    const after = timelineChipIds();
    expect(after[after.length - 1]).toBe(first.id);
    expect(after.slice(0, -1)).toEqual(before.slice(1));
    const others = state.document!.spans.filter((s) => s.id !== first.id && s.tml);
    expect(others.map((s) => s.tml)).toEqual(["2", "3", "4"]);
  });

  it("rejects grammar violations inline and blocks saving", () => {
    const spans = state.document!.spans;
    const target = spans[1]!;
    const input = root.querySelector<HTMLInputElement>(
      `.tml-input[data-span-id="${target.id}"]`,
    )!;
    input.value = "0";
    input.dispatchEvent(new Event("change", { bubbles: true }));
    expect(state.invalidCells.get(target.id)).toBe("POSITION_BELOW_ONE");
    expect(root.querySelector<HTMLButtonElement>("#save")!.disabled).toBe(true);

    input.value = "2";
    const fresh = root.querySelector<HTMLInputElement>(
      `.tml-input[data-span-id="${target.id}"]`,
    )!;
    fresh.value = "2";
    fresh.dispatchEvent(new Event("change", { bubbles: true }));
    expect(state.invalidCells.size).toBe(0);
  });

  it("branch mode yields an anchored rel_to record via a timeline click", () => {
    root.querySelector<HTMLButtonElement>("#branch-before")!.click();
    selectText("Before he could see them them");
    clickType("B");
    const spans = state.document!.spans;
    const branched = spans[spans.length - 1]!;
    expect(branched.rel_to).toMatchObject({ branch: "b1", dir: "before" });
    expect(state.awaitingAnchor).toBe(branched.id);

    const mainChips = root.querySelectorAll<HTMLElement>(
      '#timeline-pane .track[data-track="main"] .slot-chip',
    );
    expect(mainChips.length).toBeGreaterThan(0);
    mainChips[0]!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(branched.rel_to!.anchor).not.toBe("");
    expect(state.awaitingAnchor).toBeNull();
  });

  it("hover on a timeline chip highlights its table row", () => {
    const chip = root.querySelector<HTMLElement>("#timeline-pane .slot-chip")!;
    chip.dispatchEvent(new MouseEvent("mouseover", { bubbles: true }));
    const spanId = chip.dataset.spanId!;
    const row = root.querySelector<HTMLElement>(`.ann-row[data-span-id="${spanId}"]`)!;
    expect(row.classList.contains("hl")).toBe(true);
    chip.dispatchEvent(new MouseEvent("mouseout", { bubbles: true }));
    expect(row.classList.contains("hl")).toBe(false);
  });

  it("save is accepted by the server and the preview shows both tracks", async () => {
    root.querySelector<HTMLButtonElement>("#save")!.click();
    await until(() => state.dirty === false, "save round trip");
    expect(state.revision).toBe(2);

    const errors = [
      ...root.querySelectorAll<HTMLElement>("#diagnostics-pane .diag.error"),
    ];
    expect(errors).toEqual([]);

    await until(
      () => root.querySelectorAll("#preview-pane .preview-track").length >= 2,
      "derivation preview",
    );
    const tracks = [
      ...root.querySelectorAll<HTMLElement>("#preview-pane .preview-track"),
    ].map((t) => t.dataset.track);
    expect(tracks).toContain("main");
    expect(tracks).toContain("b1");
  });

  it("a stale revision is reported as a conflict", async () => {
    const result = await api.saveAnnotation(state.document!, 1);
    expect(result.status).toBe("conflict");
    expect(result.revision).toBe(2);
  });

  it("the saved annotation derives on the server with rule provenance", async () => {
    const derived = await api.derive("two-travellers", "ui");
    const covered = derived.records.length;
    expect(derived.tlinks.length).toBe((covered * (covered - 1)) / 2);
    expect(derived.tlinks.every((link) => link.rule.length > 0)).toBe(true);
    expect(derived.records.some((r) => r.timeline === "b1")).toBe(true);
  });
});
