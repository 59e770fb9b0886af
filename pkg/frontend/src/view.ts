/**
 * DOM rendering: text pane with selectable ranges, annotation table,
 * timeline tracks, and the post-save derivation preview. Every element
 * standing for an annotation carries data-span-id, which drives the
 * bidirectional hover highlighting.
 */
import { timelineElements } from "./state.js";
import type { SessionState } from "./state.js";
import type { DeriveJson, DocumentJson, SpanJson } from "./types.js";

const TYPE_LABELS: Record<string, string> = {
  B: "[B]",
  S: "[S]",
  U: "{U}",
  UL: "[U}",
  UR: "{U]",
  I: "[I]",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function surface(doc: DocumentJson, ranges: [number, number][]): string {
  return ranges.map(([s, e]) => doc.text.slice(s, e)).join(" … ");
}

function eventSurface(doc: DocumentJson, eventId: string): string {
  const event = doc.events.find((e) => e.id === eventId);
  return event ? surface(doc, event.ranges) : eventId;
}

/** Character positions where any span/event boundary falls. */
function boundaries(doc: DocumentJson): number[] {
  const cuts = new Set<number>([0, doc.text.length]);
  for (const span of doc.spans) {
    for (const [s, e] of span.ranges) {
      cuts.add(s);
      cuts.add(e);
    }
  }
  for (const event of doc.events) {
    for (const [s, e] of event.ranges) {
      cuts.add(s);
      cuts.add(e);
    }
  }
  return [...cuts].sort((a, b) => a - b);
}

export function renderText(container: HTMLElement, state: SessionState): void {
  container.textContent = "";
  const doc = state.document;
  if (!doc) {
    return;
  }
  const cuts = boundaries(doc);
  for (let i = 0; i + 1 < cuts.length; i += 1) {
    const start = cuts[i]!;
    const end = cuts[i + 1]!;
    const covering = doc.spans.filter((sp) =>
      sp.ranges.some(([s, e]) => s <= start && end <= e),
    );
    const inEvent = doc.events.some((ev) =>
      ev.ranges.some(([s, e]) => s <= start && end <= e),
    );
    const piece = el("span", "seg", doc.text.slice(start, end));
    piece.dataset.start = String(start);
    piece.dataset.end = String(end);
    if (inEvent) {
      piece.classList.add("event");
    }
    if (covering.length) {
      piece.classList.add("annotated");
      piece.dataset.spanId = covering[0]!.id;
      piece.dataset.spanIds = covering.map((sp) => sp.id).join(" ");
    }
    container.appendChild(piece);
  }
}

export function renderTable(container: HTMLElement, state: SessionState): void {
  container.textContent = "";
  const doc = state.document;
  if (!doc) {
    return;
  }
  const table = el("table", "ann-table");
  const head = el("tr");
  for (const title of ["id", "span", "type", "Tml", "Rel_to", "Speech", ""]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);

  for (const span of doc.spans) {
    const row = el("tr", "ann-row");
    row.dataset.spanId = span.id;
    const problem = state.invalidCells.get(span.id);
    if (problem) {
      row.classList.add("invalid");
    }

    row.appendChild(el("td", "cell-id", span.id));
    row.appendChild(el("td", "cell-text", surface(doc, span.ranges)));
    row.appendChild(el("td", "cell-type", TYPE_LABELS[span.type] ?? span.type));

    const tmlCell = el("td", "cell-tml");
    const input = el("input") as HTMLInputElement;
    input.value = span.tml ?? "";
    input.dataset.spanId = span.id;
    input.className = "tml-input";
    if (span.type === "I") {
      input.disabled = true;
      input.placeholder = "off timeline";
    }
    if (problem && problem !== "ANCHOR_PENDING") {
      input.classList.add("invalid");
      input.title = problem;
    }
    tmlCell.appendChild(input);
    if (problem) {
      tmlCell.appendChild(el("span", "cell-problem", problem));
    }
    row.appendChild(tmlCell);

    const relCell = el("td", "cell-rel");
    if (span.rel_to) {
      const dir = span.rel_to.dir === "before" ? "<]" : "[>";
      const anchor = span.rel_to.anchor || "?";
      relCell.textContent = `${span.rel_to.branch} ${dir} @${anchor}`;
    }
    row.appendChild(relCell);

    const speechCell = el("td", "cell-speech");
    const select = el("select") as HTMLSelectElement;
    select.dataset.spanId = span.id;
    select.className = "speech-select";
    for (const option of ["narrator", "character", "implicit"]) {
      const opt = el("option", undefined, option);
      opt.setAttribute("value", option);
      select.appendChild(opt);
    }
    const current = typeof span.speech === "string" ? span.speech : "character";
    select.value = current;
    speechCell.appendChild(select);
    if (typeof span.speech !== "string") {
      const name = el("input") as HTMLInputElement;
      name.value = span.speech.character;
      name.className = "speech-name";
      name.dataset.spanId = span.id;
      speechCell.appendChild(name);
    }
    row.appendChild(speechCell);

    const deleteCell = el("td", "cell-delete");
    const button = el("button", "delete-span", "×");
    button.dataset.spanId = span.id;
    deleteCell.appendChild(button);
    row.appendChild(deleteCell);

    table.appendChild(row);
  }
  container.appendChild(table);
}

export function renderTimeline(container: HTMLElement, state: SessionState): void {
  container.textContent = "";
  const doc = state.document;
  if (!doc) {
    return;
  }
  const elements = timelineElements(doc);
  const byTrack = new Map<string, typeof elements>();
  for (const element of elements) {
    const list = byTrack.get(element.timeline) ?? [];
    list.push(element);
    byTrack.set(element.timeline, list);
  }
  if (!byTrack.has("main")) {
    byTrack.set("main", []);
  }
  const trackNames = [...byTrack.keys()].sort((a, b) =>
    a === "main" ? -1 : b === "main" ? 1 : a < b ? -1 : 1,
  );

  for (const name of trackNames) {
    const track = el("div", "track");
    track.dataset.track = name;
    track.appendChild(el("span", "track-name", name));
    for (const element of byTrack.get(name) ?? []) {
      const pieces = element.spans
        .map((sp) => surface(doc, sp.ranges))
        .join(" … ");
      const first = element.spans[0]!;
      const chip = el("span", "slot-chip");
      chip.dataset.spanId = first.id;
      chip.dataset.spanIds = element.spans.map((sp) => sp.id).join(" ");
      chip.dataset.slot = element.tml;
      chip.textContent = `${element.tml} ${TYPE_LABELS[first.type] ?? ""} ${pieces}`;
      chip.title = pieces;
      track.appendChild(chip);
    }
    container.appendChild(track);
  }

  const off = doc.spans.filter((sp) => !sp.tml || sp.type === "I");
  if (off.length) {
    const track = el("div", "track off-track");
    track.dataset.track = "off-timeline";
    track.appendChild(el("span", "track-name", "off timeline"));
    for (const span of off) {
      const chip = el("span", "slot-chip off");
      chip.dataset.spanId = span.id;
      chip.textContent = `${TYPE_LABELS[span.type] ?? ""} ${surface(doc, span.ranges)}`;
      track.appendChild(chip);
    }
    container.appendChild(track);
  }
}

export function renderPreview(
  container: HTMLElement,
  doc: DocumentJson,
  derivation: DeriveJson,
): void {
  container.textContent = "";
  container.appendChild(
    el(
      "div",
      "preview-caption",
      `derived: ${derivation.tlinks.length} event links, ` +
        `${derivation.timex_links.length} timex links, ` +
        `${derivation.uncovered.length} uncovered`,
    ),
  );
  const tracks = new Map<string, DeriveJson["records"]>();
  for (const record of derivation.records) {
    const key = record.generic
      ? "states"
      : record.etype === "I"
        ? "irrealis"
        : record.timeline ?? "main";
    const list = tracks.get(key) ?? [];
    list.push(record);
    tracks.set(key, list);
  }
  const names = [...tracks.keys()].sort((a, b) => {
    const weight = (n: string) => (n === "main" ? 0 : n === "states" ? 2 : n === "irrealis" ? 3 : 1);
    return weight(a) - weight(b) || (a < b ? -1 : 1);
  });
  for (const name of names) {
    const track = el("div", "track preview-track");
    track.dataset.track = name;
    track.appendChild(el("span", "track-name", name));
    const records = tracks.get(name) ?? [];
    records.sort((a, b) => Number(a.slot_lo ?? 0) - Number(b.slot_lo ?? 0));
    for (const record of records) {
      const chip = el("span", "slot-chip");
      chip.dataset.eventId = record.event_id;
      chip.dataset.spanId = record.span_id;
      const slot = record.slot_lo !== undefined ? `@${record.slot_lo} ` : "";
      const seq = record.seq_index ? `.${record.seq_index}` : "";
      chip.textContent = `${slot}${TYPE_LABELS[record.etype] ?? ""}${seq} ${eventSurface(
        doc,
        record.event_id,
      )}`;
      track.appendChild(chip);
    }
    container.appendChild(track);
  }
}

/**
 * Bidirectional hover: every element carrying data-span-id lights up
 * with the other representations of the same annotation.
 */
export function wireHoverSync(root: HTMLElement): void {
  root.addEventListener("mouseover", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-span-id]");
    if (!target) {
      return;
    }
    const hovered = (target.dataset.spanIds ?? target.dataset.spanId ?? "").split(" ");
    for (const node of root.querySelectorAll<HTMLElement>("[data-span-id]")) {
      const ids = (node.dataset.spanIds ?? node.dataset.spanId ?? "").split(" ");
      node.classList.toggle("hl", ids.some((id) => hovered.includes(id)));
    }
  });
  root.addEventListener("mouseout", () => {
    for (const node of root.querySelectorAll<HTMLElement>(".hl")) {
      node.classList.remove("hl");
    }
  });
}
