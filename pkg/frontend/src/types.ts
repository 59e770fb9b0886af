export type CharRange = [number, number];

export interface EventJson {
  id: string;
  ranges: CharRange[];
}

export interface TimexJson {
  id: string;
  range: CharRange;
}

export type SpeechJson = "narrator" | "implicit" | { character: string };

export interface RelToJson {
  branch: string;
  dir: "before" | "after";
  anchor: string;
}

export type SpanTypeCode = "B" | "S" | "U" | "UL" | "UR" | "I";

export interface SpanJson {
  id: string;
  ranges: CharRange[];
  type: SpanTypeCode;
  tml?: string;
  rel_to?: RelToJson;
  speech: SpeechJson;
}

export interface DocumentJson {
  doc_id: string;
  annotator_id: string;
  text: string;
  events: EventJson[];
  timexes: TimexJson[];
  spans: SpanJson[];
}

export interface DiagnosticJson {
  code: string;
  severity: "ERROR" | "WARNING";
  subjects: string[];
  message: string;
}

export interface StoreEntryJson {
  doc_id: string;
  annotator_id: string;
  revision: number;
  n_events: number;
  n_spans: number;
}

export interface TlinkJson {
  source: string;
  target: string;
  relation: string;
  rule: string;
}

export interface RecordJson {
  event_id: string;
  etype: SpanTypeCode;
  generic: boolean;
  span_id: string;
  speech: string;
  timeline?: string;
  slot_lo?: string;
  slot_hi?: string;
  seq_index?: number | null;
  left_fuzzy?: boolean;
  right_fuzzy?: boolean;
  branch?: RelToJson;
}

export interface DeriveJson {
  doc_id: string;
  event_ids: string[];
  tlinks: TlinkJson[];
  timex_links: TlinkJson[];
  records: RecordJson[];
  uncovered: string[];
  diagnostics: DiagnosticJson[];
}

export interface SaveOk {
  status: "ok";
  revision: number;
  diagnostics: DiagnosticJson[];
}

export interface SaveConflict {
  status: "conflict";
  revision: number;
}

export type SaveResult = SaveOk | SaveConflict;
