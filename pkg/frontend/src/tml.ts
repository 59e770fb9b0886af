/**
 * Client-side mirror of the timeline-position grammar:
 *
 *   position := NUMBER ("-" NUMBER)? INDEX?
 *   NUMBER   := digits ("." digits)?
 *   INDEX    := one of % # @ & * + = ~
 *
 * The server stays the authority; this mirror exists so invalid cells
 * light up before a round trip. Error codes match the server's.
 */

export const INDEX_CHARS = "%#@&*+=~";

export interface TmlValue {
  lo: number;
  hi: number;
  indexChar: string | null;
}

export class TmlParseError extends Error {
  constructor(public code: string, message: string) {
    super(message);
    this.name = "TmlParseError";
  }
}

const NUMBER_RE = /^\d+(?:\.\d+)?/;

export function parseTml(raw: string): TmlValue {
  const text = raw.trim();
  if (!text) {
    throw new TmlParseError("EMPTY_TML", "position is empty");
  }
  const first = NUMBER_RE.exec(text);
  if (!first) {
    throw new TmlParseError("MALFORMED_NUMBER", `position must start with a number: ${raw}`);
  }
  const lo = Number(first[0]);
  let rest = text.slice(first[0].length);
  let hi = lo;
  if (rest.startsWith("-")) {
    const second = NUMBER_RE.exec(rest.slice(1));
    if (!second) {
      throw new TmlParseError("MALFORMED_NUMBER", `extent needs a number after '-': ${raw}`);
    }
    hi = Number(second[0]);
    rest = rest.slice(1 + second[0].length);
  }
  let indexChar: string | null = null;
  if (rest.length > 1) {
    throw new TmlParseError("MULTIPLE_INDEX_CHARS", `at most one index character: ${raw}`);
  }
  if (rest.length === 1) {
    if (!INDEX_CHARS.includes(rest)) {
      throw new TmlParseError("INVALID_INDEX_CHAR", `index character must be one of ${INDEX_CHARS}: ${raw}`);
    }
    indexChar = rest;
  }
  if (lo < 1) {
    throw new TmlParseError("POSITION_BELOW_ONE", `positions start at 1: ${raw}`);
  }
  if (hi < lo) {
    throw new TmlParseError("RANGE_REVERSED", `extent runs backwards: ${raw}`);
  }
  return { lo, hi, indexChar };
}

export function formatTml(value: TmlValue): string {
  const num = (n: number) => String(n);
  let out = num(value.lo);
  if (value.hi !== value.lo) {
    out += `-${num(value.hi)}`;
  }
  if (value.indexChar) {
    out += value.indexChar;
  }
  return out;
}

/** Null for valid input, otherwise the diagnostic code. */
export function tmlProblem(raw: string): string | null {
  try {
    parseTml(raw);
    return null;
  } catch (err) {
    if (err instanceof TmlParseError) {
      return err.code;
    }
    throw err;
  }
}
