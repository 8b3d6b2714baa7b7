/**
 * Bracket augmentation, byte-compatible with the toolkit that consumes the
 * exported files: the record for a sentence must have exactly one row per
 * augmented token, in the order this insertion produces.
 *
 * Rules: distinct spans of an element are bracketed once each; partial
 * overlaps within an element are an error; at a shared token boundary,
 * closing brackets come before opening ones (holder before expression when
 * both close or both open there).
 */

import { Sentence, Span } from "./corpus";

export const AUGMENT_MODES = ["original", "holders", "expressions", "full"] as const;
export type AugmentMode = (typeof AUGMENT_MODES)[number];

export const HOLDER_OPEN = "[<H]";
export const HOLDER_CLOSE = "[H>]";
export const EXP_OPEN = "[<E]";
export const EXP_CLOSE = "[E>]";
export const BRACKET_TOKENS = [HOLDER_OPEN, HOLDER_CLOSE, EXP_OPEN, EXP_CLOSE] as const;

const BRACKET_SET = new Set<string>(BRACKET_TOKENS);

export interface AugmentedSentence {
  tokens: string[];
  /** original token index -> augmented index */
  spanMap: number[];
  /** [augmented index, bracket token] in insertion order */
  inserted: Array<[number, string]>;
}

function gatherSpans(sentence: Sentence, element: "holder" | "expression"): Span[] {
  const distinct = new Map<string, Span>();
  for (const opinion of sentence.opinions) {
    for (const span of opinion[element]) distinct.set(`${span.start}:${span.end}`, span);
  }
  const spans = [...distinct.values()].sort((a, b) => a.start - b.start || a.end - b.end);
  for (let i = 1; i < spans.length; i++) {
    const a = spans[i - 1];
    const b = spans[i];
    if (b.start < a.end) {
      throw new Error(
        `overlapping ${element} bracket regions [${a.start},${a.end}) and [${b.start},${b.end})`);
    }
  }
  return spans;
}

export function insertTags(sentence: Sentence, mode: AugmentMode): AugmentedSentence {
  if (!AUGMENT_MODES.includes(mode)) {
    throw new Error(`unknown augment mode '${mode}'`);
  }
  for (const token of sentence.tokens) {
    if (BRACKET_SET.has(token)) {
      throw new Error(`sentence already contains bracket token '${token}'`);
    }
  }
  const holders = mode === "holders" || mode === "full" ? gatherSpans(sentence, "holder") : [];
  const expressions =
    mode === "expressions" || mode === "full" ? gatherSpans(sentence, "expression") : [];

  const opens = new Map<number, string[]>();
  const closes = new Map<number, string[]>();
  const push = (events: Map<number, string[]>, at: number, bracket: string) => {
    const queue = events.get(at);
    if (queue) queue.push(bracket);
    else events.set(at, [bracket]);
  };
  for (const span of holders) {
    push(opens, span.start, HOLDER_OPEN);
    push(closes, span.end, HOLDER_CLOSE);
  }
  for (const span of expressions) {
    push(opens, span.start, EXP_OPEN);
    push(closes, span.end, EXP_CLOSE);
  }

  const tokens: string[] = [];
  const spanMap: number[] = [];
  const inserted: Array<[number, string]> = [];
  for (let boundary = 0; boundary <= sentence.tokens.length; boundary++) {
    for (const bracket of closes.get(boundary) ?? []) {
      inserted.push([tokens.length, bracket]);
      tokens.push(bracket);
    }
    for (const bracket of opens.get(boundary) ?? []) {
      inserted.push([tokens.length, bracket]);
      tokens.push(bracket);
    }
    if (boundary < sentence.tokens.length) {
      spanMap.push(tokens.length);
      tokens.push(sentence.tokens[boundary]);
    }
  }
  return { tokens, spanMap, inserted };
}
