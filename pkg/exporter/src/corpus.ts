/**
 * Reader for the canonical opinion corpus JSON: a named, split corpus of
 * sentences, each a token list plus opinions whose holder/target/expression
 * spans are half-open token intervals [start, end).
 *
 * Validation stops at the first problem and reports the JSON path, so a bad
 * corpus fails loudly before anything is encoded.
 */

export interface Span {
  start: number;
  end: number;
}

export interface Opinion {
  holder: Span[];
  target: Span[];
  expression: Span[];
  polarity: string;
  intensity: string | null;
}

export interface Sentence {
  sentId: string;
  tokens: string[];
  opinions: Opinion[];
}

export interface Corpus {
  name: string;
  split: string;
  sentences: Sentence[];
}

const POLARITIES = new Set(["positive", "negative", "neutral", "conflict"]);
const SPLITS = new Set(["train", "dev", "test", "unsplit"]);

export class CorpusFormatError extends Error {}

function fail(path: string, message: string): never {
  throw new CorpusFormatError(`${path}: ${message}`);
}

function parseSpans(raw: unknown, n: number, path: string): Span[] {
  if (raw === undefined) return [];
  if (!Array.isArray(raw)) fail(path, "expected a list of [start, end] pairs");
  const spans: Span[] = [];
  raw.forEach((pair, j) => {
    if (!Array.isArray(pair) || pair.length !== 2) {
      fail(`${path}[${j}]`, "expected a [start, end] pair");
    }
    const [a, b] = pair as [unknown, unknown];
    if (!Number.isInteger(a) || !Number.isInteger(b)) {
      fail(`${path}[${j}]`, "span indices must be integers");
    }
    const start = a as number;
    const end = b as number;
    if (start < 0 || start >= end || end > n) {
      fail(`${path}[${j}]`, `invalid span [${start}, ${end}) on a ${n}-token sentence`);
    }
    spans.push({ start, end });
  });
  for (let j = 1; j < spans.length; j++) {
    if (spans[j].start < spans[j - 1].end) fail(path, "unsorted or overlapping spans");
  }
  return spans;
}

function parseOpinion(raw: unknown, n: number, path: string): Opinion {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(path, "opinion must be an object");
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.polarity !== "string" || !POLARITIES.has(obj.polarity)) {
    fail(`${path}.polarity`, `unknown polarity ${JSON.stringify(obj.polarity)}`);
  }
  if (obj.intensity !== undefined && obj.intensity !== null && typeof obj.intensity !== "string") {
    fail(`${path}.intensity`, "intensity must be a string or null");
  }
  const target = parseSpans(obj.target, n, `${path}.target`);
  if (target.length === 0) fail(`${path}.target`, "target list must be non-empty");
  return {
    holder: parseSpans(obj.holder, n, `${path}.holder`),
    target,
    expression: parseSpans(obj.expression, n, `${path}.expression`),
    polarity: obj.polarity,
    intensity: (obj.intensity as string | undefined) ?? null,
  };
}

function parseSentence(raw: unknown, path: string, seen: Set<string>): Sentence {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(path, "sentence must be an object");
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.sent_id !== "string") fail(`${path}.sent_id`, "missing or non-string");
  if (seen.has(obj.sent_id)) fail(`${path}.sent_id`, `duplicate sent_id '${obj.sent_id}'`);
  seen.add(obj.sent_id);
  const tokens = obj.tokens;
  if (!Array.isArray(tokens) || tokens.length === 0 || !tokens.every((t) => typeof t === "string")) {
    fail(`${path}.tokens`, "tokens must be a non-empty list of strings");
  }
  const rawOpinions = obj.opinions ?? [];
  if (!Array.isArray(rawOpinions)) fail(`${path}.opinions`, "opinions must be a list");
  const opinions = rawOpinions.map((o, k) =>
    parseOpinion(o, tokens.length, `${path}.opinions[${k}]`));
  return { sentId: obj.sent_id, tokens: tokens as string[], opinions };
}

export function parseCorpus(text: string): Corpus {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (e) {
    throw new CorpusFormatError(`malformed JSON: ${(e as Error).message}`);
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    fail("$", "top level must be an object");
  }
  const doc = data as Record<string, unknown>;
  if (typeof doc.name !== "string") fail("name", "missing or non-string");
  if (typeof doc.split !== "string" || !SPLITS.has(doc.split)) {
    fail("split", `unknown split ${JSON.stringify(doc.split)}`);
  }
  if (!Array.isArray(doc.sentences)) fail("sentences", "missing or non-list");
  const seen = new Set<string>();
  const sentences = doc.sentences.map((s, i) => parseSentence(s, `sentences[${i}]`, seen));
  return { name: doc.name, split: doc.split, sentences };
}
