/**
 * Deterministic stand-in for a pretrained contextual encoder.
 *
 * Tokens are split into wordpiece-style pieces (continuations carry a "##"
 * prefix), each piece hashes to a fixed unit float32 vector, and a one-hop
 * neighbor mix makes every output row depend on its context. The leading
 * classification slot mixes over the whole kept sequence instead, so the
 * sequence-level vector (first position, by convention) reflects all of it.
 *
 * Everything is pure arithmetic on the input strings: no weights on disk,
 * no nondeterminism, so two runs over the same job are bit-identical.
 */

import { BRACKET_TOKENS } from "./augment";

export const ENCODER_REVISION = "r1";

const CLS_TOKEN = "[CLS]";
const SEP_TOKEN = "[SEP]";
const PIECE_WIDTH = 4;
const NEIGHBOR_WEIGHT = 0.5;

/** Added vocabulary: never split, each gets its own dedicated vector. */
const ATOMIC_TOKENS = new Set<string>([CLS_TOKEN, SEP_TOKEN, ...BRACKET_TOKENS]);

export type SubtokenPooling = "first" | "mean";

export interface EncodeOptions {
  maxLen?: number;
  pooling?: SubtokenPooling;
}

export interface EncodeResult {
  /** n * d, row-major; one row per input token, zeros for truncated tails. */
  tokenVectors: Float32Array;
  sentenceVector: Float32Array;
  /** pieces dropped by the max length cut (0 when nothing was cut) */
  cutPieces: number;
  /** tokens that lost at least one piece to the cut */
  cutTokens: number;
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (const byte of Buffer.from(text, "utf8")) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function normalize(v: Float32Array): void {
  let sum = 0;
  for (let k = 0; k < v.length; k++) sum += v[k] * v[k];
  const norm = Math.sqrt(sum);
  if (norm === 0) return;
  for (let k = 0; k < v.length; k++) v[k] = Math.fround(v[k] / norm);
}

export class HashPieceEncoder {
  readonly name: string;
  readonly dimension: number;
  readonly revision = ENCODER_REVISION;
  private readonly pieceCache = new Map<string, Float32Array>();

  constructor(dimension: number) {
    if (!Number.isInteger(dimension) || dimension < 1) {
      throw new Error(`encoder dimension must be a positive integer, got ${dimension}`);
    }
    this.dimension = dimension;
    this.name = `hashpiece-${dimension}`;
  }

  /** Parse an encoder name of the form "hashpiece-<d>". */
  static fromName(name: string): HashPieceEncoder {
    const match = /^hashpiece-(\d+)$/.exec(name);
    if (!match) {
      throw new Error(`unknown encoder '${name}'; available: hashpiece-<d>, e.g. hashpiece-768`);
    }
    return new HashPieceEncoder(parseInt(match[1], 10));
  }

  /** Fixed-width chunks over code points; added vocabulary stays whole. */
  pieces(token: string): string[] {
    if (ATOMIC_TOKENS.has(token)) return [token];
    const chars = Array.from(token);
    if (chars.length <= PIECE_WIDTH) return [token];
    const out = [chars.slice(0, PIECE_WIDTH).join("")];
    for (let i = PIECE_WIDTH; i < chars.length; i += PIECE_WIDTH) {
      out.push("##" + chars.slice(i, i + PIECE_WIDTH).join(""));
    }
    return out;
  }

  private pieceVector(piece: string): Float32Array {
    const cached = this.pieceCache.get(piece);
    if (cached) return cached;
    const rand = mulberry32(fnv1a(`${this.revision}:${piece}`));
    const v = new Float32Array(this.dimension);
    for (let k = 0; k < this.dimension; k++) v[k] = Math.fround(2 * rand() - 1);
    normalize(v);
    this.pieceCache.set(piece, v);
    return v;
  }

  encode(tokens: readonly string[], options: EncodeOptions = {}): EncodeResult {
    const maxLen = options.maxLen ?? 128;
    const pooling = options.pooling ?? "first";
    if (!Number.isInteger(maxLen) || maxLen < 2) {
      throw new Error(`max length must be an integer >= 2, got ${maxLen}`);
    }
    if (tokens.length === 0) {
      throw new Error("cannot encode an empty token sequence");
    }

    // flatten to one piece sequence, classification slot first
    const pieceStrings: string[] = [CLS_TOKEN];
    const ranges: Array<[number, number]> = [];
    for (const token of tokens) {
      const ps = this.pieces(token);
      ranges.push([pieceStrings.length, pieceStrings.length + ps.length]);
      pieceStrings.push(...ps);
    }
    const total = pieceStrings.length;
    const kept = Math.min(total, maxLen);
    const d = this.dimension;
    const base = pieceStrings.slice(0, kept).map((p) => this.pieceVector(p));

    const ctx: Float32Array[] = new Array(kept);
    for (let i = 1; i < kept; i++) {
      const row = new Float32Array(d);
      const left = base[i - 1];
      const right = i + 1 < kept ? base[i + 1] : null;
      for (let k = 0; k < d; k++) {
        let x = base[i][k] + NEIGHBOR_WEIGHT * left[k];
        if (right) x += NEIGHBOR_WEIGHT * right[k];
        row[k] = Math.fround(x);
      }
      normalize(row);
      ctx[i] = row;
    }
    // position 0 mixes the mean of everything kept, not just its neighbor
    const head = new Float32Array(d);
    for (let k = 0; k < d; k++) {
      let mean = 0;
      for (let i = 1; i < kept; i++) mean += base[i][k];
      head[k] = Math.fround(base[0][k] + (NEIGHBOR_WEIGHT * mean) / (kept - 1));
    }
    normalize(head);
    ctx[0] = head;

    const tokenVectors = new Float32Array(tokens.length * d);
    let cutTokens = 0;
    for (let t = 0; t < tokens.length; t++) {
      const [lo, hi] = ranges[t];
      if (hi > kept) cutTokens++;
      if (lo >= kept) continue; // fully cut: row stays zero
      if (pooling === "first") {
        tokenVectors.set(ctx[lo], t * d);
      } else {
        const stop = Math.min(hi, kept);
        for (let k = 0; k < d; k++) {
          let acc = 0;
          for (let i = lo; i < stop; i++) acc += ctx[i][k];
          tokenVectors[t * d + k] = Math.fround(acc / (stop - lo));
        }
      }
    }
    return {
      tokenVectors,
      sentenceVector: ctx[0].slice(),
      cutPieces: total - kept,
      cutTokens,
    };
  }
}
