/**
 * FGSE embedding container, little-endian throughout:
 *
 *   "FGSE" | u32 version=1 | u32 d | u32 record count
 *   per record: u32 id length | sent_id utf-8 | u32 n
 *               | n*d float32 token rows | d float32 sentence vector
 *
 * Files are written atomically (temp file in the same directory, then
 * rename), so a crashed export never leaves a half-written file behind.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export const FGSE_MAGIC = "FGSE";
export const FGSE_VERSION = 1;

export interface EmbeddingRecord {
  sentId: string;
  /** n * d, row-major */
  tokenVectors: Float32Array;
  sentenceVector: Float32Array;
}

export function atomicWrite(outPath: string, data: Buffer | string): void {
  const tmp = path.join(path.dirname(outPath), path.basename(outPath) + ".tmp");
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, outPath);
}

export function packEmbeddings(dimension: number, records: EmbeddingRecord[]): Buffer {
  if (!Number.isInteger(dimension) || dimension < 1) {
    throw new Error(`dimension must be a positive integer, got ${dimension}`);
  }
  let size = 16;
  const ids: Buffer[] = [];
  for (const rec of records) {
    if (rec.tokenVectors.length % dimension !== 0 || rec.sentenceVector.length !== dimension) {
      throw new Error(`record '${rec.sentId}': vector lengths do not match d=${dimension}`);
    }
    const id = Buffer.from(rec.sentId, "utf8");
    ids.push(id);
    size += 4 + id.length + 4 + 4 * rec.tokenVectors.length + 4 * dimension;
  }

  const buf = Buffer.alloc(size);
  buf.write(FGSE_MAGIC, 0, "ascii");
  buf.writeUInt32LE(FGSE_VERSION, 4);
  buf.writeUInt32LE(dimension, 8);
  buf.writeUInt32LE(records.length, 12);
  let off = 16;
  records.forEach((rec, i) => {
    off = buf.writeUInt32LE(ids[i].length, off);
    off += ids[i].copy(buf, off);
    off = buf.writeUInt32LE(rec.tokenVectors.length / dimension, off);
    for (let k = 0; k < rec.tokenVectors.length; k++) {
      off = buf.writeFloatLE(rec.tokenVectors[k], off);
    }
    for (let k = 0; k < dimension; k++) {
      off = buf.writeFloatLE(rec.sentenceVector[k], off);
    }
  });
  return buf;
}

export function writeEmbeddings(
  outPath: string, dimension: number, records: EmbeddingRecord[]): void {
  atomicWrite(outPath, packEmbeddings(dimension, records));
}

export interface ReadResult {
  dimension: number;
  records: Map<string, { n: number; tokenVectors: Float32Array; sentenceVector: Float32Array }>;
}

export function readEmbeddings(filePath: string): ReadResult {
  const data = fs.readFileSync(filePath);
  if (data.length < 16 || data.toString("ascii", 0, 4) !== FGSE_MAGIC) {
    throw new Error(`${filePath}: not an FGSE file`);
  }
  const version = data.readUInt32LE(4);
  if (version !== FGSE_VERSION) {
    throw new Error(`${filePath}: unsupported version ${version}`);
  }
  const d = data.readUInt32LE(8);
  const count = data.readUInt32LE(12);

  let off = 16;
  const need = (nbytes: number) => {
    if (off + nbytes > data.length) {
      throw new Error(`${filePath}: truncated at byte ${off}`);
    }
  };
  const records: ReadResult["records"] = new Map();
  for (let r = 0; r < count; r++) {
    need(4);
    const idLen = data.readUInt32LE(off);
    off += 4;
    need(idLen + 4);
    const sentId = data.toString("utf8", off, off + idLen);
    off += idLen;
    const n = data.readUInt32LE(off);
    off += 4;
    need(4 * n * d + 4 * d);
    const tokenVectors = new Float32Array(n * d);
    for (let k = 0; k < n * d; k++, off += 4) tokenVectors[k] = data.readFloatLE(off);
    const sentenceVector = new Float32Array(d);
    for (let k = 0; k < d; k++, off += 4) sentenceVector[k] = data.readFloatLE(off);
    if (records.has(sentId)) {
      throw new Error(`${filePath}: duplicate sent_id '${sentId}'`);
    }
    records.set(sentId, { n, tokenVectors, sentenceVector });
  }
  if (off !== data.length) {
    throw new Error(`${filePath}: ${data.length - off} trailing bytes`);
  }
  return { dimension: d, records };
}
