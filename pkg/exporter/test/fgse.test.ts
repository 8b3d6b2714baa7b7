import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { EmbeddingRecord, packEmbeddings, readEmbeddings, writeEmbeddings } from "../src/fgse";

let dir: string;
beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "fgse-"));
});
afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function record(sentId: string, n: number, d: number, fill = 1): EmbeddingRecord {
  const tokenVectors = new Float32Array(n * d);
  for (let k = 0; k < tokenVectors.length; k++) tokenVectors[k] = Math.fround(fill + k * 0.1);
  const sentenceVector = new Float32Array(d);
  for (let k = 0; k < d; k++) sentenceVector[k] = Math.fround(-fill - k * 0.1);
  return { sentId, tokenVectors, sentenceVector };
}

describe("packEmbeddings", () => {
  it("lays the header and record out little-endian", () => {
    const buf = packEmbeddings(2, [record("ab", 2, 2)]);
    expect(buf.toString("ascii", 0, 4)).toBe("FGSE");
    expect(buf.readUInt32LE(4)).toBe(1);   // version
    expect(buf.readUInt32LE(8)).toBe(2);   // d
    expect(buf.readUInt32LE(12)).toBe(1);  // count
    expect(buf.readUInt32LE(16)).toBe(2);  // sent_id byte length
    expect(buf.toString("utf8", 20, 22)).toBe("ab");
    expect(buf.readUInt32LE(22)).toBe(2);  // n
    expect(buf.readFloatLE(26)).toBe(Math.fround(1.0));
    expect(buf.readFloatLE(30)).toBe(Math.fround(1.1));
    expect(buf.length).toBe(26 + 4 * 4 + 2 * 4);
  });

  it("rejects rows that do not match the dimension", () => {
    const bad = { sentId: "x", tokenVectors: new Float32Array(5), sentenceVector: new Float32Array(3) };
    expect(() => packEmbeddings(3, [bad])).toThrow(/do not match d=3/);
    const badSv = { sentId: "x", tokenVectors: new Float32Array(6), sentenceVector: new Float32Array(2) };
    expect(() => packEmbeddings(3, [badSv])).toThrow(/do not match d=3/);
  });
});

describe("write and read round trip", () => {
  it("preserves every float bit-exactly", () => {
    const out = path.join(dir, "vecs.fgse");
    const records = [record("first", 3, 4, 0.1), record("second", 1, 4, 2.5)];
    writeEmbeddings(out, 4, records);
    const back = readEmbeddings(out);
    expect(back.dimension).toBe(4);
    expect(back.records.size).toBe(2);
    for (const rec of records) {
      const got = back.records.get(rec.sentId)!;
      expect(got.n).toBe(rec.tokenVectors.length / 4);
      expect(Array.from(got.tokenVectors)).toEqual(Array.from(rec.tokenVectors));
      expect(Array.from(got.sentenceVector)).toEqual(Array.from(rec.sentenceVector));
    }
  });

  it("handles multi-byte sent_ids", () => {
    const out = path.join(dir, "vecs.fgse");
    writeEmbeddings(out, 2, [record("sätz-1", 1, 2)]);
    expect(readEmbeddings(out).records.has("sätz-1")).toBe(true);
  });

  it("leaves no temp file behind", () => {
    const out = path.join(dir, "vecs.fgse");
    writeEmbeddings(out, 2, [record("a", 1, 2)]);
    expect(fs.readdirSync(dir)).toEqual(["vecs.fgse"]);
  });

  it("fails on a missing output directory", () => {
    const out = path.join(dir, "nope", "vecs.fgse");
    expect(() => writeEmbeddings(out, 2, [record("a", 1, 2)])).toThrow();
  });
});

describe("readEmbeddings errors", () => {
  it("rejects bad magic and unsupported versions", () => {
    const out = path.join(dir, "vecs.fgse");
    fs.writeFileSync(out, Buffer.from("NOPE00000000000000"));
    expect(() => readEmbeddings(out)).toThrow(/not an FGSE file/);

    const buf = packEmbeddings(2, [record("a", 1, 2)]);
    buf.writeUInt32LE(9, 4);
    fs.writeFileSync(out, buf);
    expect(() => readEmbeddings(out)).toThrow(/unsupported version 9/);
  });

  it("rejects truncated and padded files", () => {
    const out = path.join(dir, "vecs.fgse");
    const buf = packEmbeddings(2, [record("a", 2, 2)]);
    fs.writeFileSync(out, buf.subarray(0, buf.length - 3));
    expect(() => readEmbeddings(out)).toThrow(/truncated/);
    fs.writeFileSync(out, Buffer.concat([buf, Buffer.from([0])]));
    expect(() => readEmbeddings(out)).toThrow(/trailing bytes/);
  });

  it("rejects duplicate sent_ids", () => {
    const out = path.join(dir, "vecs.fgse");
    writeEmbeddings(out, 2, [record("a", 1, 2), { ...record("a", 1, 2) }]);
    expect(() => readEmbeddings(out)).toThrow(/duplicate sent_id/);
  });
});
