/**
 * The export job: corpus in, augmented and encoded, FGSE file plus a JSON
 * sidecar out. One record per sentence, n equal to the augmented token
 * count, in corpus order.
 */

import * as fs from "node:fs";

import { AUGMENT_MODES, AugmentMode, insertTags } from "./augment";
import { parseCorpus } from "./corpus";
import { HashPieceEncoder, SubtokenPooling } from "./encoder";
import { EmbeddingRecord, atomicWrite, writeEmbeddings } from "./fgse";

export const DEFAULT_MAX_LEN = 128;
export const DEFAULT_POOLING: SubtokenPooling = "first";

export interface ExportJob {
  corpus: string;
  mode: AugmentMode;
  encoder: string;
  out: string;
  maxLen?: number;
  pooling?: SubtokenPooling;
}

export interface ExportSummary {
  out: string;
  sentences: number;
  dimension: number;
  /** sentences whose tail was replaced by zero vectors */
  truncated: number;
}

export function runExport(
  job: ExportJob,
  warn: (message: string) => void = (m) => process.stderr.write(m + "\n")): ExportSummary {
  if (!AUGMENT_MODES.includes(job.mode)) {
    throw new Error(`unknown augment mode '${job.mode}'; expected one of ${AUGMENT_MODES.join(", ")}`);
  }
  const maxLen = job.maxLen ?? DEFAULT_MAX_LEN;
  const pooling = job.pooling ?? DEFAULT_POOLING;
  const encoder = HashPieceEncoder.fromName(job.encoder);
  const corpus = parseCorpus(fs.readFileSync(job.corpus, "utf8"));

  const records: EmbeddingRecord[] = [];
  let truncated = 0;
  for (const sentence of corpus.sentences) {
    const aug = insertTags(sentence, job.mode);
    const res = encoder.encode(aug.tokens, { maxLen, pooling });
    if (res.cutTokens > 0) {
      truncated++;
      warn(`warning: ${sentence.sentId}: ${res.cutPieces + maxLen} pieces exceed ` +
           `the ${maxLen} limit; ${res.cutTokens} trailing tokens truncated, ` +
           `rows kept as zero-vector placeholders`);
    }
    records.push({
      sentId: sentence.sentId,
      tokenVectors: res.tokenVectors,
      sentenceVector: res.sentenceVector,
    });
  }

  writeEmbeddings(job.out, encoder.dimension, records);
  const sidecar = {
    encoder: encoder.name,
    revision: encoder.revision,
    mode: job.mode,
    d: encoder.dimension,
    pooling,
    max_len: maxLen,
  };
  atomicWrite(job.out + ".meta.json", JSON.stringify(sidecar, null, 2) + "\n");
  return { out: job.out, sentences: records.length, dimension: encoder.dimension, truncated };
}
