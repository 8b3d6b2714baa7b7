export { Corpus, CorpusFormatError, Opinion, Sentence, Span, parseCorpus } from "./corpus";
export {
  AUGMENT_MODES, AugmentMode, AugmentedSentence, BRACKET_TOKENS, insertTags,
} from "./augment";
export {
  ENCODER_REVISION, EncodeOptions, EncodeResult, HashPieceEncoder, SubtokenPooling,
} from "./encoder";
export {
  EmbeddingRecord, FGSE_MAGIC, FGSE_VERSION, ReadResult, atomicWrite, packEmbeddings,
  readEmbeddings, writeEmbeddings,
} from "./fgse";
export {
  DEFAULT_MAX_LEN, DEFAULT_POOLING, ExportJob, ExportSummary, runExport,
} from "./export";
