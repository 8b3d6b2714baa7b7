"""Targeted sentiment toolkit: span extraction, polarity classification,
input augmentation, and an experiment runner behind an HTTP service."""

__version__ = "0.1.0"

from .augment import AugmentedSentence, insert_tags, strip_tags
from .classifier import (ClassifierModel, ClassifyExample, build_classifier_input, pool,
                         predict_polarity, train_classifier)
from .config import TrainConfig
from .corpus import (Corpus, CorpusError, Opinion, Sentence, Span, compute_overlap,
                     compute_stats, parse_corpus, serialize_corpus, split_corpus)
from .embeddings import (EmbeddingMatrix, FileBackedProvider, HashedStaticProvider,
                         read_embeddings, write_embeddings)
from .evaluation import aggregate_runs, macro_f1, pearson, token_f1
from .experiments import ExperimentSpec, run_sweep
from .lexicon import Lexicon, load_lexicon, mark_expressions
from .model_io import load_model, save_model
from .tagger import TaggerModel, ensemble_union, predict_tags, train_tagger, viterbi
from .tagscheme import Tag, TagScheme, TagSequence, decode, encode, label_inventory, repair

__all__ = [
    "__version__",
    "AugmentedSentence", "insert_tags", "strip_tags",
    "ClassifierModel", "ClassifyExample", "build_classifier_input", "pool",
    "predict_polarity", "train_classifier",
    "TrainConfig",
    "Corpus", "CorpusError", "Opinion", "Sentence", "Span",
    "compute_overlap", "compute_stats", "parse_corpus", "serialize_corpus", "split_corpus",
    "EmbeddingMatrix", "FileBackedProvider", "HashedStaticProvider",
    "read_embeddings", "write_embeddings",
    "aggregate_runs", "macro_f1", "pearson", "token_f1",
    "ExperimentSpec", "run_sweep",
    "Lexicon", "load_lexicon", "mark_expressions",
    "load_model", "save_model",
    "TaggerModel", "ensemble_union", "predict_tags", "train_tagger", "viterbi",
    "Tag", "TagScheme", "TagSequence", "decode", "encode", "label_inventory", "repair",
]
