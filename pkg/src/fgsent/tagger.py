"""Linear sequence tagger for span extraction.

Emissions are a linear map of provider embeddings, transitions a learned
L x L table, decoding is Viterbi constrained to valid BIO transitions, and
training is the averaged structured perceptron. Multi-seed expression
predictions can be merged with a per-token union.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentedSentence, augmented_view, AUGMENT_MODES
from .config import TrainConfig
from .corpus import Corpus, Sentence, Span
from .tagscheme import Tag, TagScheme, TagSequence, encode, label_inventory, repair


class TaggerError(ValueError):
    pass


def scheme_masks(labels: list[str] | tuple[str, ...]):
    """Start and transition legality under BIO rules: a sequence may not
    begin with I, and I must continue a B/I of the same element and polarity."""
    tags = [Tag.parse(label) for label in labels]
    L = len(tags)
    start_ok = np.array([t.position != "I" for t in tags], dtype=bool)
    trans_ok = np.empty((L, L), dtype=bool)
    for j, nxt in enumerate(tags):
        if nxt.position != "I":
            trans_ok[:, j] = True
        else:
            for i, prev in enumerate(tags):
                trans_ok[i, j] = (not prev.is_o
                                  and (prev.element, prev.polarity) == (nxt.element, nxt.polarity))
    return start_ok, trans_ok


def viterbi(emissions: np.ndarray, transitions: np.ndarray,
            trans_ok: np.ndarray | None = None,
            start_ok: np.ndarray | None = None) -> tuple[list[int], float]:
    """Best-scoring legal label path; score = sum of emissions along the path
    plus transitions between consecutive labels.

    Among equal-scoring paths the lexicographically smallest by label index
    wins (lowest index first, then leftmost position). Runs a backward pass
    for optimal suffix values, then picks greedily left to right; numpy's
    argmax already prefers the lowest index on ties.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    transitions = np.asarray(transitions, dtype=np.float64)
    n, L = emissions.shape
    if n < 1:
        raise TaggerError("empty sequence")
    if transitions.shape != (L, L):
        raise TaggerError(f"transitions shape {transitions.shape} does not match L={L}")
    if trans_ok is None:
        trans_ok = np.ones((L, L), dtype=bool)
    if start_ok is None:
        start_ok = np.ones(L, dtype=bool)
    if not start_ok.any():
        raise TaggerError("all start labels masked")

    neg = -np.inf
    # suffix[y] = best score of positions i..n-1 given label y at position i
    suffix = np.empty((n, L))
    suffix[n - 1] = emissions[n - 1]
    for i in range(n - 2, -1, -1):
        cont = np.where(trans_ok, transitions + suffix[i + 1], neg)  # (L, L)
        best = cont.max(axis=1)
        if not np.isfinite(best).any():
            raise TaggerError("all paths masked")
        suffix[i] = emissions[i] + best

    first = np.where(start_ok, suffix[0], neg)
    y = int(np.argmax(first))
    score = float(first[y])
    if not np.isfinite(score):
        raise TaggerError("all paths masked")
    path = [y]
    for i in range(1, n):
        step = np.where(trans_ok[y], transitions[y] + suffix[i], neg)
        y = int(np.argmax(step))
        path.append(y)
    return path, score


@dataclass(frozen=True, eq=False)
class TaggerModel:
    scheme: TagScheme
    mode: str
    labels: tuple[str, ...]
    emission: np.ndarray     # (L, d) float64
    transition: np.ndarray   # (L, L) float64
    provider_kind: str
    dimension: int
    config: TrainConfig
    provider_params: dict = field(default_factory=dict)
    start_ok: np.ndarray = field(init=False, repr=False)
    trans_ok: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        expected = tuple(str(t) for t in label_inventory(self.scheme))
        if self.labels != expected:
            raise TaggerError(f"label map {self.labels} does not match scheme inventory")
        L = len(self.labels)
        if self.emission.shape != (L, self.dimension) or self.transition.shape != (L, L):
            raise TaggerError(
                f"weight shapes {self.emission.shape}/{self.transition.shape} "
                f"inconsistent with L={L}, d={self.dimension}")
        start_ok, trans_ok = scheme_masks(self.labels)
        object.__setattr__(self, "start_ok", start_ok)
        object.__setattr__(self, "trans_ok", trans_ok)


@dataclass(frozen=True)
class TaggedSentence:
    """One prediction: the augmented input actually tagged, and the tags."""

    sent_id: str
    aug: AugmentedSentence
    tags: TagSequence

    @property
    def labels(self) -> list[str]:
        return self.tags.labels()


def _resolve_expressions(sentence: Sentence, expression_source):
    if expression_source is None or isinstance(expression_source, (list, tuple)):
        return expression_source
    return expression_source(sentence)  # callable per sentence


def _prepare(corpus: Corpus, scheme: TagScheme, mode: str, provider,
             label_index: dict[str, int], expression_source, max_len: int):
    """Embed and gold-encode every sentence once, on its augmented view."""
    data = []
    for sentence in corpus:
        spans = _resolve_expressions(sentence, expression_source)
        aug, view = augmented_view(sentence, mode, expression_source=spans)
        tokens = view.tokens[:max_len]
        matrix = provider.embed(view.tokens, sent_id=sentence.sent_id)
        X = np.asarray(matrix.token_vectors[: len(tokens)], dtype=np.float64)
        gold = [label_index[label] for label in encode(view, scheme).labels()[: len(tokens)]]
        data.append((X, gold, aug, view))
    return data


def train_tagger(train: Corpus, scheme: TagScheme, mode: str, provider,
                 config: TrainConfig, dev: Corpus | None = None,
                 expression_source=None, select_element: str = "targ") -> TaggerModel:
    """Averaged structured perceptron over Viterbi decodes.

    Sentences are reshuffled per epoch from config.seed. With a dev corpus
    the averaged weights after each epoch are scored by token F1 on
    select_element and the best epoch's snapshot is returned; otherwise the
    final average.
    """
    from .evaluation import token_f1

    if mode not in AUGMENT_MODES:
        raise TaggerError(f"unknown augment mode {mode!r}")
    if len(train) == 0:
        raise TaggerError("empty training corpus")
    if select_element not in scheme.elements:
        raise TaggerError(f"select_element {select_element!r} not in scheme elements {scheme.elements}")

    labels = tuple(str(t) for t in label_inventory(scheme))
    label_index = {label: i for i, label in enumerate(labels)}
    start_ok, trans_ok = scheme_masks(labels)
    d = provider.dimension
    L = len(labels)

    data = _prepare(train, scheme, mode, provider, label_index, expression_source, config.max_len)
    dev_data = None
    if dev is not None:
        dev_data = _prepare(dev, scheme, mode, provider, label_index, expression_source, config.max_len)

    W = np.zeros((L, d))
    T = np.zeros((L, L))
    W_sum = np.zeros_like(W)
    T_sum = np.zeros_like(T)
    steps = 0
    rng = random.Random(config.seed)
    best_score = -1.0
    best: tuple[np.ndarray, np.ndarray] | None = None

    def averaged() -> tuple[np.ndarray, np.ndarray]:
        return W_sum / steps, T_sum / steps

    for _epoch in range(config.epochs):
        order = list(range(len(data)))
        rng.shuffle(order)
        for idx in order:
            X, gold, _aug, _view = data[idx]
            pred, _ = viterbi(X @ W.T, T, trans_ok, start_ok)
            if pred != gold:
                for i, (g, p) in enumerate(zip(gold, pred)):
                    if g != p:
                        W[g] += X[i]
                        W[p] -= X[i]
                for i in range(1, len(gold)):
                    if (gold[i - 1], gold[i]) != (pred[i - 1], pred[i]):
                        T[gold[i - 1], gold[i]] += 1.0
                        T[pred[i - 1], pred[i]] -= 1.0
            W_sum += W
            T_sum += T
            steps += 1

        if dev_data is not None:
            W_avg, T_avg = averaged()
            gold_seqs, pred_seqs = [], []
            for X, gold, _aug, _view in dev_data:
                pred, _ = viterbi(X @ W_avg.T, T_avg, trans_ok, start_ok)
                gold_seqs.append([labels[g] for g in gold])
                pred_seqs.append([labels[p] for p in pred])
            score = token_f1(gold_seqs, pred_seqs, select_element).f1(select_element)
            if score > best_score:
                best_score = score
                best = (W_avg.copy(), T_avg.copy())

    W_final, T_final = best if best is not None else averaged()
    return TaggerModel(scheme=scheme, mode=mode, labels=labels,
                       emission=W_final, transition=T_final,
                       provider_kind=provider.kind, dimension=d, config=config,
                       provider_params=dict(getattr(provider, "params", {})))


def predict_tags(model: TaggerModel, sentence: Sentence, provider,
                 expression_source=None) -> TaggedSentence:
    """Embed the augmented sentence, decode under the BIO mask, and return
    the tags over the augmented tokens (always valid for the scheme)."""
    if provider.dimension != model.dimension:
        raise TaggerError(f"provider dimension {provider.dimension} "
                          f"does not match model dimension {model.dimension}")
    spans = _resolve_expressions(sentence, expression_source)
    aug, view = augmented_view(sentence, model.mode, expression_source=spans)
    tokens = view.tokens[: model.config.max_len]
    matrix = provider.embed(view.tokens, sent_id=sentence.sent_id)
    X = np.asarray(matrix.token_vectors[: len(tokens)], dtype=np.float64)
    path, _ = viterbi(X @ model.emission.T, model.transition, model.trans_ok, model.start_ok)
    labels = [model.labels[y] for y in path]
    labels += ["O"] * (len(view.tokens) - len(labels))  # truncated tail scores nothing
    tags = TagSequence(Tag.parse(label) for label in labels)
    return TaggedSentence(sent_id=sentence.sent_id, aug=aug, tags=tags)


def original_spans(tagged: TaggedSentence, scheme: TagScheme) -> list[tuple[str, Span, str | None]]:
    """Decode predicted spans and re-address them to original sentence
    coordinates, dropping bracket positions (splitting where needed)."""
    from .tagscheme import decode
    from .augment import strip_tags

    _tokens, inverse = strip_tags(tagged.aug)
    out = []
    for element, span, polarity in decode(tagged.tags, scheme):
        originals = [inverse[i] for i in range(span.start, min(span.end, len(tagged.aug.tokens)))
                     if i in inverse]
        if not originals:
            continue
        run_start = prev = originals[0]
        for pos in originals[1:]:
            if pos != prev + 1:
                out.append((element, Span(run_start, prev + 1), polarity))
                run_start = pos
            prev = pos
        out.append((element, Span(run_start, prev + 1), polarity))
    return out


_UNION_LABELS = ("O", "B-exp", "I-exp")


def ensemble_union(predictions) -> TagSequence:
    """Per-token union of expression tags across models: O only where every
    model says O, B where any model says B, I otherwise; repaired to a valid
    sequence afterwards."""
    label_lists = []
    for seq in predictions:
        labels = seq.labels() if hasattr(seq, "labels") else [str(t) for t in seq]
        for label in labels:
            if label not in _UNION_LABELS:
                raise TaggerError(f"union expects expression-only tags, got {label!r}")
        label_lists.append(labels)
    if not label_lists:
        raise TaggerError("no predictions to merge")
    n = len(label_lists[0])
    for labels in label_lists[1:]:
        if len(labels) != n:
            raise TaggerError(f"length mismatch: {len(labels)} vs {n}")

    merged = []
    for i in range(n):
        column = [labels[i] for labels in label_lists]
        if all(label == "O" for label in column):
            merged.append("O")
        elif any(label == "B-exp" for label in column):
            merged.append("B-exp")
        else:
            merged.append("I-exp")
    return repair(merged, TagScheme("Joint", "full"))
