"""Target polarity classification.

The input sequence is the target copied in front of a "[SEP]" token and the
(possibly bracket-augmented) sentence. One vector is pooled from the
embedding matrix per strategy:

  CLS    sentence-level vector
  First  row of the target's first token
  Mean   element-wise mean over target rows
  Max    element-wise max over target rows
  MaxMM  concatenation [max ; min ; mean], tripling the width

and a multinomial logistic model over {positive, neutral, negative} is
trained by mini-batch SGD with linear warmup, L2 penalty, and Bernoulli
masking of pooled vectors as the dropout analog.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentedSentence, AUGMENT_MODES, insert_tags
from .config import TrainConfig
from .corpus import CLASS_ORDER, Corpus, Sentence, Span
from .embeddings import EmbeddingMatrix, SEP_TOKEN

POOLING_STRATEGIES = ("CLS", "First", "Mean", "Max", "MaxMM")


class ClassifierError(ValueError):
    pass


def pool(matrix: EmbeddingMatrix, target: list[Span] | tuple[Span, ...], strategy: str) -> np.ndarray:
    if strategy not in POOLING_STRATEGIES:
        raise ClassifierError(f"unknown pooling strategy {strategy!r}")
    if strategy == "CLS":
        return np.asarray(matrix.sentence_vector, dtype=np.float64)
    if not target:
        raise ClassifierError(f"empty target for strategy {strategy}")
    rows = np.concatenate([matrix.token_vectors[s.start : s.end] for s in target])
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[0] == 0:
        raise ClassifierError("target selects no rows")
    if strategy == "First":
        return rows[0]
    if strategy == "Mean":
        return rows.mean(axis=0)
    if strategy == "Max":
        return rows.max(axis=0)
    return np.concatenate([rows.max(axis=0), rows.min(axis=0), rows.mean(axis=0)])


def pooled_dimension(base: int, strategy: str) -> int:
    return 3 * base if strategy == "MaxMM" else base


@dataclass(frozen=True)
class ClassifierInput:
    sent_id: str
    tokens: tuple[str, ...]              # target ++ [SEP] ++ augmented sentence
    target: tuple[Span, ...]             # in-sentence occurrence, full-input coordinates
    aug: AugmentedSentence
    aug_target: tuple[Span, ...]         # same occurrence in augmented-sentence coordinates
    sentence_offset: int                 # index of the first sentence token in tokens


def build_classifier_input(sentence: Sentence, target, mode: str,
                           expression_source=None, max_len: int = 128) -> ClassifierInput:
    """Two-segment input with the target prepended before the separator.

    Truncation cuts the sentence tail; the in-sentence target occurrence
    (the one pooling reads) must survive it.
    """
    if mode not in AUGMENT_MODES:
        raise ClassifierError(f"unknown augment mode {mode!r}")
    target = tuple(s if isinstance(s, Span) else Span(*s) for s in target)
    if not target:
        raise ClassifierError("empty target")

    prefix = [tok for span in target for tok in sentence.tokens[span.start : span.end]]
    aug = insert_tags(sentence, mode, expression_source=expression_source)
    offset = len(prefix) + 1
    aug_target = tuple(aug.remap_spans(target))
    shifted = tuple(Span(s.start + offset, s.end + offset) for s in aug_target)

    tokens = (*prefix, SEP_TOKEN, *aug.tokens)
    if len(tokens) > max_len:
        if any(s.end > max_len for s in shifted):
            raise ClassifierError(
                f"target does not survive truncation to {max_len} tokens "
                f"(sent_id={sentence.sent_id!r})")
        tokens = tokens[:max_len]
    return ClassifierInput(sent_id=sentence.sent_id, tokens=tokens, target=shifted,
                           aug=aug, aug_target=aug_target, sentence_offset=offset)


def embed_input(ci: ClassifierInput, provider) -> EmbeddingMatrix:
    """Embedding matrix over the two-segment input.

    Free-text providers embed the sequence directly. File-backed providers
    store one record per augmented sentence, so the input matrix is
    assembled from it: target rows copied from their in-sentence positions,
    a zero separator row, then the sentence rows verbatim.
    """
    record = getattr(provider, "sentence_record", None)
    if record is None:
        return provider.embed(ci.tokens, sent_id=ci.sent_id)

    token_vectors, sentence_vector = record(ci.sent_id)
    n_aug = len(ci.aug.tokens)
    if token_vectors.shape[0] != n_aug:
        raise ClassifierError(
            f"sent_id {ci.sent_id!r}: embedding file has {token_vectors.shape[0]} rows "
            f"but the augmented sentence has {n_aug} tokens (augment mode mismatch?)")
    d = token_vectors.shape[1]
    prefix = np.concatenate([token_vectors[s.start : s.end] for s in ci.aug_target])
    sep = np.zeros((1, d), dtype=token_vectors.dtype)
    full = np.concatenate([prefix, sep, token_vectors])[: len(ci.tokens)]
    return EmbeddingMatrix(np.ascontiguousarray(full), sentence_vector)


@dataclass(frozen=True)
class ClassifyExample:
    sentence: Sentence
    target: tuple[Span, ...]
    polarity: str

    def __post_init__(self):
        object.__setattr__(self, "target",
                           tuple(s if isinstance(s, Span) else Span(*s) for s in self.target))
        if self.polarity not in CLASS_ORDER:
            raise ClassifierError(f"polarity {self.polarity!r} outside {CLASS_ORDER}")


def classification_examples(corpus: Corpus) -> list[ClassifyExample]:
    """One example per opinion; conflict opinions are dropped here, before
    any training or scoring sees them."""
    out = []
    for sentence in corpus:
        for op in sentence.opinions:
            if op.polarity == "conflict":
                continue
            out.append(ClassifyExample(sentence=sentence, target=op.target, polarity=op.polarity))
    return out


def ce_loss_and_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray,
                     l2: float = 0.0):
    """Mean cross-entropy of softmax(X W^T + b) with an L2 penalty on W;
    returns (loss, grad W, grad b). Kept as a standalone function so the
    gradient can be probed numerically."""
    n = X.shape[0]
    Z = X @ W.T + b
    Z = Z - Z.max(axis=1, keepdims=True)
    expZ = np.exp(Z)
    P = expZ / expZ.sum(axis=1, keepdims=True)
    loss = -np.log(P[np.arange(n), y]).mean() + 0.5 * l2 * float((W * W).sum())
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    G /= n
    gW = G.T @ X + l2 * W
    gb = G.sum(axis=0)
    return float(loss), gW, gb


def softmax_scores(W: np.ndarray, b: np.ndarray, v: np.ndarray) -> np.ndarray:
    z = W @ v + b
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    strategy: str
    mode: str
    classes: tuple[str, ...]
    weights: np.ndarray       # (C, d') float64
    bias: np.ndarray          # (C,) float64
    provider_kind: str
    dimension: int            # provider dimension
    input_dim: int            # pooled dimension (3d for MaxMM)
    config: TrainConfig
    provider_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in POOLING_STRATEGIES:
            raise ClassifierError(f"unknown pooling strategy {self.strategy!r}")
        C = len(self.classes)
        if self.weights.shape != (C, self.input_dim) or self.bias.shape != (C,):
            raise ClassifierError(f"weight shapes {self.weights.shape}/{self.bias.shape} "
                                  f"inconsistent with C={C}, d'={self.input_dim}")
        if self.input_dim != pooled_dimension(self.dimension, self.strategy):
            raise ClassifierError(f"input_dim {self.input_dim} does not match "
                                  f"{self.strategy} over d={self.dimension}")


def _pooled_features(examples, strategy, mode, provider, max_len, expression_source) -> np.ndarray:
    rows = []
    for ex in examples:
        spans = expression_source(ex.sentence) if callable(expression_source) else expression_source
        ci = build_classifier_input(ex.sentence, ex.target, mode,
                                    expression_source=spans, max_len=max_len)
        matrix = embed_input(ci, provider)
        rows.append(pool(matrix, ci.target, strategy))
    return np.stack(rows)


def train_classifier(examples, strategy: str, mode: str, provider, config: TrainConfig,
                     dev=None, expression_source=None) -> ClassifierModel:
    """Mini-batch SGD, reshuffled per epoch from config.seed, learning rate
    warmed up linearly over the first config.warmup of all steps. The epoch
    snapshot with the best dev macro F1 (train macro F1 when no dev set is
    given) is returned."""
    from .evaluation import macro_f1

    examples = list(examples)
    if not examples:
        raise ClassifierError("no training examples")
    present = {ex.polarity for ex in examples}
    if len(present) < 2:
        raise ClassifierError(f"degenerate class distribution: only {sorted(present)} present")
    if strategy not in POOLING_STRATEGIES:
        raise ClassifierError(f"unknown pooling strategy {strategy!r}")

    class_index = {c: i for i, c in enumerate(CLASS_ORDER)}
    X = _pooled_features(examples, strategy, mode, provider, config.max_len, expression_source)
    y = np.array([class_index[ex.polarity] for ex in examples])
    if dev is not None:
        dev = list(dev)
        Xd = _pooled_features(dev, strategy, mode, provider, config.max_len, expression_source)
        gold_dev = [ex.polarity for ex in dev]
    else:
        Xd, gold_dev = X, [ex.polarity for ex in examples]

    n, d_in = X.shape
    C = len(CLASS_ORDER)
    W = np.zeros((C, d_in))
    b = np.zeros(C)
    rng = np.random.default_rng(config.seed)

    batches_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_steps = config.epochs * batches_per_epoch
    warmup_steps = int(config.warmup * total_steps)

    best_score = -1.0
    best = (W.copy(), b.copy())
    step = 0
    keep = 1.0 - config.dropout
    for _epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            Xb = X[batch]
            if config.dropout > 0.0:
                mask = rng.random(Xb.shape) >= config.dropout
                Xb = Xb * mask / keep
            _, gW, gb = ce_loss_and_grad(W, b, Xb, y[batch], l2=config.l2)
            lr = config.learning_rate
            if step < warmup_steps:
                lr *= (step + 1) / warmup_steps
            W -= lr * gW
            b -= lr * gb
            step += 1

        pred_dev = [CLASS_ORDER[int(np.argmax(W @ v + b))] for v in Xd]
        score = macro_f1(gold_dev, pred_dev).macro_f1
        if score > best_score:
            best_score = score
            best = (W.copy(), b.copy())

    W_best, b_best = best
    return ClassifierModel(strategy=strategy, mode=mode, classes=CLASS_ORDER,
                           weights=W_best, bias=b_best, provider_kind=provider.kind,
                           dimension=provider.dimension, input_dim=d_in, config=config,
                           provider_params=dict(getattr(provider, "params", {})))


def predict_polarity(model: ClassifierModel, sentence: Sentence, target, provider,
                     expression_source=None) -> tuple[str, dict[str, float]]:
    """Argmax of the affine class scores; exact ties fall to the earlier
    class in (positive, neutral, negative). Returns softmax scores too."""
    if provider.dimension != model.dimension:
        raise ClassifierError(f"provider dimension {provider.dimension} "
                              f"does not match model dimension {model.dimension}")
    spans = expression_source(sentence) if callable(expression_source) else expression_source
    ci = build_classifier_input(sentence, target, model.mode,
                                expression_source=spans, max_len=model.config.max_len)
    v = pool(embed_input(ci, provider), ci.target, model.strategy)
    z = model.weights @ v + model.bias
    label = model.classes[int(np.argmax(z))]
    probs = softmax_scores(model.weights, model.bias, v)
    return label, {c: float(p) for c, p in zip(model.classes, probs)}
