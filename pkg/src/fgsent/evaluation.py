"""Measurement protocol: token-level span F1 for extraction, macro F1 over
the three polarity classes for classification, mean/std aggregation across
seeds, and Pearson correlation with a two-sided t-test p-value.

Token-level scoring is binary per-token membership in an element's spans:
B/I and any polarity suffix are collapsed before matching. Macro F1 always
averages over the fixed class set {positive, neutral, negative}; a class
absent from gold and predictions contributes 0. Gold conflict items are
discarded before computation.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from scipy.special import stdtr

from .corpus import CLASS_ORDER
from .tagscheme import TAG_ELEMENTS, Tag


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Score:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def _labels_of(seq) -> list[str]:
    if hasattr(seq, "labels"):
        return seq.labels()
    return [str(t) for t in seq]


def _as_batch(seqs) -> list[list[str]]:
    """Accept one tag sequence (TagSequence, list of labels or Tags) or a
    list of them; always hand back a list of label lists."""
    if hasattr(seqs, "labels"):
        return [seqs.labels()]
    seqs = list(seqs)
    if not seqs:
        return []
    if isinstance(seqs[0], (str, Tag)):
        return [[str(t) for t in seqs]]
    return [_labels_of(s) for s in seqs]


def _element_membership(labels: list[str], element: str) -> list[bool]:
    out = []
    for label in labels:
        tag = Tag.parse(label)
        out.append(not tag.is_o and tag.element == element)
    return out


@dataclass(frozen=True)
class TokenF1Report:
    elements: dict[str, Score]

    def __getitem__(self, element: str) -> Score:
        return self.elements[element]

    def f1(self, element: str) -> float:
        return self.elements[element].f1

    def to_dict(self) -> dict:
        return {name: score.to_dict() for name, score in self.elements.items()}


def token_f1(gold, pred, elements=TAG_ELEMENTS) -> TokenF1Report:
    """Micro-aggregated token-level P/R/F1 per element.

    gold and pred are parallel tag sequences, or lists of sequences for a
    whole evaluation set. A token counts as TP when both sides place it
    inside the element's spans, regardless of B/I or polarity suffix.
    """
    if isinstance(elements, str):
        elements = (elements,)
    gold_seqs, pred_seqs = _as_batch(gold), _as_batch(pred)
    if len(gold_seqs) != len(pred_seqs):
        raise EvalError(f"{len(gold_seqs)} gold vs {len(pred_seqs)} predicted sequences")

    counts = {e: [0, 0, 0] for e in elements}
    for g_labels, p_labels in zip(gold_seqs, pred_seqs):
        if len(g_labels) != len(p_labels):
            raise EvalError(f"length mismatch: {len(g_labels)} gold vs {len(p_labels)} predicted tags")
        for element in elements:
            g_in = _element_membership(g_labels, element)
            p_in = _element_membership(p_labels, element)
            c = counts[element]
            for gi, pi in zip(g_in, p_in):
                if gi and pi:
                    c[0] += 1
                elif pi:
                    c[1] += 1
                elif gi:
                    c[2] += 1
    return TokenF1Report({e: Score(*counts[e]) for e in elements})


@dataclass(frozen=True)
class MacroF1Report:
    classes: dict[str, Score]
    macro_f1: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {"classes": {c: s.to_dict() for c, s in self.classes.items()},
                "macro_f1": self.macro_f1, "accuracy": self.accuracy, "n": self.n}


def macro_f1(gold, pred, discard_conflict: bool = True) -> MacroF1Report:
    """Per-class P/R/F1 and their unweighted mean over the fixed three-class
    set; items whose gold label is conflict are dropped first."""
    gold, pred = list(gold), list(pred)
    if len(gold) != len(pred):
        raise EvalError(f"{len(gold)} gold vs {len(pred)} predicted labels")
    if discard_conflict:
        pairs = [(g, p) for g, p in zip(gold, pred) if g != "conflict"]
    else:
        pairs = list(zip(gold, pred))
    for g, p in pairs:
        if g not in CLASS_ORDER or p not in CLASS_ORDER:
            raise EvalError(f"label outside {CLASS_ORDER}: gold={g!r} pred={p!r}")

    classes = {}
    for c in CLASS_ORDER:
        tp = sum(1 for g, p in pairs if g == c and p == c)
        fp = sum(1 for g, p in pairs if g != c and p == c)
        fn = sum(1 for g, p in pairs if g == c and p != c)
        classes[c] = Score(tp, fp, fn)
    macro = sum(classes[c].f1 for c in CLASS_ORDER) / len(CLASS_ORDER)
    correct = sum(1 for g, p in pairs if g == p)
    accuracy = correct / len(pairs) if pairs else 0.0
    return MacroF1Report(classes=classes, macro_f1=macro, accuracy=accuracy, n=len(pairs))


@dataclass(frozen=True)
class RunAggregate:
    mean: float
    std: float
    n: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "n": self.n}


def aggregate_runs(values) -> RunAggregate:
    """Mean and sample standard deviation (n-1 denominator, 0 for one run)."""
    values = [float(v) for v in values]
    if not values:
        raise EvalError("no values to aggregate")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return RunAggregate(mean=mean, std=std, n=len(values))


def pearson(xs, ys) -> tuple[float, float]:
    """Product-moment correlation and its two-sided p-value (t distribution,
    n-2 degrees of freedom)."""
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys):
        raise EvalError(f"{len(xs)} xs vs {len(ys)} ys")
    n = len(xs)
    if n < 3:
        raise EvalError(f"need at least 3 points, got {n}")
    mx, my = statistics.fmean(xs), statistics.fmean(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise EvalError("zero variance")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return r, p


def swap_orientations(gold, pred, elements=TAG_ELEMENTS):
    """Both scoring orientations of the same sequences, for metamorphic
    checks: precision(pred vs gold) must equal recall(gold vs pred)."""
    return token_f1(gold, pred, elements), token_f1(pred, gold, elements)
