"""Unified opinion data model: JSON (de)serialization, polarity normalization,
deterministic splits, and dataset statistics / target-overlap reports.

Spans are token-indexed half-open intervals. Source formats that use character
offsets are expected to be pre-converted by per-dataset adapters; this module
defines and validates the canonical schema only.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

POLARITIES = ("positive", "negative", "neutral", "conflict")
CLASS_ORDER = ("positive", "neutral", "negative")
SPLITS = ("train", "dev", "test", "unsplit")

ELEMENTS = ("holder", "target", "expression")


class CorpusError(ValueError):
    """Corpus validation failure, carrying the offending sent_id and field path."""

    def __init__(self, message: str, *, sent_id: str | None = None, path: str | None = None):
        self.sent_id = sent_id
        self.path = path
        parts = [message]
        if sent_id is not None:
            parts.append(f"sent_id={sent_id!r}")
        if path is not None:
            parts.append(f"at {path}")
        super().__init__(" ".join(parts))


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token interval [start, end)."""

    start: int
    end: int

    def __post_init__(self):
        if not (isinstance(self.start, int) and isinstance(self.end, int)):
            raise CorpusError(f"span indices must be integers, got {(self.start, self.end)!r}")
        if not 0 <= self.start < self.end:
            raise CorpusError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def tokens(self, sentence_tokens: Iterable[str]) -> list[str]:
        return list(sentence_tokens)[self.start : self.end]


def _as_spans(spans: Iterable[Span | tuple[int, int]]) -> tuple[Span, ...]:
    out = []
    for s in spans:
        out.append(s if isinstance(s, Span) else Span(*s))
    return tuple(out)


def _check_span_list(spans: tuple[Span, ...], *, sent_id: str | None, path: str) -> None:
    for i in range(1, len(spans)):
        if spans[i].start < spans[i - 1].start:
            raise CorpusError("spans not sorted by start", sent_id=sent_id, path=path)
        if spans[i].start < spans[i - 1].end:
            raise CorpusError("overlapping spans", sent_id=sent_id, path=path)


@dataclass(frozen=True)
class Opinion:
    """One opinion: optional holder/expression spans, target spans, polarity."""

    target: tuple[Span, ...]
    holder: tuple[Span, ...] = ()
    expression: tuple[Span, ...] = ()
    polarity: str = "neutral"
    intensity: str | None = None
    extra: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "target", _as_spans(self.target))
        object.__setattr__(self, "holder", _as_spans(self.holder))
        object.__setattr__(self, "expression", _as_spans(self.expression))
        if not self.target:
            raise CorpusError("opinion has an empty target list")
        if self.polarity not in POLARITIES:
            raise CorpusError(f"unknown polarity {self.polarity!r}")
        for name in ELEMENTS:
            _check_span_list(self.spans(name), sent_id=None, path=name)

    def spans(self, element: str) -> tuple[Span, ...]:
        if element not in ELEMENTS:
            raise ValueError(f"unknown element {element!r}")
        return getattr(self, element)


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    tokens: tuple[str, ...]
    opinions: tuple[Opinion, ...] = ()
    extra: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "opinions", tuple(self.opinions))
        if not self.tokens:
            raise CorpusError("sentence has no tokens", sent_id=self.sent_id)
        n = len(self.tokens)
        for i, op in enumerate(self.opinions):
            for element in ELEMENTS:
                for j, span in enumerate(op.spans(element)):
                    if span.end > n:
                        raise CorpusError(
                            f"span out of range: [{span.start}, {span.end}) on a {n}-token sentence",
                            sent_id=self.sent_id,
                            path=f"opinions[{i}].{element}[{j}]",
                        )

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    name: str
    split: str
    sentences: tuple[Sentence, ...]
    extra: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.split not in SPLITS:
            raise CorpusError(f"unknown split {self.split!r}", path="split")
        seen: set[str] = set()
        for s in self.sentences:
            if s.sent_id in seen:
                raise CorpusError("duplicate sent_id", sent_id=s.sent_id)
            seen.add(s.sent_id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


# ---------------------------------------------------------------------------
# JSON parsing / serialization

_OPINION_KEYS = ("holder", "target", "expression", "polarity", "intensity")
_SENTENCE_KEYS = ("sent_id", "tokens", "opinions")
_CORPUS_KEYS = ("name", "split", "sentences")


def _parse_span_list(raw: Any, *, sent_id: str, path: str) -> list[Span]:
    if not isinstance(raw, list):
        raise CorpusError("expected a list of [start, end] pairs", sent_id=sent_id, path=path)
    spans = []
    for j, pair in enumerate(raw):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise CorpusError("expected a [start, end] pair", sent_id=sent_id, path=f"{path}[{j}]")
        a, b = pair
        if not (isinstance(a, int) and isinstance(b, int)) or isinstance(a, bool) or isinstance(b, bool):
            raise CorpusError("span indices must be integers", sent_id=sent_id, path=f"{path}[{j}]")
        if not 0 <= a < b:
            raise CorpusError(f"invalid span [{a}, {b})", sent_id=sent_id, path=f"{path}[{j}]")
        spans.append(Span(a, b))
    return spans


def parse_corpus(document: bytes | str) -> Corpus:
    """Parse a canonical JSON document into a validated Corpus.

    Unknown extra fields at corpus, sentence, and opinion level are kept and
    re-emitted by serialize_corpus.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise CorpusError(f"malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise CorpusError("top level must be an object")

    name = data.get("name")
    split = data.get("split")
    if not isinstance(name, str):
        raise CorpusError("missing or non-string 'name'", path="name")
    if split not in SPLITS:
        raise CorpusError(f"unknown split {split!r}", path="split")
    raw_sentences = data.get("sentences")
    if not isinstance(raw_sentences, list):
        raise CorpusError("missing or non-list 'sentences'", path="sentences")

    sentences: list[Sentence] = []
    seen_ids: set[str] = set()
    for i, raw_sent in enumerate(raw_sentences):
        spath = f"sentences[{i}]"
        if not isinstance(raw_sent, dict):
            raise CorpusError("sentence must be an object", path=spath)
        sent_id = raw_sent.get("sent_id")
        if not isinstance(sent_id, str):
            raise CorpusError("missing or non-string 'sent_id'", path=f"{spath}.sent_id")
        if sent_id in seen_ids:
            raise CorpusError("duplicate sent_id", sent_id=sent_id, path=f"{spath}.sent_id")
        seen_ids.add(sent_id)
        tokens = raw_sent.get("tokens")
        if not (isinstance(tokens, list) and tokens and all(isinstance(t, str) for t in tokens)):
            raise CorpusError("tokens must be a non-empty list of strings",
                              sent_id=sent_id, path=f"{spath}.tokens")
        raw_opinions = raw_sent.get("opinions", [])
        if not isinstance(raw_opinions, list):
            raise CorpusError("opinions must be a list", sent_id=sent_id, path=f"{spath}.opinions")

        opinions: list[Opinion] = []
        for k, raw_op in enumerate(raw_opinions):
            opath = f"{spath}.opinions[{k}]"
            if not isinstance(raw_op, dict):
                raise CorpusError("opinion must be an object", sent_id=sent_id, path=opath)
            polarity = raw_op.get("polarity")
            if polarity not in POLARITIES:
                raise CorpusError(f"unknown polarity {polarity!r}",
                                  sent_id=sent_id, path=f"{opath}.polarity")
            intensity = raw_op.get("intensity")
            if intensity is not None and not isinstance(intensity, str):
                raise CorpusError("intensity must be a string or null",
                                  sent_id=sent_id, path=f"{opath}.intensity")
            parts = {}
            for element in ELEMENTS:
                parts[element] = _parse_span_list(raw_op.get(element, []),
                                                  sent_id=sent_id, path=f"{opath}.{element}")
            if not parts["target"]:
                raise CorpusError("target list must be non-empty",
                                  sent_id=sent_id, path=f"{opath}.target")
            n = len(tokens)
            for element in ELEMENTS:
                spans = parts[element]
                for j, span in enumerate(spans):
                    if span.end > n:
                        raise CorpusError(
                            f"span out of range: [{span.start}, {span.end}) on a {n}-token sentence",
                            sent_id=sent_id, path=f"{opath}.{element}[{j}]")
                _check_span_list(tuple(spans), sent_id=sent_id, path=f"{opath}.{element}")
            extra = {key: raw_op[key] for key in raw_op if key not in _OPINION_KEYS}
            opinions.append(Opinion(target=parts["target"], holder=parts["holder"],
                                    expression=parts["expression"], polarity=polarity,
                                    intensity=intensity, extra=extra))

        extra = {key: raw_sent[key] for key in raw_sent if key not in _SENTENCE_KEYS}
        sentences.append(Sentence(sent_id=sent_id, tokens=tuple(tokens),
                                  opinions=tuple(opinions), extra=extra))

    extra = {key: data[key] for key in data if key not in _CORPUS_KEYS}
    return Corpus(name=name, split=split, sentences=tuple(sentences), extra=extra)


def corpus_to_dict(corpus: Corpus) -> dict:
    """Plain-dict view of a corpus in canonical key order, extras appended."""
    sentences = []
    for s in corpus.sentences:
        opinions = []
        for op in s.opinions:
            d: dict[str, Any] = {
                "holder": [[sp.start, sp.end] for sp in op.holder],
                "target": [[sp.start, sp.end] for sp in op.target],
                "expression": [[sp.start, sp.end] for sp in op.expression],
                "polarity": op.polarity,
                "intensity": op.intensity,
            }
            d.update(op.extra)
            opinions.append(d)
        sd: dict[str, Any] = {"sent_id": s.sent_id, "tokens": list(s.tokens), "opinions": opinions}
        sd.update(s.extra)
        sentences.append(sd)
    out: dict[str, Any] = {"name": corpus.name, "split": corpus.split, "sentences": sentences}
    out.update(corpus.extra)
    return out


def serialize_corpus(corpus: Corpus) -> str:
    """Canonical UTF-8 JSON text (2-space indent, trailing newline)."""
    return json.dumps(corpus_to_dict(corpus), ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Polarity normalization

def normalize_polarity(raw_label: str, table: Mapping[str, str] | None = None) -> str:
    """Map a source-format polarity label to one of the four canonical values.

    The mapping table is source-format specific; by default only the canonical
    values themselves are admitted.
    """
    if table is not None and raw_label in table:
        mapped = table[raw_label]
        if mapped not in POLARITIES:
            raise CorpusError(f"mapping table sends {raw_label!r} to unknown polarity {mapped!r}")
        return mapped
    if raw_label in POLARITIES:
        return raw_label
    raise CorpusError(f"unmapped polarity label {raw_label!r}")


# ---------------------------------------------------------------------------
# Splits

def split_corpus(corpus: Corpus, seed: int) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic 80/10/10 split: dev and test each get floor(0.10 * N).

    Sampling is uniform over sentences (no stratification); each split keeps
    the original corpus order.
    """
    if corpus.split != "unsplit":
        raise CorpusError(f"corpus already split as {corpus.split!r}")
    n = len(corpus.sentences)
    k = n // 10
    if k == 0:
        raise CorpusError(f"corpus has {n} sentences; need at least 10 to split")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    dev_idx = sorted(order[:k])
    test_idx = sorted(order[k : 2 * k])
    held = set(order[: 2 * k])
    train_idx = [i for i in range(n) if i not in held]

    def take(idx: list[int], split: str) -> Corpus:
        return Corpus(name=corpus.name, split=split,
                      sentences=tuple(corpus.sentences[i] for i in idx),
                      extra=dict(corpus.extra))

    return take(train_idx, "train"), take(dev_idx, "dev"), take(test_idx, "test")


# ---------------------------------------------------------------------------
# Statistics

def _avg1(total: int, count: int) -> float:
    """total/count rounded half-up to one decimal (0.0 when count is 0)."""
    if count == 0:
        return 0.0
    return math.floor(Fraction(total * 10, count) + Fraction(1, 2)) / 10


@dataclass(frozen=True)
class ElementStats:
    count: int
    avg_length: float
    max_length: int


@dataclass(frozen=True)
class StatsReport:
    sentences: int
    avg_sentence_length: float
    elements: dict[str, ElementStats]
    polarity: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "sentences": self.sentences,
            "avg_sentence_length": self.avg_sentence_length,
            "elements": {
                name: {"count": st.count, "avg_length": st.avg_length, "max_length": st.max_length}
                for name, st in self.elements.items()
            },
            "polarity": dict(self.polarity),
        }


def compute_stats(corpus: Corpus) -> StatsReport:
    """Count element occurrences and their token lengths, plus the polarity
    distribution restricted to positive/neutral/negative.

    An opinion with an empty holder contributes no holder occurrence; the
    length of an occurrence is the total token count of its span list.
    """
    token_total = 0
    counts = {e: 0 for e in ELEMENTS}
    length_totals = {e: 0 for e in ELEMENTS}
    max_lengths = {e: 0 for e in ELEMENTS}
    polarity = {c: 0 for c in CLASS_ORDER}

    for sentence in corpus.sentences:
        token_total += len(sentence.tokens)
        for op in sentence.opinions:
            if op.polarity in polarity:
                polarity[op.polarity] += 1
            for element in ELEMENTS:
                spans = op.spans(element)
                if not spans:
                    continue
                length = sum(len(s) for s in spans)
                counts[element] += 1
                length_totals[element] += length
                max_lengths[element] = max(max_lengths[element], length)

    elements = {
        e: ElementStats(count=counts[e],
                        avg_length=_avg1(length_totals[e], counts[e]),
                        max_length=max_lengths[e])
        for e in ELEMENTS
    }
    return StatsReport(sentences=len(corpus.sentences),
                       avg_sentence_length=_avg1(token_total, len(corpus.sentences)),
                       elements=elements, polarity=polarity)


def render_stats(reports: Mapping[str, StatsReport]) -> str:
    """Aligned-column text, one row per split."""
    header = ["split", "sents", "avg", "hold#", "avg", "max", "targ#", "avg", "max",
              "exp#", "avg", "max", "+", "neu", "-"]
    rows = [header]
    for split, r in reports.items():
        row = [split, str(r.sentences), f"{r.avg_sentence_length:.1f}"]
        for e in ELEMENTS:
            st = r.elements[e]
            row += [str(st.count), f"{st.avg_length:.1f}", str(st.max_length)]
        row += [str(r.polarity["positive"]), str(r.polarity["neutral"]), str(r.polarity["negative"])]
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)


# ---------------------------------------------------------------------------
# Target overlap

def target_forms(corpus: Corpus) -> set[str]:
    """Distinct target surface forms: space-joined tokens over each span list."""
    forms = set()
    for sentence in corpus.sentences:
        for op in sentence.opinions:
            parts = []
            for span in op.target:
                parts.extend(sentence.tokens[span.start : span.end])
            forms.add(" ".join(parts))
    return forms


@dataclass(frozen=True)
class OverlapReport:
    unique: dict[str, float]    # split -> percent of its forms absent from both others
    overlap: dict[str, float]   # dev/test -> percent of forms present in train

    def to_dict(self) -> dict:
        return {"unique": dict(self.unique), "overlap": dict(self.overlap)}


def _pct(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 0.0


def compute_overlap(train: Corpus, dev: Corpus, test: Corpus) -> OverlapReport:
    """Exact (full-string) target overlap between splits; partial matches are
    disregarded."""
    forms = {"train": target_forms(train), "dev": target_forms(dev), "test": target_forms(test)}
    others = {"train": ("dev", "test"), "dev": ("train", "test"), "test": ("train", "dev")}
    unique = {}
    for split, (a, b) in others.items():
        own = forms[split]
        unique[split] = _pct(len(own - forms[a] - forms[b]), len(own))
    overlap = {split: _pct(len(forms[split] & forms["train"]), len(forms[split]))
               for split in ("dev", "test")}
    return OverlapReport(unique=unique, overlap=overlap)


def render_overlap(report: OverlapReport) -> str:
    u, o = report.unique, report.overlap
    return ("% unique   train {:.1f}  dev {:.1f}  test {:.1f}\n"
            "% overlap  train-dev {:.1f}  train-test {:.1f}").format(
                u["train"], u["dev"], u["test"], o["dev"], o["test"])
