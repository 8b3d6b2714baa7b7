"""Input augmentation: insert holder/expression bracket tokens around
annotated spans and remap token indices, plus the exact inverse.

Bracket tokens are the four single tokens "[<H]", "[H>]", "[<E]", "[E>]";
in CoNLL exports they carry the tag O.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Sentence, Span

AUGMENT_MODES = ("original", "holders", "expressions", "full")

HOLDER_OPEN, HOLDER_CLOSE = "[<H]", "[H>]"
EXP_OPEN, EXP_CLOSE = "[<E]", "[E>]"
BRACKET_TOKENS = (HOLDER_OPEN, HOLDER_CLOSE, EXP_OPEN, EXP_CLOSE)

_BRACKETS = {"holder": (HOLDER_OPEN, HOLDER_CLOSE), "expression": (EXP_OPEN, EXP_CLOSE)}


class AugmentError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentedSentence:
    tokens: tuple[str, ...]
    span_map: tuple[int, ...]            # original token index -> augmented index
    inserted: tuple[tuple[int, str], ...]  # (augmented index, bracket token)
    extra: dict = field(default_factory=dict, compare=False)

    def remap_span(self, span: Span) -> list[Span]:
        """Re-address an original-coordinate span, split into contiguous
        pieces wherever an inserted bracket interrupts it."""
        positions = [self.span_map[i] for i in range(span.start, span.end)]
        pieces: list[Span] = []
        run_start = positions[0]
        prev = positions[0]
        for p in positions[1:]:
            if p != prev + 1:
                pieces.append(Span(run_start, prev + 1))
                run_start = p
            prev = p
        pieces.append(Span(run_start, prev + 1))
        return pieces

    def remap_spans(self, spans) -> list[Span]:
        out: list[Span] = []
        for span in spans:
            out.extend(self.remap_span(span))
        return out


def _gather_spans(sentence: Sentence, element: str, override=None) -> list[Span]:
    """Distinct spans of an element across all opinions (or from an override
    list of (element, Span) pairs); exact duplicates collapse, partial
    same-element overlaps are an error."""
    if override is not None:
        tag_name = {"holder": "holder", "expression": "exp"}[element]
        spans = sorted({span for name, span in override if name in (element, tag_name)})
    else:
        spans = sorted({span for op in sentence.opinions for span in op.spans(element)})
    for a, b in zip(spans, spans[1:]):
        if b.start < a.end:
            raise AugmentError(
                f"overlapping {element} bracket regions [{a.start},{a.end}) and [{b.start},{b.end})")
    return spans


def insert_tags(sentence: Sentence, mode: str, expression_source=None) -> AugmentedSentence:
    """Insert bracket tokens around holder spans (modes holders/full) and
    expression spans (modes expressions/full).

    expression_source, when given, replaces the gold expressions entirely
    (list of (element, Span) pairs, e.g. lexicon or model output). At each
    token boundary closing brackets are emitted before opening ones.
    """
    if mode not in AUGMENT_MODES:
        raise AugmentError(f"unknown augment mode {mode!r}")
    for token in sentence.tokens:
        if token in BRACKET_TOKENS:
            raise AugmentError(f"sentence already contains bracket token {token!r}")

    holders: list[Span] = []
    expressions: list[Span] = []
    if mode in ("holders", "full"):
        holders = _gather_spans(sentence, "holder")
    if mode in ("expressions", "full"):
        expressions = _gather_spans(sentence, "expression", override=expression_source)

    # (boundary, kind) events; kind 0 = closing, 1 = opening
    opens: dict[int, list[str]] = {}
    closes: dict[int, list[str]] = {}
    for element, spans in (("holder", holders), ("expression", expressions)):
        open_tok, close_tok = _BRACKETS[element]
        for span in spans:
            opens.setdefault(span.start, []).append(open_tok)
            closes.setdefault(span.end, []).append(close_tok)

    tokens: list[str] = []
    span_map: list[int] = []
    inserted: list[tuple[int, str]] = []
    for boundary in range(len(sentence.tokens) + 1):
        for bracket in closes.get(boundary, ()):
            inserted.append((len(tokens), bracket))
            tokens.append(bracket)
        for bracket in opens.get(boundary, ()):
            inserted.append((len(tokens), bracket))
            tokens.append(bracket)
        if boundary < len(sentence.tokens):
            span_map.append(len(tokens))
            tokens.append(sentence.tokens[boundary])

    return AugmentedSentence(tokens=tuple(tokens), span_map=tuple(span_map),
                             inserted=tuple(inserted))


def strip_tags(aug: AugmentedSentence) -> tuple[list[str], dict[int, int]]:
    """Exact inverse of insert_tags: original tokens plus the augmented-index
    to original-index map for non-bracket positions."""
    recorded = dict(aug.inserted)
    for position, bracket in recorded.items():
        if not 0 <= position < len(aug.tokens) or aug.tokens[position] != bracket:
            raise AugmentError(f"inserted record ({position}, {bracket!r}) does not match tokens")
    tokens: list[str] = []
    inverse: dict[int, int] = {}
    for i, token in enumerate(aug.tokens):
        if i in recorded:
            continue
        if token in BRACKET_TOKENS:
            raise AugmentError(f"bracket token {token!r} at {i} has no record in inserted")
        inverse[i] = len(tokens)
        tokens.append(token)
    return tokens, inverse


def augmented_view(sentence: Sentence, mode: str, expression_source=None) -> tuple[AugmentedSentence, Sentence]:
    """Augmented tokens plus a Sentence whose opinion spans are re-addressed
    to augmented coordinates (discontinuous pieces where brackets intrude).

    The returned sentence is what taggers train on and predict over; bracket
    tokens fall outside every span and therefore encode as O.
    """
    from .corpus import Opinion

    aug = insert_tags(sentence, mode, expression_source=expression_source)
    opinions = []
    for op in sentence.opinions:
        opinions.append(Opinion(
            target=tuple(aug.remap_spans(op.target)),
            holder=tuple(aug.remap_spans(op.holder)),
            expression=tuple(aug.remap_spans(op.expression)),
            polarity=op.polarity, intensity=op.intensity, extra=dict(op.extra)))
    view = Sentence(sent_id=sentence.sent_id, tokens=aug.tokens,
                    opinions=tuple(opinions), extra=dict(sentence.extra))
    return aug, view
