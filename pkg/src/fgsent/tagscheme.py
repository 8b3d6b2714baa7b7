"""BIO tagging schemes for opinion extraction.

Three strategies: Target (targets only), Joint (holders, targets, and
expressions), and JointPolarity (element tags carrying the owning opinion's
polarity). In targeted task mode only targets are tagged; in full mode all
three elements are. Inventory sizes are 3 (Target), 7 (Joint full), 7
(JointPolarity targeted), and 19 (JointPolarity full).

Tag surface grammar: ``O`` | ``B|I`` ``-`` ``holder|targ|exp``
[``-`` ``positive|neutral|negative``].
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Sentence, Span

STRATEGIES = ("Target", "Joint", "JointPolarity")
TASK_MODES = ("targeted", "full")

# tag element names (surface grammar) <-> data-model element names
TAG_ELEMENTS = ("holder", "targ", "exp")
_TO_TAG_ELEMENT = {"holder": "holder", "target": "targ", "expression": "exp"}
_FROM_TAG_ELEMENT = {v: k for k, v in _TO_TAG_ELEMENT.items()}

_POLARITY_ORDER = ("positive", "neutral", "negative")

# cross-element priority when two opinions claim the same token
_ELEMENT_PRIORITY = {"targ": 0, "exp": 1, "holder": 2}


class TagError(ValueError):
    pass


@dataclass(frozen=True)
class TagScheme:
    strategy: str
    task_mode: str = "targeted"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise TagError(f"unknown strategy {self.strategy!r}")
        if self.task_mode not in TASK_MODES:
            raise TagError(f"unknown task mode {self.task_mode!r}")

    @property
    def elements(self) -> tuple[str, ...]:
        """Tag elements included by this scheme."""
        if self.strategy == "Target" or self.task_mode == "targeted":
            return ("targ",)
        return TAG_ELEMENTS

    @property
    def with_polarity(self) -> bool:
        return self.strategy == "JointPolarity"


@dataclass(frozen=True)
class Tag:
    position: str                 # B | I | O
    element: str | None = None    # holder | targ | exp, None for O
    polarity: str | None = None   # only under JointPolarity

    def __post_init__(self):
        if self.position == "O":
            if self.element is not None or self.polarity is not None:
                raise TagError("O carries no element or polarity")
        elif self.position in ("B", "I"):
            if self.element not in TAG_ELEMENTS:
                raise TagError(f"unknown tag element {self.element!r}")
            if self.polarity is not None and self.polarity not in _POLARITY_ORDER:
                raise TagError(f"unknown tag polarity {self.polarity!r}")
        else:
            raise TagError(f"unknown tag position {self.position!r}")

    @property
    def is_o(self) -> bool:
        return self.position == "O"

    def __str__(self) -> str:
        if self.is_o:
            return "O"
        if self.polarity is None:
            return f"{self.position}-{self.element}"
        return f"{self.position}-{self.element}-{self.polarity}"

    @staticmethod
    def parse(label: str) -> "Tag":
        if label == "O":
            return O
        parts = label.split("-")
        if len(parts) == 2:
            return Tag(parts[0], parts[1])
        if len(parts) == 3:
            return Tag(parts[0], parts[1], parts[2])
        raise TagError(f"cannot parse tag {label!r}")


O = Tag("O")


class TagSequence:
    """Validated per-token tag sequence: I never follows O (or the sequence
    start) or a tag with a different (element, polarity)."""

    __slots__ = ("tags",)

    def __init__(self, tags):
        tags = tuple(tags)
        prev = O
        for i, tag in enumerate(tags):
            if tag.position == "I" and (prev.is_o or (prev.element, prev.polarity) != (tag.element, tag.polarity)):
                raise TagError(f"invalid BIO sequence: {tag} at position {i} after {prev}")
            prev = tag
        self.tags = tags

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __getitem__(self, i):
        return self.tags[i]

    def __eq__(self, other):
        return isinstance(other, TagSequence) and self.tags == other.tags

    def __hash__(self):
        return hash(self.tags)

    def __repr__(self):
        return f"TagSequence({self.labels()})"

    def labels(self) -> list[str]:
        return [str(t) for t in self.tags]


def label_inventory(scheme: TagScheme) -> list[Tag]:
    """Closed, ordered label set: O first, then B before I, elements in order
    holder/targ/exp, polarities in order positive/neutral/negative."""
    tags = [O]
    polarities = _POLARITY_ORDER if scheme.with_polarity else (None,)
    for position in ("B", "I"):
        for element in TAG_ELEMENTS:
            if element not in scheme.elements:
                continue
            for polarity in polarities:
                tags.append(Tag(position, element, polarity))
    return tags


def encode(sentence: Sentence, scheme: TagScheme) -> TagSequence:
    """Flatten a sentence's opinion spans into one BIO tag per token.

    When two opinions claim the same token, the earlier opinion in the
    sentence's opinion list wins for the same element; across elements the
    priority is targ > exp > holder. Conflict-polarity opinions are skipped
    under JointPolarity.
    """
    # owner per token: (priority key, identity of the claiming span)
    owners: list[tuple[tuple[int, int], tuple[str, int, int, str | None]] | None]
    owners = [None] * len(sentence.tokens)
    for op_index, op in enumerate(sentence.opinions):
        polarity = None
        if scheme.with_polarity:
            if op.polarity == "conflict":
                continue
            polarity = op.polarity
        for model_element, tag_element in _TO_TAG_ELEMENT.items():
            if tag_element not in scheme.elements:
                continue
            for span_index, span in enumerate(op.spans(model_element)):
                key = (_ELEMENT_PRIORITY[tag_element], op_index)
                ident = (tag_element, op_index, span_index, polarity)
                for t in range(span.start, span.end):
                    if owners[t] is None or key < owners[t][0]:
                        owners[t] = (key, ident)

    tags: list[Tag] = []
    prev_ident = None
    for t in range(len(sentence.tokens)):
        if owners[t] is None:
            tags.append(O)
            prev_ident = None
            continue
        _, ident = owners[t]
        element, _, _, polarity = ident
        position = "I" if ident == prev_ident else "B"
        tags.append(Tag(position, element, polarity))
        prev_ident = ident
    return TagSequence(tags)


def decode(tags: TagSequence, scheme: TagScheme) -> list[tuple[str, Span, str | None]]:
    """Turn maximal B-I... runs back into (element, span, polarity) triples,
    ordered by start. Raises on sequences invalid for the scheme."""
    inventory = set(label_inventory(scheme))
    for i, tag in enumerate(tags):
        if tag not in inventory:
            raise TagError(f"tag {tag} at position {i} not in the {scheme.strategy} inventory")
    spans: list[tuple[str, Span, str | None]] = []
    start = None
    current: tuple[str | None, str | None] = (None, None)
    for i, tag in enumerate(tags):
        if start is not None and (tag.position != "I"):
            spans.append((current[0], Span(start, i), current[1]))
            start = None
        if tag.position == "B":
            start = i
            current = (tag.element, tag.polarity)
    if start is not None:
        spans.append((current[0], Span(start, len(tags)), current[1]))
    return spans


def repair(labels, scheme: TagScheme) -> TagSequence:
    """Minimal rewrite making a raw label list BIO-valid: an I that follows O,
    the sequence start, or a different (element, polarity) becomes B.
    Idempotent; all other tags are unchanged."""
    inventory = {str(t): t for t in label_inventory(scheme)}
    out: list[Tag] = []
    prev = O
    for label in labels:
        tag = label if isinstance(label, Tag) else Tag.parse(label)
        if str(tag) not in inventory:
            raise TagError(f"label {tag} not in the inventory of {scheme.strategy}/{scheme.task_mode}")
        if tag.position == "I" and (prev.is_o or (prev.element, prev.polarity) != (tag.element, tag.polarity)):
            tag = Tag("B", tag.element, tag.polarity)
        out.append(tag)
        prev = tag
    return TagSequence(out)


def sentence_elements(sentence: Sentence, scheme: TagScheme) -> set[tuple[str, Span, str | None]]:
    """The scheme-included span set of a sentence, in decode's terms."""
    out = set()
    for op in sentence.opinions:
        polarity = None
        if scheme.with_polarity:
            if op.polarity == "conflict":
                continue
            polarity = op.polarity
        for model_element, tag_element in _TO_TAG_ELEMENT.items():
            if tag_element not in scheme.elements:
                continue
            for span in op.spans(model_element):
                out.add((tag_element, span, polarity))
    return out
