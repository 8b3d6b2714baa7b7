"""Sentiment lexicon loading and per-word expression marking.

Every token whose lowercased form appears in the lexicon is treated as a
single-word sentiment expression span. Multiword entries load fine but are
inert under the per-word rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Sentence, Span

log = logging.getLogger(__name__)

LEXICON_FORMATS = ("plain", "tsv")
_TSV_POLARITIES = ("positive", "negative", "neutral")


class LexiconError(ValueError):
    pass


def _normalize_term(raw: str) -> str:
    return " ".join(raw.split()).lower()


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: dict[str, str | None] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise LexiconError(f"lexicon {self.name!r} has no entries")
        for term in self.entries:
            if not term or term != _normalize_term(term):
                raise LexiconError(f"term {term!r} is empty or not normalized")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return _normalize_term(term) in self.entries


def load_lexicon(path: str | Path, format: str = "plain", name: str | None = None) -> Lexicon:
    """Read one entry per line; tsv lines are "term<TAB>polarity".

    Lines starting with ";" or "#" are comments (the common distribution
    headers). Duplicate terms keep the first occurrence and log a warning.
    """
    if format not in LEXICON_FORMATS:
        raise LexiconError(f"unknown lexicon format {format!r}")
    path = Path(path)
    text = path.read_text(encoding="utf-8")

    entries: dict[str, str | None] = {}
    duplicates = 0
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line or line.startswith((";", "#")):
            continue
        polarity: str | None = None
        if format == "tsv":
            fields = line.split("\t")
            if len(fields) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 'term<TAB>polarity', got {line!r}")
            term_raw, polarity = fields
            if polarity not in _TSV_POLARITIES:
                raise LexiconError(f"{path}:{lineno}: unknown polarity {polarity!r}")
        else:
            term_raw = line
        term = _normalize_term(term_raw)
        if not term:
            raise LexiconError(f"{path}:{lineno}: empty term")
        if term in entries:
            duplicates += 1
            continue
        entries[term] = polarity

    if duplicates:
        log.warning("lexicon %s: %d duplicate terms ignored (first occurrence kept)",
                    path, duplicates)
    if not entries:
        raise LexiconError(f"{path}: no entries")
    return Lexicon(name=name or path.stem, entries=entries)


def mark_expressions(sentence: Sentence, lexicon: Lexicon) -> list[tuple[str, Span]]:
    """Length-1 expression spans for every token found in the lexicon,
    left to right. Case-insensitive; adjacent hits stay separate spans."""
    out = []
    for i, token in enumerate(sentence.tokens):
        if token.lower() in lexicon.entries:
            out.append(("exp", Span(i, i + 1)))
    return out
