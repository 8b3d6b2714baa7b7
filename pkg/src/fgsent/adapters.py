"""Source-format adapters for the convert command.

"canonical" revalidates and reserializes canonical JSON (identity for files
this package wrote). "conll" lifts a tagged CoNLL file into the canonical
schema: the tag scheme is inferred from the labels present, each decoded
target span becomes one opinion, and sentence-level holder/expression spans
attach to every opinion of their sentence (CoNLL keeps no opinion grouping).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .conll import ConllError, from_conll
from .corpus import Corpus, CorpusError, Opinion, Sentence, parse_corpus, serialize_corpus
from .tagscheme import Tag, TagError, TagScheme, TagSequence, decode


class AdapterError(ValueError):
    pass


@dataclass
class ConvertReport:
    adapter: str
    sentences: int = 0
    opinions: int = 0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"adapter": self.adapter, "sentences": self.sentences,
                "opinions": self.opinions, "warnings": list(self.warnings)}


def _adapt_canonical(raw: bytes, name: str, report: ConvertReport) -> Corpus:
    corpus = parse_corpus(raw)
    report.sentences = len(corpus)
    report.opinions = sum(len(s.opinions) for s in corpus)
    return corpus


def infer_scheme(labels) -> TagScheme:
    """Smallest scheme whose inventory covers the observed labels."""
    elements: set[str] = set()
    with_polarity = False
    for label in labels:
        tag = Tag.parse(label)
        if tag.is_o:
            continue
        elements.add(tag.element)
        with_polarity = with_polarity or tag.polarity is not None
    if not elements:
        elements = {"targ"}
    task_mode = "full" if elements - {"targ"} else "targeted"
    if with_polarity:
        strategy = "JointPolarity"
    elif task_mode == "targeted":
        strategy = "Target"
    else:
        strategy = "Joint"
    return TagScheme(strategy, task_mode)


def _adapt_conll(raw: bytes, name: str, report: ConvertReport) -> Corpus:
    blocks = from_conll(raw.decode("utf-8"))
    all_labels = [tag for _sid, _tokens, tags in blocks for tag in tags]
    scheme = infer_scheme(all_labels)

    sentences = []
    for sent_id, tokens, labels in blocks:
        tag_seq = TagSequence(Tag.parse(label) for label in labels)
        spans = decode(tag_seq, scheme)
        targets = [(span, polarity) for element, span, polarity in spans if element == "targ"]
        holders = tuple(span for element, span, _pol in spans if element == "holder")
        expressions = tuple(span for element, span, _pol in spans if element == "exp")
        opinions = []
        for span, polarity in targets:
            opinions.append(Opinion(target=(span,), holder=holders, expression=expressions,
                                    polarity=polarity or "neutral"))
        if not targets and (holders or expressions):
            report.warnings.append(
                f"{sent_id}: {len(holders) + len(expressions)} holder/expression spans "
                "dropped (no target to attach them to)")
        sentences.append(Sentence(sent_id=sent_id, tokens=tuple(tokens), opinions=tuple(opinions)))

    report.sentences = len(sentences)
    report.opinions = sum(len(s.opinions) for s in sentences)
    return Corpus(name=name, split="unsplit", sentences=tuple(sentences))


ADAPTERS = {
    "canonical": _adapt_canonical,
    "conll": _adapt_conll,
}


def convert_file(input_path: str | Path, adapter: str, output_path: str | Path) -> ConvertReport:
    if adapter not in ADAPTERS:
        raise AdapterError(f"unknown adapter {adapter!r}; available: {', '.join(sorted(ADAPTERS))}")
    input_path, output_path = Path(input_path), Path(output_path)
    raw = input_path.read_bytes()
    report = ConvertReport(adapter=adapter)
    try:
        corpus = ADAPTERS[adapter](raw, input_path.stem, report)
    except (CorpusError, ConllError, TagError, UnicodeDecodeError) as e:
        raise CorpusError(f"{input_path}: {e}") from e
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(serialize_corpus(corpus), encoding="utf-8")
    return report
