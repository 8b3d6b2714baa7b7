"""CoNLL text format: one "token<TAB>tag" line per token, sentences separated
by a blank line and prefixed by a "# sent_id = <id>" comment. LF endings."""

from __future__ import annotations

from .corpus import Corpus
from .tagscheme import Tag, TagScheme, encode


class ConllError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def to_conll(corpus: Corpus, scheme: TagScheme) -> str:
    blocks = []
    for sentence in corpus.sentences:
        tags = encode(sentence, scheme)
        lines = [f"# sent_id = {sentence.sent_id}"]
        lines += [f"{token}\t{tag}" for token, tag in zip(sentence.tokens, tags)]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def tagged_to_conll(items) -> str:
    """Serialize (sent_id, tokens, tags) triples; tags may be Tag or str."""
    blocks = []
    for sent_id, tokens, tags in items:
        lines = [f"# sent_id = {sent_id}"]
        lines += [f"{token}\t{tag}" for token, tag in zip(tokens, tags)]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def from_conll(text: str, scheme: TagScheme | None = None) -> list[tuple[str, list[str], list[str]]]:
    """Inverse of to_conll at the (tokens, tags) level.

    With a scheme, every tag is checked against its inventory.
    """
    inventory = None
    if scheme is not None:
        from .tagscheme import label_inventory
        inventory = {str(t) for t in label_inventory(scheme)}

    out: list[tuple[str, list[str], list[str]]] = []
    sent_id: str | None = None
    tokens: list[str] = []
    tags: list[str] = []

    def flush(line_no: int):
        nonlocal sent_id, tokens, tags
        if sent_id is None and not tokens:
            return
        if sent_id is None:
            raise ConllError("sentence block without a '# sent_id =' comment", line_no)
        if not tokens:
            raise ConllError(f"empty sentence block for sent_id {sent_id!r}", line_no)
        out.append((sent_id, tokens, tags))
        sent_id, tokens, tags = None, [], []

    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("# sent_id = "):
            if sent_id is not None:
                flush(line_no)
            sent_id = line[len("# sent_id = "):]
            continue
        if line.count("\t") != 1:
            raise ConllError("expected a single tab between token and tag", line_no)
        token, tag = line.split("\t")
        if inventory is not None and tag not in inventory:
            raise ConllError(f"unknown tag {tag!r} for the declared scheme", line_no)
        else:
            Tag.parse(tag)  # surface-form check even without a scheme
        tokens.append(token)
        tags.append(tag)
    flush(len(text.split("\n")))
    return out
