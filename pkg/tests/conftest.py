"""Shared corpus builders and synthetic-data generators."""
from __future__ import annotations

import random

import pytest

from fgsent.corpus import Corpus, Opinion, Sentence, Span

VOCAB = [f"w{i}" for i in range(40)]
PLAIN_CLASSES = ("positive", "neutral", "negative")


def sent(sent_id, tokens, opinions=()):
    return Sentence(sent_id=sent_id, tokens=tuple(tokens), opinions=tuple(opinions))


def op(target, holder=(), expression=(), polarity="neutral"):
    return Opinion(target=tuple(target), holder=tuple(holder),
                   expression=tuple(expression), polarity=polarity)


def corpus(sentences, name="fixture", split="unsplit"):
    return Corpus(name=name, split=split, sentences=tuple(sentences))


def money_sentence():
    """Holder 'Money Magazine', expressions 'rated' and 'highly', target 'E-Trade'."""
    tokens = ["Money", "Magazine", "rated", "E-Trade", "highly", "."]
    return sent("money-0", tokens, [
        op(target=[Span(3, 4)], holder=[Span(0, 2)],
           expression=[Span(2, 3), Span(4, 5)], polarity="positive"),
    ])


def random_annotated_sentence(rng: random.Random, sent_id: str,
                              min_len: int = 3, max_len: int = 14,
                              conflict_free: bool = True) -> Sentence:
    """Random sentence whose element spans never overlap within an element.

    Positions are carved into disjoint chunks first, then chunks are dealt
    out to holder/target/expression slots across one or two opinions, so
    every scheme can encode the result without errors.
    """
    n = rng.randint(min_len, max_len)
    tokens = [rng.choice(VOCAB) for _ in range(n)]

    chunks = []
    i = 0
    while i < n:
        width = rng.randint(1, 3)
        j = min(n, i + width)
        if rng.random() < 0.6:
            chunks.append(Span(i, j))
        i = j
    rng.shuffle(chunks)

    def take(k):
        out = []
        for _ in range(k):
            if chunks:
                out.append(chunks.pop())
        return sorted(out, key=lambda s: s.start)

    opinions = []
    for _ in range(rng.randint(1, 2)):
        target = take(rng.randint(1, 2))
        if not target:
            continue
        polarity = rng.choice(PLAIN_CLASSES if conflict_free
                              else PLAIN_CLASSES + ("conflict",))
        opinions.append(op(target=target,
                           holder=take(rng.randint(0, 1)),
                           expression=take(rng.randint(0, 2)),
                           polarity=polarity))
    return sent(sent_id, tokens, opinions)


def random_corpus(rng: random.Random, size: int, name: str = "rand",
                  split: str = "unsplit", **kw) -> Corpus:
    return corpus([random_annotated_sentence(rng, f"{name}-{i}", **kw) for i in range(size)],
                  name=name, split=split)


def pivot_sentence(rng: random.Random, sent_id: str, min_len=4, max_len=12) -> Sentence:
    """One PIVOT token somewhere; it is the (neutral) target, rest is noise."""
    n = rng.randint(min_len, max_len)
    tokens = [rng.choice(VOCAB) for _ in range(n)]
    pos = rng.randrange(n)
    tokens[pos] = "PIVOT"
    return sent(sent_id, tokens, [op(target=[Span(pos, pos + 1)], polarity="neutral")])


def pivot_corpus(seed: int, size: int, split: str = "train", prefix: str | None = None) -> Corpus:
    rng = random.Random(seed)
    prefix = prefix if prefix is not None else split
    return corpus([pivot_sentence(rng, f"{prefix}{i}") for i in range(size)],
                  name="pivot", split=split)


MARKERS = {"positive": "GOODMARK", "neutral": "OKMARK", "negative": "BADMARK"}


def marker_sentence(rng: random.Random, sent_id: str) -> Sentence:
    """Two-token target whose first token names the polarity class."""
    pol = rng.choice(PLAIN_CLASSES)
    n = rng.randint(4, 9)
    tokens = [rng.choice(VOCAB) for _ in range(n)]
    pos = rng.randrange(n - 1)
    tokens[pos] = MARKERS[pol]
    return sent(sent_id, tokens, [op(target=[Span(pos, pos + 2)], polarity=pol)])


def marker_corpus(seed: int, size: int, split: str = "train", prefix: str | None = None) -> Corpus:
    rng = random.Random(seed)
    prefix = prefix if prefix is not None else split
    return corpus([marker_sentence(rng, f"{prefix}{i}") for i in range(size)],
                  name="markers", split=split)


@pytest.fixture
def rng():
    return random.Random(20240817)


# --- acceptance reporting ----------------------------------------------------
# One line per acceptance criterion at the end of the run, so the gate can be
# read off the bottom of the log without grepping test ids.

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance[name] = ("SKIPPED" if report.skipped
                             else "PASS" if report.passed else "FAIL")
    elif report.when == "setup" and not report.passed:
        _acceptance[name] = "SKIPPED" if report.skipped else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome:>7}  {name}")
