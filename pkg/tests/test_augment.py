from __future__ import annotations

import random

import pytest

from fgsent.augment import (
    AUGMENT_MODES,
    AugmentError,
    augmented_view,
    insert_tags,
    strip_tags,
)
from fgsent.corpus import Span
from fgsent.tagscheme import TagScheme, encode, sentence_elements

from conftest import money_sentence, op, random_annotated_sentence, sent


class TestInsert:
    def test_original_is_identity(self):
        s = money_sentence()
        aug = insert_tags(s, "original")
        assert aug.tokens == s.tokens
        assert aug.inserted == ()

    def test_holder_brackets(self):
        aug = insert_tags(money_sentence(), "holders")
        assert " ".join(aug.tokens) == "[<H] Money Magazine [H>] rated E-Trade highly ."

    def test_expression_brackets(self):
        aug = insert_tags(money_sentence(), "expressions")
        assert " ".join(aug.tokens) == "Money Magazine [<E] rated [E>] E-Trade [<E] highly [E>] ."

    def test_full_brackets(self):
        aug = insert_tags(money_sentence(), "full")
        assert " ".join(aug.tokens) == \
            "[<H] Money Magazine [H>] [<E] rated [E>] E-Trade [<E] highly [E>] ."

    def test_closing_before_opening_at_shared_boundary(self):
        s = sent("x", ["a", "b"], [op(target=[Span(0, 1)],
                                      expression=[Span(0, 1), Span(1, 2)])])
        aug = insert_tags(s, "expressions")
        assert list(aug.tokens) == ["[<E]", "a", "[E>]", "[<E]", "b", "[E>]"]

    def test_duplicate_spans_bracketed_once(self):
        s = sent("x", ["a", "b"], [
            op(target=[Span(1, 2)], expression=[Span(0, 1)]),
            op(target=[Span(1, 2)], expression=[Span(0, 1)], polarity="negative"),
        ])
        aug = insert_tags(s, "expressions")
        assert list(aug.tokens) == ["[<E]", "a", "[E>]", "b"]

    def test_overlapping_same_element_spans_error(self):
        s = sent("x", ["a", "b", "c"], [
            op(target=[Span(0, 1)], expression=[Span(0, 2)]),
            op(target=[Span(2, 3)], expression=[Span(1, 3)]),
        ])
        with pytest.raises(AugmentError, match="overlap"):
            insert_tags(s, "expressions")

    def test_bracket_token_in_input_rejected(self):
        s = sent("x", ["a", "[<E]"], [op(target=[Span(0, 1)])])
        with pytest.raises(AugmentError, match="bracket"):
            insert_tags(s, "expressions")

    def test_unknown_mode(self):
        with pytest.raises(AugmentError):
            insert_tags(money_sentence(), "everything")

    def test_expression_source_override(self):
        s = sent("x", ["not", "good", "soup"], [op(target=[Span(2, 3)])])
        aug = insert_tags(s, "expressions", expression_source=[("exp", Span(1, 2))])
        assert list(aug.tokens) == ["not", "[<E]", "good", "[E>]", "soup"]

    def test_override_ignored_outside_expression_modes(self):
        s = sent("x", ["a"], [op(target=[Span(0, 1)])])
        aug = insert_tags(s, "holders", expression_source=[("exp", Span(0, 1))])
        assert aug.tokens == ("a",)


class TestSpanMap:
    def test_remap_shifts_past_brackets(self):
        s = money_sentence()
        aug = insert_tags(s, "holders")
        # E-Trade sits at 3 originally, 5 after [<H] ... [H>]
        assert aug.remap_span(Span(3, 4)) == [Span(5, 6)]

    def test_remap_splits_at_interior_bracket(self):
        s = sent("x", ["a", "b", "c"],
                 [op(target=[Span(0, 3)], expression=[Span(1, 2)])])
        aug = insert_tags(s, "expressions")
        # a [<E] b [E>] c -> the 3-token target survives as three pieces
        assert aug.remap_span(Span(0, 3)) == [Span(0, 1), Span(2, 3), Span(4, 5)]

    def test_remapped_spans_select_same_surface(self):
        rng = random.Random(41)
        for i in range(200):
            s = random_annotated_sentence(rng, f"s{i}")
            for mode in AUGMENT_MODES:
                aug = insert_tags(s, mode)
                for opn in s.opinions:
                    for span in opn.target:
                        original = list(s.tokens[span.start:span.end])
                        pieces = aug.remap_span(span)
                        got = [t for p in pieces for t in aug.tokens[p.start:p.end]]
                        assert got == original


class TestStrip:
    def test_round_trip_hand_case(self):
        s = money_sentence()
        aug = insert_tags(s, "full")
        tokens, inverse = strip_tags(aug)
        assert tokens == list(s.tokens)
        for aug_i, orig_i in inverse.items():
            assert aug.tokens[aug_i] == s.tokens[orig_i]

    def test_round_trip_random(self):
        rng = random.Random(42)
        for i in range(300):
            s = random_annotated_sentence(rng, f"s{i}")
            mode = rng.choice(AUGMENT_MODES)
            aug = insert_tags(s, mode)
            tokens, inverse = strip_tags(aug)
            assert tokens == list(s.tokens)
            assert sorted(inverse) == [i for i in range(len(aug.tokens))
                                       if i not in dict(aug.inserted)]

    def test_unrecorded_bracket_rejected(self):
        s = sent("x", ["a"], [op(target=[Span(0, 1)])])
        aug = insert_tags(s, "original")
        forged = type(aug)(tokens=("[<E]", "a"), span_map=(1,), inserted=())
        with pytest.raises(AugmentError, match="no record"):
            strip_tags(forged)


class TestAugmentedView:
    def test_view_spans_address_augmented_tokens(self):
        s = money_sentence()
        aug, view = augmented_view(s, "full")
        assert view.tokens == aug.tokens
        opn = view.opinions[0]
        got = [t for sp in opn.target for t in view.tokens[sp.start:sp.end]]
        assert got == ["E-Trade"]

    def test_view_encodes_like_gold(self):
        """Encoding the re-addressed view tags exactly the original element
        tokens, never the brackets."""
        rng = random.Random(43)
        scheme = TagScheme("Joint", "full")
        for i in range(100):
            s = random_annotated_sentence(rng, f"s{i}")
            for mode in AUGMENT_MODES:
                aug, view = augmented_view(s, mode)
                seq = encode(view, scheme)
                for tag, token in zip(seq, view.tokens):
                    if not tag.is_o:
                        assert not token.startswith("["), (mode, view.tokens, seq.labels())

    def test_view_element_set_matches_original(self):
        rng = random.Random(44)
        scheme = TagScheme("JointPolarity", "full")
        for i in range(100):
            s = random_annotated_sentence(rng, f"s{i}")
            aug, view = augmented_view(s, "full")
            _, inverse = strip_tags(aug)
            got = set()
            for element, span, polarity in sentence_elements(view, scheme):
                starts = sorted(inverse[j] for j in range(span.start, span.end))
                got.add((element, Span(starts[0], starts[-1] + 1), polarity))
            # split pieces merge back to the original contiguous spans
            merged = set()
            for element, span, polarity in sentence_elements(s, scheme):
                merged.add((element, span, polarity))
            assert _cover(got) == _cover(merged)


def _cover(items):
    """Token-level membership view of a span set (piece-split insensitive)."""
    out = set()
    for element, span, polarity in items:
        for t in range(span.start, span.end):
            out.add((element, t, polarity))
    return out
