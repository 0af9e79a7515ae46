from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from radcompare import Lexicon, lexicon_extract, normalize_entity
from radcompare.extraction import EntitySet, Entity


class TestNormalizeEntity:
    def test_rule_application(self):
        assert normalize_entity("  Back  Muscle Spasm.") == "back muscle spasm"

    def test_idempotence_example(self):
        assert normalize_entity("back muscle spasm") == "back muscle spasm"

    def test_punctuation_only_is_degenerate(self):
        with pytest.raises(ValueError, match="degenerate entity"):
            normalize_entity("..,")

    def test_empty_is_degenerate(self):
        with pytest.raises(ValueError, match="degenerate entity"):
            normalize_entity("")

    @given(st.text(min_size=1))
    def test_idempotent_for_any_input(self, raw):
        try:
            once = normalize_entity(raw)
        except ValueError:
            return
        assert normalize_entity(once) == once


class TestLexiconExtract:
    def test_longest_match_wins(self):
        lexicon = Lexicon.from_terms(["back muscle spasm", "spasm"])
        entities = lexicon_extract(lexicon, "No back muscle spasm.")
        assert [e.normalized for e in entities] == ["back muscle spasm"]
        (entity,) = entities.entities
        assert entity.span == (3, 20)
        assert entity.surface == "back muscle spasm"

    def test_repeated_mentions_collapse_in_distinct(self):
        lexicon = Lexicon.from_terms(["effusion"])
        text = "pleural effusion; effusion persists"
        entities = lexicon_extract(lexicon, text)
        assert [e.span for e in entities] == [(8, 16), (18, 26)]
        assert all(text[s:e] == "effusion" for s, e in (e.span for e in entities))
        assert entities.distinct == frozenset({"effusion"})

    def test_word_boundary_required(self):
        lexicon = Lexicon.from_terms(["ct"])
        assert len(lexicon_extract(lexicon, "doctor")) == 0

    def test_no_matches_is_empty(self):
        lexicon = Lexicon.from_terms(["pneumothorax"])
        assert len(lexicon_extract(lexicon, "all clear today")) == 0

    def test_case_insensitive(self):
        lexicon = Lexicon.from_terms(["Pleural Effusion"])
        entities = lexicon_extract(lexicon, "PLEURAL EFFUSION noted")
        assert entities.distinct == frozenset({"pleural effusion"})

    def test_interior_punctuation_blocks_phrase(self):
        lexicon = Lexicon.from_terms(["pleural effusion", "effusion"])
        entities = lexicon_extract(lexicon, "pleural, effusion")
        assert [e.normalized for e in entities] == ["effusion"]

    def test_empty_lexicon_rejected(self):
        with pytest.raises(ValueError):
            Lexicon.from_terms([])
        with pytest.raises(ValueError):
            lexicon_extract(Lexicon(terms=frozenset()), "text")

    @given(
        text=st.text(
            alphabet=st.sampled_from("abc xy.\n"), min_size=0, max_size=80
        )
    )
    def test_spans_sorted_and_non_overlapping(self, text):
        lexicon = Lexicon.from_terms(["ab", "abc", "xy", "a b"])
        entities = lexicon_extract(lexicon, text)
        spans = [e.span for e in entities]
        assert spans == sorted(spans)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2
        for entity in entities:
            start, end = entity.span
            assert 0 <= start < end <= len(text)
            assert normalize_entity(text[start:end]) == entity.normalized

    def test_distinct_never_larger_than_mentions(self, lexicon, bundled_corpus):
        from radcompare import SectionSelector, Side, pair_text

        for pair in bundled_corpus:
            entities = lexicon_extract(
                lexicon, pair_text(pair, Side.FINAL, SectionSelector.BOTH)
            )
            assert len(entities.distinct) <= len(entities)


class TestEntitySet:
    def test_of_sorts_by_span(self):
        entities = [
            Entity(surface="b", normalized="b", span=(5, 6)),
            Entity(surface="a", normalized="a", span=(0, 1)),
        ]
        ordered = EntitySet.of(entities)
        assert [e.span for e in ordered] == [(0, 1), (5, 6)]

    def test_distinct_must_match(self):
        entity = Entity(surface="a", normalized="a", span=(0, 1))
        with pytest.raises(ValueError):
            EntitySet(entities=(entity,), distinct=frozenset({"b"}))

    def test_invalid_span_rejected(self):
        with pytest.raises(ValueError, match="invalid span"):
            Entity(surface="a", normalized="a", span=(3, 3))

    def test_from_terms(self):
        entities = EntitySet.from_terms(["effusion", "mass"])
        assert entities.distinct == frozenset({"effusion", "mass"})
        assert len(entities) == 2
