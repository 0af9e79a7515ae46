from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

import radcompare.llm as llm
from radcompare import (
    LlmConfig,
    PerturbationKind,
    generate_negation_llm,
    inject_negation_rule,
    lexicon_extract,
    verify_single_change,
)
from radcompare.extraction import Lexicon
from radcompare.perturb import PerturbationError


LEX = Lexicon.from_terms(
    ["back muscle spasm", "acute fracture", "fracture", "effusion", "spasm"]
)


class TestVerifySingleChange:
    def test_identical_texts(self):
        result = verify_single_change("same text", "same text")
        assert not result.ok
        assert result.reason == "no change"

    def test_single_insertion(self):
        result = verify_single_change("acute fracture seen", "no acute fracture seen")
        assert result.ok
        assert result.kind is PerturbationKind.NEGATION_ADDED
        assert result.site == (0, 2)

    def test_single_removal(self):
        result = verify_single_change("no acute fracture", "acute fracture")
        assert result.ok
        assert result.kind is PerturbationKind.NEGATION_REMOVED
        assert result.site == (0, 2)

    def test_capitalization_shift_not_an_edit(self):
        result = verify_single_change("Back muscle spasm.", "No back muscle spasm.")
        assert result.ok

    def test_insert_plus_replacement_fails(self):
        result = verify_single_change(
            "no change in the dens", "no no change in the fens"
        )
        assert not result.ok
        assert result.reason == "extra edit"

    def test_non_negation_insert_fails(self):
        result = verify_single_change("fracture seen", "fracture clearly seen")
        assert not result.ok
        assert result.reason == "changed token is not a negation cue"

    def test_two_token_insert_fails(self):
        result = verify_single_change("fracture", "no acute fracture")
        assert not result.ok

    def test_replacement_fails(self):
        result = verify_single_change("left fracture", "right fracture")
        assert not result.ok
        assert "replacement" in result.reason

    @pytest.mark.parametrize("cue", ["no", "not", "without"])
    def test_all_cues_accepted(self, cue):
        result = verify_single_change("fracture seen", f"fracture seen {cue}")
        assert result.ok


class TestInjectNegationRule:
    def test_sentence_initial_insertion(self):
        entities = lexicon_extract(LEX, "Back muscle spasm noted.")
        record = inject_negation_rule("Back muscle spasm noted.", entities, 0)
        assert record.perturbed == "No back muscle spasm noted."
        assert record.kind is PerturbationKind.NEGATION_ADDED
        assert record.site == (0, 2)

    def test_removal_branch(self):
        entities = lexicon_extract(LEX, "No fracture.")
        record = inject_negation_rule("No fracture.", entities, 0)
        assert record.perturbed == "Fracture."
        assert record.kind is PerturbationKind.NEGATION_REMOVED

    def test_mid_sentence_insertion_lowercase(self):
        text = "There is acute fracture."
        entities = lexicon_extract(LEX, text)
        record = inject_negation_rule(text, entities, 0)
        assert record.perturbed == "There is no acute fracture."

    def test_round_trip_involution(self):
        for text in (
            "Back muscle spasm noted.",
            "There is a fracture of the radius.",
            "No effusion.",
            "Small effusion persists.\nFracture is healing.",
        ):
            entities = lexicon_extract(LEX, text)
            first = inject_negation_rule(text, entities, 0)
            again = inject_negation_rule(
                first.perturbed, lexicon_extract(LEX, first.perturbed), 0
            )
            assert again.perturbed == text

    def test_index_out_of_range(self):
        entities = lexicon_extract(LEX, "Fracture.")
        with pytest.raises(ValueError, match="out of range"):
            inject_negation_rule("Fracture.", entities, 5)

    def test_empty_entities_rejected(self):
        entities = lexicon_extract(LEX, "nothing here")
        with pytest.raises(ValueError, match="empty"):
            inject_negation_rule("nothing here", entities, 0)

    def test_newline_counts_as_sentence_start(self):
        text = "Prior studies reviewed\nFracture of the ulna"
        entities = lexicon_extract(LEX, text)
        record = inject_negation_rule(text, entities, 0)
        assert record.perturbed == "Prior studies reviewed\nNo fracture of the ulna"

    @given(index=st.integers(0, 2))
    @settings(deadline=None)
    def test_every_record_passes_verification(self, index):
        text = "Effusion noted. No fracture. Back muscle spasm persists."
        entities = lexicon_extract(LEX, text)
        record = inject_negation_rule(text, entities, index)
        check = verify_single_change(record.original, record.perturbed)
        assert check.ok
        assert check.kind is record.kind

    def test_deterministic(self):
        text = "Back muscle spasm persists."
        entities = lexicon_extract(LEX, text)
        first = inject_negation_rule(text, entities, 0)
        second = inject_negation_rule(text, entities, 0)
        assert first == second


class TestGenerateNegationLlm:
    def test_mock_matches_rule_injector(self, mock_config):
        from radcompare import load_default_lexicon

        text = "Back muscle spasm noted."
        record = generate_negation_llm(mock_config, text)
        expected = inject_negation_rule(
            text, lexicon_extract(load_default_lexicon(), text), 0
        )
        assert record.perturbed == expected.perturbed
        assert "no back muscle spasm" in record.perturbed.casefold()
        check = verify_single_change(record.original, record.perturbed)
        assert check.ok

    def test_bad_reply_retried_then_error(self, monkeypatch):
        calls = []

        def scripted(config, prompt):
            calls.append(prompt)
            return "No change here and no fracture too"  # two insertions

        monkeypatch.setattr(llm, "chat", scripted)
        monkeypatch.setattr("radcompare.perturb.chat", scripted)
        config = LlmConfig(max_retries=2)
        with pytest.raises(PerturbationError, match="after 3 attempts"):
            generate_negation_llm(config, "Change here and fracture too")
        assert len(calls) == 3

    def test_empty_report_rejected(self, mock_config):
        with pytest.raises(ValueError, match="non-empty"):
            generate_negation_llm(mock_config, "   ")
