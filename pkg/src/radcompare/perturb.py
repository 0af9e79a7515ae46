"""Single-negation report variants, via an LLM or a deterministic rule.

Both generators guarantee the result differs from the original by exactly
one inserted or removed negation token; verify_single_change is the gate.
"""

from __future__ import annotations

import difflib
import enum
from dataclasses import dataclass

from .extraction import EntitySet, token_spans
from .llm import NEGATION_CUES, LlmConfig, build_negation_prompt, chat


class PerturbationError(RuntimeError):
    """The generator could not produce a verified single-negation variant."""


class PerturbationKind(enum.Enum):
    NEGATION_ADDED = "negation_added"
    NEGATION_REMOVED = "negation_removed"


@dataclass(frozen=True, slots=True)
class PerturbationRecord:
    """An original report, its variant, and where the negation changed.

    site spans the negation token: in the perturbed text for additions, in
    the original text for removals.
    """

    original: str
    perturbed: str
    site: tuple[int, int]
    kind: PerturbationKind


@dataclass(frozen=True, slots=True)
class VerifyResult:
    ok: bool
    reason: str | None = None
    site: tuple[int, int] | None = None
    kind: PerturbationKind | None = None


def verify_single_change(original: str, perturbed: str) -> VerifyResult:
    """Token-level diff check: exactly one negation token inserted or removed.

    Tokens are casefolded, so a capitalization shift at the change site does
    not count as a second edit.
    """
    spans_a = token_spans(original)
    spans_b = token_spans(perturbed)
    tokens_a = [tok for tok, _, _ in spans_a]
    tokens_b = [tok for tok, _, _ in spans_b]
    matcher = difflib.SequenceMatcher(None, tokens_a, tokens_b, autojunk=False)
    edits = [op for op in matcher.get_opcodes() if op[0] != "equal"]

    if not edits:
        return VerifyResult(ok=False, reason="no change")
    if len(edits) > 1:
        return VerifyResult(ok=False, reason="extra edit")

    tag, i1, i2, j1, j2 = edits[0]
    if tag == "insert" and j2 - j1 == 1 and tokens_b[j1] in NEGATION_CUES:
        _, start, end = spans_b[j1]
        return VerifyResult(
            ok=True, site=(start, end), kind=PerturbationKind.NEGATION_ADDED
        )
    if tag == "delete" and i2 - i1 == 1 and tokens_a[i1] in NEGATION_CUES:
        _, start, end = spans_a[i1]
        return VerifyResult(
            ok=True, site=(start, end), kind=PerturbationKind.NEGATION_REMOVED
        )
    if tag == "replace":
        return VerifyResult(ok=False, reason="edit is a replacement, not a pure insertion or deletion")
    if (tag == "insert" and j2 - j1 > 1) or (tag == "delete" and i2 - i1 > 1):
        return VerifyResult(ok=False, reason="more than one token changed")
    return VerifyResult(ok=False, reason="changed token is not a negation cue")


def _sentence_initial(text: str, position: int) -> bool:
    prefix = text[:position]
    stripped = prefix.rstrip()
    if not stripped:
        return True
    if "\n" in prefix[len(stripped):]:
        return True
    return stripped[-1] in ".!?"


def inject_negation_rule(
    report: str, entities: EntitySet, index: int
) -> PerturbationRecord:
    """Toggle negation at the index-th entity occurrence.

    Removes a standalone "no" immediately before the entity when present,
    otherwise inserts one; the inserted token is capitalized at sentence
    starts. Applying the rule twice at the same site restores the original.
    """
    if not entities.entities:
        raise ValueError("entity set is empty")
    if not 0 <= index < len(entities.entities):
        raise ValueError(f"index {index} out of range for {len(entities.entities)} entities")

    entity = entities.entities[index]
    start = entity.span[0]
    spans = token_spans(report)
    preceding = [
        (tok, s, e) for tok, s, e in spans if e <= start and report[e:start].strip() == ""
    ]

    if preceding and preceding[-1][0] == "no":
        _, tok_start, tok_end = preceding[-1]
        perturbed = report[:tok_start] + report[start:]
        if _sentence_initial(report, tok_start):
            perturbed = (
                perturbed[:tok_start]
                + perturbed[tok_start : tok_start + 1].upper()
                + perturbed[tok_start + 1 :]
            )
        return PerturbationRecord(
            original=report,
            perturbed=perturbed,
            site=(tok_start, tok_end),
            kind=PerturbationKind.NEGATION_REMOVED,
        )

    if _sentence_initial(report, start):
        perturbed = (
            report[:start]
            + "No "
            + report[start : start + 1].lower()
            + report[start + 1 :]
        )
    else:
        perturbed = report[:start] + "no " + report[start:]
    return PerturbationRecord(
        original=report,
        perturbed=perturbed,
        site=(start, start + 2),
        kind=PerturbationKind.NEGATION_ADDED,
    )


def generate_negation_llm(config: LlmConfig, report: str) -> PerturbationRecord:
    """Ask the model for a single-negation variant and verify it.

    Unverifiable outputs are retried up to max_retries, then rejected.
    """
    if not report.strip():
        raise ValueError("report must be non-empty")
    prompt = build_negation_prompt(report)
    attempts = config.max_retries + 1
    reason = "no reply"
    for _ in range(attempts):
        candidate = chat(config, prompt).strip()
        result = verify_single_change(report, candidate)
        if result.ok:
            assert result.site is not None and result.kind is not None
            return PerturbationRecord(
                original=report,
                perturbed=candidate,
                site=result.site,
                kind=result.kind,
            )
        reason = result.reason or "unverifiable change"
    raise PerturbationError(
        f"negation generation failed after {attempts} attempts: {reason}"
    )
