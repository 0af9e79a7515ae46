"""Similarity scores for report pairs.

Four methods live here: the word-for-word baseline, cosine scoring over
extracted entity sets, the four-way entity classification driven by a
context judge, and the weighted entity agreement score that combines them
into the full pipeline.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

from .corpus import ReportPair, SectionSelector, Side, pair_text
from .extraction import EntitySet, tokenize
from .llm import Judgment

Extractor = Callable[[str], EntitySet]
ContextJudge = Callable[[str, str, str], Judgment]
SimilarityProvider = Callable[[str, str], float]

EMPTY_REPORTS_FLAG = "empty_reports"
EMPTY_FINAL_FLAG = "empty_final"


class ScoringError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


class Method(Enum):
    WORD_FOR_WORD = "wfw"
    DIRECT_LLM = "llm"
    NER_COSINE = "cosine"
    ENTSCORE = "entscore"


@dataclass(frozen=True, slots=True)
class Weights:
    """Penalty weights for the three disagreement categories.

    Defaults penalize missing content hardest, contextual mismatches next,
    and surplus content least.
    """

    w_mismatch: float = 1.5
    w_missing: float = 2.0
    w_surplus: float = 1.0

    def __post_init__(self) -> None:
        for name in ("w_mismatch", "w_missing", "w_surplus"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True, slots=True)
class Classification:
    """Four-way partition of the distinct entities of a report pair.

    matched/mismatched split the shared entities by context judgment;
    missing holds final-only entities, surplus preliminary-only ones.
    """

    matched: frozenset[str]
    mismatched: frozenset[str]
    missing: frozenset[str]
    surplus: frozenset[str]

    def __post_init__(self) -> None:
        sets = (self.matched, self.mismatched, self.missing, self.surplus)
        total = sum(len(s) for s in sets)
        if len(frozenset.union(*sets)) != total:
            raise ValueError("classification categories overlap")

    def counts(self) -> dict[str, int]:
        return {
            "matched": len(self.matched),
            "mismatched": len(self.mismatched),
            "missing": len(self.missing),
            "surplus": len(self.surplus),
        }

    def category_of(self, normalized: str) -> str:
        for name in ("matched", "mismatched", "missing", "surplus"):
            if normalized in getattr(self, name):
                return name
        raise KeyError(normalized)


class ScoreValue(float):
    """A score in [0,1] that can carry warning flags."""

    flags: tuple[str, ...]

    def __new__(cls, value: float, flags: tuple[str, ...] = ()) -> "ScoreValue":
        obj = super().__new__(cls, value)
        obj.flags = flags
        return obj


@dataclass(frozen=True, slots=True)
class NerCosineBreakdown:
    """How an entity-cosine score decomposes over the final report's entities."""

    c: int
    per_entity_best: Mapping[str, float]
    t: int
    score: float
    best_partner: Mapping[str, str | None] = field(default_factory=dict)
    flags: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class ScoreResult:
    """Outcome of scoring one report pair with one method."""

    method: Method
    score10: float
    score01: float | None = None
    classification: Classification | None = None
    explanation: str | None = None
    flags: tuple[str, ...] = ()
    weights: Weights | None = None

    def __post_init__(self) -> None:
        if self.score01 is not None and not math.isclose(
            self.score10, 10.0 * self.score01, rel_tol=0.0, abs_tol=1e-12
        ):
            raise ValueError("score10 must equal 10 * score01")


def word_for_word(final_text: str, prelim_text: str) -> float:
    """Fraction of the final report's word types that also appear in the
    preliminary report."""
    final_types = set(tokenize(final_text))
    if not final_types:
        raise ValueError("final text tokenizes to zero words")
    prelim_types = set(tokenize(prelim_text))
    return len(final_types & prelim_types) / len(final_types)


def _trigram_counts(term: str) -> Counter[str]:
    padded = f" {term} "
    return Counter(padded[i : i + 3] for i in range(len(padded) - 2))


def entity_pair_similarity(a: str, b: str) -> float:
    """Cosine similarity of character-trigram count vectors.

    Terms are padded with one space on each side so word edges count.
    Symmetric, and exactly 1.0 for identical terms.
    """
    if not a or not b:
        raise ValueError("entities must be non-empty")
    ca = _trigram_counts(a)
    cb = _trigram_counts(b)
    dot = sum(count * cb[tri] for tri, count in ca.items())
    if dot == 0:
        return 0.0
    na = sum(c * c for c in ca.values())
    nb = sum(c * c for c in cb.values())
    return min(dot / math.sqrt(na * nb), 1.0)


def ner_cosine_score(
    final: EntitySet,
    prelim: EntitySet,
    sim: SimilarityProvider = entity_pair_similarity,
) -> NerCosineBreakdown:
    """Entity-overlap score: exact matches count 1, every unmatched final
    entity contributes its best similarity against the unmatched preliminary
    entities, and the total is divided by the final entity count.

    Ties in the best match resolve to the lexicographically smallest
    preliminary entity. An empty final set scores 1.0 with a warning flag.
    """
    final_terms = final.distinct
    prelim_terms = prelim.distinct
    t = len(final_terms)
    if t == 0:
        return NerCosineBreakdown(
            c=0, per_entity_best={}, t=0, score=1.0, flags=(EMPTY_FINAL_FLAG,)
        )
    c = len(final_terms & prelim_terms)
    unmatched_final = sorted(final_terms - prelim_terms)
    unmatched_prelim = sorted(prelim_terms - final_terms)

    per_entity_best: dict[str, float] = {}
    best_partner: dict[str, str | None] = {}
    for entity in unmatched_final:
        best = 0.0
        partner: str | None = None
        for candidate in unmatched_prelim:
            value = sim(entity, candidate)
            if value > best:
                best = value
                partner = candidate
        per_entity_best[entity] = best
        best_partner[entity] = partner

    score = (c + sum(per_entity_best.values())) / t
    return NerCosineBreakdown(
        c=c,
        per_entity_best=per_entity_best,
        t=t,
        score=score,
        best_partner=best_partner,
    )


def classify_entities(
    final: EntitySet,
    prelim: EntitySet,
    judge: ContextJudge,
    final_text: str,
    prelim_text: str,
    max_workers: int = 1,
) -> Classification:
    """Partition distinct entities into matched/mismatched/missing/surplus.

    The judge is invoked exactly once per shared entity (concurrently when
    max_workers > 1); the result does not depend on completion order.
    """
    shared = sorted(final.distinct & prelim.distinct)

    def judged(entity: str) -> tuple[str, Judgment]:
        try:
            return entity, judge(entity, final_text, prelim_text)
        except Exception as exc:
            raise ScoringError(
                f"context judgment failed for entity '{entity}': {exc}"
            ) from exc

    if max_workers > 1 and len(shared) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = dict(pool.map(judged, shared))
    else:
        results = dict(judged(entity) for entity in shared)

    matched = frozenset(e for e, v in results.items() if v is Judgment.SAME)
    mismatched = frozenset(e for e, v in results.items() if v is Judgment.DIFFERENT)
    return Classification(
        matched=matched,
        mismatched=mismatched,
        missing=frozenset(final.distinct - prelim.distinct),
        surplus=frozenset(prelim.distinct - final.distinct),
    )


def agreement_score(cls: Classification, w: Weights) -> ScoreValue:
    """Weighted entity agreement score in [0,1].

    matched / (matched + w_mismatch*mismatched + w_missing*missing +
    w_surplus*surplus). Two entity-free reports score 1.0 with a warning
    flag since this method cannot distinguish them.
    """
    matched = len(cls.matched)
    penalty = (
        w.w_mismatch * len(cls.mismatched)
        + w.w_missing * len(cls.missing)
        + w.w_surplus * len(cls.surplus)
    )
    if matched == 0 and penalty == 0:
        return ScoreValue(1.0, flags=(EMPTY_REPORTS_FLAG,))
    if matched == 0:
        return ScoreValue(0.0)
    return ScoreValue(matched / (matched + penalty))


def entscore(
    pair: ReportPair,
    extractor: Extractor,
    judge: ContextJudge,
    weights: Weights,
    *,
    selector: SectionSelector = SectionSelector.BOTH,
    explain: bool = False,
    explainer: Callable[[float, str, str], str] | None = None,
    max_workers: int = 1,
) -> ScoreResult:
    """Full pipeline: extract both sides, classify, score, optionally explain."""

    def stage(name: str, fn: Callable[[], object]) -> object:
        try:
            return fn()
        except ScoringError:
            raise
        except Exception as exc:
            raise ScoringError(f"stage '{name}' failed for pair '{pair.id}': {exc}") from exc

    final_text = pair_text(pair, Side.FINAL, selector)
    prelim_text = pair_text(pair, Side.PRELIMINARY, selector)
    final_set = stage("extract final", lambda: extractor(final_text))
    prelim_set = stage("extract preliminary", lambda: extractor(prelim_text))
    classification = classify_entities(
        final_set, prelim_set, judge, final_text, prelim_text, max_workers=max_workers
    )
    score = agreement_score(classification, weights)

    explanation = None
    if explain:
        if explainer is None:
            raise ValueError("explain requested without an explainer")
        explanation = stage(
            "explain", lambda: explainer(float(score), final_text, prelim_text)
        )

    return ScoreResult(
        method=Method.ENTSCORE,
        score10=10.0 * float(score),
        score01=float(score),
        classification=classification,
        explanation=explanation,
        flags=score.flags,
        weights=weights,
    )
