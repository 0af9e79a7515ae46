"""Semantic comparison of preliminary and final radiology reports."""

from .corpus import (
    CorpusError,
    Modality,
    Report,
    ReportPair,
    SectionSelector,
    Side,
    pair_text,
    parse_corpus,
    serialize_corpus,
)
from .extraction import (
    Entity,
    EntitySet,
    Lexicon,
    lexicon_extract,
    load_default_lexicon,
    normalize_entity,
)
from .llm import (
    Backend,
    BackendError,
    ContextJudgment,
    DirectScore,
    Judgment,
    LlmConfig,
    ReplyParseError,
    chat,
    direct_similarity,
    explain_score,
    judge_entity_context,
)
from .scoring import (
    Classification,
    Method,
    NerCosineBreakdown,
    ScoreResult,
    Weights,
    agreement_score,
    classify_entities,
    entity_pair_similarity,
    entscore,
    ner_cosine_score,
    word_for_word,
)
from .perturb import (
    PerturbationKind,
    PerturbationRecord,
    generate_negation_llm,
    inject_negation_rule,
    verify_single_change,
)
from .evaluation import EvalSummary, Scale, evaluate, round_to_class, score_distribution
from .render import VisualizationDoc, render_comparison_report, render_entity_html
from .worker import ExternalExtractor, ProtocolError, WorkerError, external_extract

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendError",
    "Classification",
    "ContextJudgment",
    "CorpusError",
    "DirectScore",
    "Entity",
    "EntitySet",
    "EvalSummary",
    "ExternalExtractor",
    "Judgment",
    "Lexicon",
    "LlmConfig",
    "Method",
    "Modality",
    "NerCosineBreakdown",
    "PerturbationKind",
    "PerturbationRecord",
    "ProtocolError",
    "ReplyParseError",
    "Report",
    "ReportPair",
    "Scale",
    "ScoreResult",
    "SectionSelector",
    "Side",
    "VisualizationDoc",
    "Weights",
    "WorkerError",
    "agreement_score",
    "chat",
    "classify_entities",
    "direct_similarity",
    "entity_pair_similarity",
    "entscore",
    "evaluate",
    "explain_score",
    "external_extract",
    "generate_negation_llm",
    "inject_negation_rule",
    "judge_entity_context",
    "lexicon_extract",
    "load_default_lexicon",
    "ner_cosine_score",
    "normalize_entity",
    "pair_text",
    "parse_corpus",
    "render_comparison_report",
    "render_entity_html",
    "round_to_class",
    "score_distribution",
    "serialize_corpus",
    "verify_single_change",
    "word_for_word",
]
