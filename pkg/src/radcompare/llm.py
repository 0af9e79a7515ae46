"""Prompt construction, chat transport, reply parsing, and the mock backend.

The HTTP backend speaks a chat-completion style endpoint: one user message,
temperature from the config, first choice text taken as the reply. The mock
backend is a pure function of the prompt and implements fixed rules so the
whole engine runs deterministically without a model server.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass

import requests

from .extraction import token_spans, tokenize

ENV_BASE_URL = "RADCOMPARE_LLM_BASE_URL"
ENV_TOKEN = "RADCOMPARE_LLM_TOKEN"

NEGATION_CUES = ("no", "not", "without")

CONTEXT_PROMPT = (
    "Can you say whether the entity: '{entity}' is used in the same context "
    "or different context in these two texts?\n"
    "Text1: '{report1}'\n"
    "Text2: '{report2}'\n"
    "Please reply with a single-word answer: either 'same' or 'different'."
)

DIRECT_PROMPT = (
    "Please provide a similarity score out of 10 for these two reports. "
    "Focus on technical content rather than style or phrasing.\n\n"
    "Score: <score>, Reasoning: <reasoning>\n\n"
    "Report 1: {report1}, Report 2: {report2}"
)

EXPLAIN_PROMPT = (
    "These two reports have a similarity score of {score}. "
    "Report 1 is the final report, and Report 2 is the preliminary report.\n"
    "Can you give a reason for the similarity score? "
    "Focus on technical details rather than structure or style.\n"
    "Report 1: {report1}\n"
    "Report 2: {report2}"
)

NEGATION_PROMPT = (
    "Generate a report identical to this one but with one negation change, "
    "e.g., “broken arm” becomes “no broken arm”. "
    "Please only make one change from the original report.\n\n"
    "Report: {report}\n\n"
    "Please only output the report, no other text."
)


class Backend(enum.Enum):
    HTTP = "http"
    MOCK = "mock"


class BackendError(RuntimeError):
    """Transport failure talking to the inference endpoint."""


class ReplyParseError(ValueError):
    """The model reply did not match the expected shape after retries."""


@dataclass(frozen=True, slots=True)
class LlmConfig:
    """How to reach (or fake) the chat-completion backend."""

    backend: Backend = Backend.MOCK
    base_url: str | None = None
    model_name: str = "default"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backend is Backend.HTTP and not self.effective_base_url:
            raise ValueError("HTTP backend requires a base_url")

    @property
    def effective_base_url(self) -> str | None:
        return os.environ.get(ENV_BASE_URL) or self.base_url


class Judgment(enum.Enum):
    SAME = "same"
    DIFFERENT = "different"


@dataclass(frozen=True, slots=True)
class ContextJudgment:
    value: Judgment
    raw_reply: str


@dataclass(frozen=True, slots=True)
class DirectScore:
    score: float
    reasoning: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 10.0:
            raise ValueError("score out of range")


def build_context_prompt(entity: str, report1: str, report2: str) -> str:
    return CONTEXT_PROMPT.format(entity=entity, report1=report1, report2=report2)


def build_direct_prompt(report1: str, report2: str) -> str:
    return DIRECT_PROMPT.format(report1=report1, report2=report2)


def build_explain_prompt(score: float, report1: str, report2: str) -> str:
    return EXPLAIN_PROMPT.format(score=f"{score:.2f}", report1=report1, report2=report2)


def build_negation_prompt(report: str) -> str:
    return NEGATION_PROMPT.format(report=report)


# --- reply parsing ---------------------------------------------------------


def parse_context_reply(reply: str) -> Judgment | None:
    """First standalone 'same'/'different' token, or None when ambiguous.

    Returns None when neither keyword appears as a standalone token or when
    both do; callers retry and eventually fail.
    """
    tokens = tokenize(reply)
    has_same = "same" in tokens
    has_different = "different" in tokens
    if has_same == has_different:
        return None
    return Judgment.SAME if has_same else Judgment.DIFFERENT


_SCORE_MARKER = re.compile(r"score\s*:", re.IGNORECASE)
_REASONING_MARKER = re.compile(r"reasoning\s*:", re.IGNORECASE)
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")


def parse_direct_reply(reply: str) -> DirectScore:
    """Locate 'Score:' then the first number, and 'Reasoning:' then the rest.

    Markers may sit anywhere in the reply. A score outside [0,10] raises
    ValueError immediately; a missing marker or number raises
    ReplyParseError (retryable).
    """
    score_m = _SCORE_MARKER.search(reply)
    if score_m is None:
        raise ReplyParseError("missing 'Score:' marker")
    number_m = _NUMBER.search(reply, score_m.end())
    if number_m is None:
        raise ReplyParseError("no number after 'Score:' marker")
    score = float(number_m.group())
    if not 0.0 <= score <= 10.0:
        raise ValueError("score out of range")

    reasoning_m = _REASONING_MARKER.search(reply)
    if reasoning_m is not None:
        if reasoning_m.start() > score_m.start():
            reasoning = reply[reasoning_m.end():]
        else:
            reasoning = reply[reasoning_m.end() : score_m.start()]
    else:
        reasoning = reply[: score_m.start()] + reply[number_m.end():]
    return DirectScore(score=score, reasoning=reasoning.strip())


# --- mock backend ----------------------------------------------------------


def _negated_occurrence(entity: str, text: str) -> bool:
    """True when some occurrence of the entity has a negation cue within the
    three tokens immediately preceding it."""
    spans = token_spans(text)
    tokens = [tok for tok, _, _ in spans]
    needle = entity.split()
    width = len(needle)
    for i in range(len(tokens) - width + 1):
        if tokens[i : i + width] != needle:
            continue
        if any(tok in NEGATION_CUES for tok in tokens[max(0, i - 3) : i]):
            return True
    return False


def _mock_context_reply(prompt: str) -> str:
    head = "Can you say whether the entity: '"
    mid1 = "\nText1: '"
    mid2 = "'\nText2: '"
    tail = "'\nPlease reply with a single-word answer: either 'same' or 'different'."
    entity = prompt[len(head) : prompt.index("' is used in the same context")]
    t1_start = prompt.index(mid1) + len(mid1)
    t2_marker = prompt.rindex(mid2)
    report1 = prompt[t1_start:t2_marker]
    report2 = prompt[t2_marker + len(mid2) : prompt.rindex(tail)]
    differs = _negated_occurrence(entity, report1) != _negated_occurrence(entity, report2)
    return "different" if differs else "same"


def _mock_direct_reply(prompt: str) -> str:
    body = prompt.split("\n\n", 2)[2]
    assert body.startswith("Report 1: ")
    split = body.rindex(", Report 2: ")
    report1 = body[len("Report 1: ") : split]
    report2 = body[split + len(", Report 2: "):]
    types1 = set(tokenize(report1))
    types2 = set(tokenize(report2))
    overlap = len(types1 & types2) / len(types1) if types1 else 0.0
    score = round(10 * overlap, 1)
    return (
        f"Score: {score:.1f}, Reasoning: shared technical vocabulary between "
        "the two reports."
    )


def _mock_explain_reply(prompt: str) -> str:
    score = re.search(r"similarity score of (\d+\.\d{2})\.", prompt).group(1)  # type: ignore[union-attr]
    r1_marker = "\nReport 1: "
    r2_marker = "\nReport 2: "
    r2_at = prompt.rindex(r2_marker)
    report1 = prompt[prompt.index(r1_marker) + len(r1_marker) : r2_at]
    report2 = prompt[r2_at + len(r2_marker):]
    shared = len(set(tokenize(report1)) & set(tokenize(report2)))
    return (
        f"Reports share {shared} matched findings; the similarity score of "
        f"{score} reflects the remaining differences in technical content."
    )


def _mock_negation_reply(prompt: str) -> str:
    from .perturb import inject_negation_rule  # deferred: perturb imports this module

    from .extraction import lexicon_extract, load_default_lexicon

    head = "Report: "
    tail = "\n\nPlease only output the report, no other text."
    start = prompt.index(head) + len(head)
    report = prompt[start : prompt.rindex(tail)]
    entities = lexicon_extract(load_default_lexicon(), report)
    record = inject_negation_rule(report, entities, 0)
    return record.perturbed


def mock_reply(prompt: str) -> str:
    """Deterministic reply for any prompt; pure function of its input."""
    if prompt.startswith("Can you say whether the entity: '"):
        return _mock_context_reply(prompt)
    if prompt.startswith("Please provide a similarity score out of 10"):
        return _mock_direct_reply(prompt)
    if prompt.startswith("Generate a report identical to this one"):
        return _mock_negation_reply(prompt)
    if prompt.startswith("These two reports have a similarity score of"):
        return _mock_explain_reply(prompt)
    return "Mock reply."


# --- transport -------------------------------------------------------------


def _http_chat(config: LlmConfig, prompt: str) -> str:
    url = config.effective_base_url
    headers = {"Content-Type": "application/json"}
    token = os.environ.get(ENV_TOKEN)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    payload = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    attempts = config.max_retries + 1
    last_error: Exception | None = None
    for _ in range(attempts):
        try:
            response = requests.post(
                url, json=payload, headers=headers, timeout=config.timeout
            )
            response.raise_for_status()
            data = response.json()
            choice = data["choices"][0]
            if "message" in choice:
                return choice["message"]["content"]
            return choice["text"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            last_error = exc
    raise BackendError(
        f"chat request to {url} failed after {attempts} attempts: {last_error}"
    )


def chat(config: LlmConfig, prompt: str) -> str:
    """One completion for one prompt, retried on transport failure."""
    if config.backend is Backend.MOCK:
        return mock_reply(prompt)
    return _http_chat(config, prompt)


# --- gateway operations ----------------------------------------------------


def judge_entity_context(
    config: LlmConfig, entity: str, report1: str, report2: str
) -> ContextJudgment:
    """Ask whether a shared entity is used in the same context in both reports.

    report1 is the final report and report2 the preliminary one. Ambiguous
    replies are retried with the same prompt up to max_retries.
    """
    prompt = build_context_prompt(entity, report1, report2)
    attempts = config.max_retries + 1
    reply = ""
    for _ in range(attempts):
        reply = chat(config, prompt)
        value = parse_context_reply(reply)
        if value is not None:
            return ContextJudgment(value=value, raw_reply=reply)
    raise ReplyParseError(
        f"unparseable context judgment for entity '{entity}' "
        f"after {attempts} attempts: {reply!r}"
    )


def direct_similarity(config: LlmConfig, report1: str, report2: str) -> DirectScore:
    """Whole-report 0-10 similarity judged directly by the model."""
    if not report1.strip() or not report2.strip():
        raise ValueError("both report texts must be non-empty")
    prompt = build_direct_prompt(report1, report2)
    attempts = config.max_retries + 1
    error: ReplyParseError | None = None
    for _ in range(attempts):
        reply = chat(config, prompt)
        try:
            return parse_direct_reply(reply)
        except ReplyParseError as exc:
            error = exc
    raise ReplyParseError(f"unparseable similarity reply after {attempts} attempts: {error}")


def explain_score(
    config: LlmConfig, score: float, final_text: str, prelim_text: str
) -> str:
    """Narrative justification for a similarity score, anchored on the score."""
    if not final_text.strip():
        raise ValueError("final text must be non-empty")
    if not prelim_text.strip():
        raise ValueError("preliminary text must be non-empty")
    prompt = build_explain_prompt(score, final_text, prelim_text)
    return chat(config, prompt)
