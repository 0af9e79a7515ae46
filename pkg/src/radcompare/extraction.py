"""Entity normalization, lexicon phrase matching, and entity sets.

The built-in extractor matches a lexicon of normalized phrases against a
report: greedy longest match, left to right, non-overlapping, on word
boundaries. Spans always index into the original text.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Casefolded alphanumeric tokens, in order."""
    return [m.group().casefold() for m in _TOKEN_RE.finditer(text)]


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """(casefolded token, start, end) triples over the original text."""
    return [(m.group().casefold(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _strip_outer_punct(text: str) -> str:
    start, end = 0, len(text)
    while start < end and unicodedata.category(text[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(text[end - 1]).startswith("P"):
        end -= 1
    return text[start:end]


def normalize_entity(raw: str) -> str:
    """Canonical entity form: casefold, collapse whitespace, strip outer punctuation.

    Idempotent. Raises ValueError("degenerate entity") when nothing remains.
    """
    if not raw:
        raise ValueError("degenerate entity")
    text = raw.casefold()
    previous = None
    while text != previous:
        previous = text
        text = _strip_outer_punct(text.strip())
    text = " ".join(text.split())
    if not text:
        raise ValueError("degenerate entity")
    return text


@dataclass(frozen=True, slots=True)
class Entity:
    """One entity mention with character offsets into its source text."""

    surface: str
    normalized: str
    span: tuple[int, int]
    label: str | None = None

    def __post_init__(self) -> None:
        start, end = self.span
        if not 0 <= start < end:
            raise ValueError(f"invalid span {self.span!r}")


@dataclass(frozen=True, slots=True)
class EntitySet:
    """Entity mentions ordered by span start plus their distinct normalized forms."""

    entities: tuple[Entity, ...]
    distinct: frozenset[str]

    def __post_init__(self) -> None:
        expected = frozenset(e.normalized for e in self.entities)
        if self.distinct != expected:
            raise ValueError("distinct forms do not match the entity list")

    def __len__(self) -> int:
        return len(self.entities)

    def __iter__(self):
        return iter(self.entities)

    @classmethod
    def of(cls, entities: Iterable[Entity]) -> "EntitySet":
        ordered = tuple(sorted(entities, key=lambda e: e.span))
        return cls(ordered, frozenset(e.normalized for e in ordered))

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "EntitySet":
        """Entity set over a synthetic source built by joining the terms."""
        entities = []
        offset = 0
        for term in terms:
            normalized = normalize_entity(term)
            entities.append(
                Entity(
                    surface=term,
                    normalized=normalized,
                    span=(offset, offset + len(term)),
                )
            )
            offset += len(term) + 1
        return cls.of(entities)


@dataclass(frozen=True, slots=True)
class Lexicon:
    """A set of normalized multi-word phrases used for matching."""

    terms: frozenset[str]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("lexicon is empty")
        if not all(self.terms):
            raise ValueError("lexicon contains an empty phrase")

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Lexicon":
        return cls(frozenset(normalize_entity(t) for t in terms))

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        """One phrase per line; blank lines and '#' comment lines skipped."""
        terms = [
            line.strip()
            for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        if not terms:
            raise ValueError("lexicon file holds no phrases")
        return cls.from_terms(terms)


def load_default_lexicon() -> Lexicon:
    """The clinical phrase lexicon bundled with the package."""
    text = resources.files("radcompare.data").joinpath("lexicon.txt").read_text("utf-8")
    return Lexicon.from_text(text)


def lexicon_extract(lexicon: Lexicon, text: str) -> EntitySet:
    """Extract lexicon phrases from text: greedy longest match, left to right.

    Matching runs over casefolded tokens, so phrases only match on word
    boundaries; tokens within a phrase may be separated by whitespace only.
    Returned spans are non-overlapping and sorted.
    """
    phrase_tokens = {tuple(term.split()) for term in lexicon.terms}
    max_len = max(len(p) for p in phrase_tokens)

    spans = token_spans(text)
    entities: list[Entity] = []
    i = 0
    n = len(spans)
    while i < n:
        matched = 0
        for length in range(min(max_len, n - i), 0, -1):
            window = spans[i : i + length]
            if tuple(tok for tok, _, _ in window) not in phrase_tokens:
                continue
            # multi-token phrases must not span interior punctuation
            contiguous = all(
                text[window[k][2] : window[k + 1][1]].isspace()
                for k in range(length - 1)
            )
            if not contiguous:
                continue
            start, end = window[0][1], window[-1][2]
            surface = text[start:end]
            entities.append(
                Entity(surface=surface, normalized=normalize_entity(surface), span=(start, end))
            )
            matched = length
            break
        i += matched if matched else 1
    return EntitySet.of(entities)
