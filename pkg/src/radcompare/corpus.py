"""Report pairs, section selection, and newline-delimited corpus files.

A corpus file holds one JSON object per line with the keys ``id``,
``modality``, ``preliminary.findings``, ``preliminary.impression``,
``final.findings``, ``final.impression`` and an optional numeric
``ground_truth_score``. Files are UTF-8 only.
"""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass
from typing import Iterable


class CorpusError(ValueError):
    """Malformed corpus content or an invalid report record."""


class Modality(enum.Enum):
    """Imaging modality of a report pair."""

    MRI = "MRI"
    CT = "CT"
    ULTRASOUND = "Ultrasound"
    UNKNOWN = "Unknown"

    @classmethod
    def from_string(cls, value: str) -> "Modality":
        for member in cls:
            if member.value.casefold() == value.casefold():
                return member
        raise ValueError(f"unknown modality {value!r}")


class Side(enum.Enum):
    """Which report of a pair an operation refers to."""

    PRELIMINARY = "preliminary"
    FINAL = "final"


class SectionSelector(enum.Enum):
    """Which report section(s) feed the comparison text.

    BOTH concatenates findings then impression with one blank line between;
    when only one section exists, BOTH yields that section alone.
    """

    FINDINGS_ONLY = "findings"
    IMPRESSION_ONLY = "impression"
    BOTH = "both"

    @classmethod
    def from_string(cls, value: str) -> "SectionSelector":
        for member in cls:
            if member.value == value.casefold():
                return member
        raise ValueError(f"unknown section selector {value!r}")


def _check_control_chars(text: str, field: str) -> None:
    for ch in text:
        if unicodedata.category(ch) == "Cc" and ch not in "\n\t":
            raise CorpusError(
                f"field '{field}' contains control character {ch!r}"
            )


def _present(section: str | None) -> bool:
    return section is not None and bool(section.strip())


@dataclass(frozen=True, slots=True)
class Report:
    """One radiology report; at least one section must be non-empty."""

    findings: str | None = None
    impression: str | None = None

    def __post_init__(self) -> None:
        if self.findings is not None:
            _check_control_chars(self.findings, "findings")
        if self.impression is not None:
            _check_control_chars(self.impression, "impression")
        if not self.has_findings and not self.has_impression:
            raise CorpusError("report has no non-empty section")

    @property
    def has_findings(self) -> bool:
        return _present(self.findings)

    @property
    def has_impression(self) -> bool:
        return _present(self.impression)


@dataclass(frozen=True, slots=True)
class ReportPair:
    """A preliminary report and the reviewed final report it became."""

    id: str
    modality: Modality
    preliminary: Report
    final: Report
    ground_truth_score: float | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("pair id must be non-empty")
        score = self.ground_truth_score
        if score is not None and not 0.0 <= score <= 10.0:
            raise CorpusError("score out of range")

    def report(self, side: Side) -> Report:
        return self.final if side is Side.FINAL else self.preliminary


def pair_text(pair: ReportPair, side: Side, selector: SectionSelector) -> str:
    """Deterministic comparison text for one side of a pair.

    Raises CorpusError when a single-section selector picks an absent
    section.
    """
    report = pair.report(side)
    if selector is SectionSelector.FINDINGS_ONLY:
        if not report.has_findings:
            raise CorpusError(f"pair '{pair.id}': findings section absent")
        return report.findings  # type: ignore[return-value]
    if selector is SectionSelector.IMPRESSION_ONLY:
        if not report.has_impression:
            raise CorpusError(f"pair '{pair.id}': impression section absent")
        return report.impression  # type: ignore[return-value]
    parts = []
    if report.has_findings:
        parts.append(report.findings)
    if report.has_impression:
        parts.append(report.impression)
    return "\n\n".join(parts)  # type: ignore[arg-type]


def _section_value(record: dict, key: str, field: str, lineno: int) -> str | None:
    value = record.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise CorpusError(
            f"malformed record, line {lineno}, field '{field}': not a string"
        )
    return value if value.strip() else None


def _parse_report(record: dict, key: str, lineno: int) -> Report:
    section = record.get(key)
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise CorpusError(
            f"malformed record, line {lineno}, field '{key}': not an object"
        )
    try:
        return Report(
            findings=_section_value(section, "findings", f"{key}.findings", lineno),
            impression=_section_value(
                section, "impression", f"{key}.impression", lineno
            ),
        )
    except CorpusError as exc:
        raise CorpusError(f"malformed record, line {lineno}: {exc}") from None


def parse_corpus(data: bytes) -> list[ReportPair]:
    """Parse a corpus file; fails on the first offending line.

    Order of pairs follows file order. Blank lines are ignored.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"corpus is not valid UTF-8: {exc}") from None

    pairs: list[ReportPair] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(
                f"malformed record, line {lineno}: {exc.msg}"
            ) from None
        if not isinstance(record, dict):
            raise CorpusError(f"malformed record, line {lineno}: not an object")

        pair_id = record.get("id")
        if not isinstance(pair_id, str) or not pair_id:
            raise CorpusError(
                f"malformed record, line {lineno}, field 'id': missing or empty"
            )
        if pair_id in seen:
            raise CorpusError(f"duplicate id '{pair_id}', line {lineno}")
        seen.add(pair_id)

        modality_raw = record.get("modality", Modality.UNKNOWN.value)
        try:
            modality = Modality.from_string(str(modality_raw))
        except ValueError:
            raise CorpusError(
                f"malformed record, line {lineno}, field 'modality': "
                f"{modality_raw!r}"
            ) from None

        score = record.get("ground_truth_score")
        if score is not None:
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise CorpusError(
                    f"malformed record, line {lineno}, "
                    "field 'ground_truth_score': not a number"
                )
            if not 0.0 <= float(score) <= 10.0:
                raise CorpusError(f"score out of range, line {lineno}")
            score = float(score)

        preliminary = _parse_report(record, "preliminary", lineno)
        final = _parse_report(record, "final", lineno)
        pairs.append(
            ReportPair(
                id=pair_id,
                modality=modality,
                preliminary=preliminary,
                final=final,
                ground_truth_score=score,
            )
        )
    return pairs


def serialize_corpus(pairs: Iterable[ReportPair]) -> bytes:
    """Inverse of parse_corpus; round-trips to an identical pair list."""
    lines = []
    for pair in pairs:
        record: dict = {
            "id": pair.id,
            "modality": pair.modality.value,
            "preliminary": {
                "findings": pair.preliminary.findings,
                "impression": pair.preliminary.impression,
            },
            "final": {
                "findings": pair.final.findings,
                "impression": pair.final.impression,
            },
        }
        if pair.ground_truth_score is not None:
            record["ground_truth_score"] = pair.ground_truth_score
        lines.append(json.dumps(record, ensure_ascii=False))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
