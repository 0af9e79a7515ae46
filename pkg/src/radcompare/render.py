"""Self-contained HTML artifacts: entity highlighting and comparison reports.

Category colors are fixed: matched entities render green, mismatched yellow,
missing red, surplus blue. The concrete shades are the constants below.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from .corpus import ReportPair, SectionSelector, Side, pair_text
from .extraction import EntitySet
from .scoring import Classification, Method, ScoreResult

LEGEND = {
    "matched": "green",
    "mismatched": "yellow",
    "missing": "red",
    "surplus": "blue",
}

# pastel shades of the legend colors, chosen for contrast against black text
CATEGORY_COLORS = {
    "matched": "#c8e6c9",
    "mismatched": "#fff59d",
    "missing": "#ffcdd2",
    "surplus": "#bbdefb",
}

_PAGE_STYLE = (
    "body{font-family:sans-serif;margin:1.5em;color:#111;}"
    ".panels{display:flex;gap:1.5em;}"
    ".panel{flex:1;border:1px solid #ccc;border-radius:4px;padding:1em;}"
    ".panel h2{font-size:1em;margin-top:0;}"
    ".report-text{white-space:pre-wrap;line-height:1.6;}"
    ".ent{padding:0 2px;border-radius:2px;}"
    ".legend{margin:1em 0;}"
    ".legend .chip{padding:2px 8px;margin-right:8px;border-radius:2px;}"
    "table.counts{border-collapse:collapse;margin:1em 0;}"
    "table.counts td,table.counts th{border:1px solid #ccc;padding:4px 10px;}"
    ".explanation{border-left:3px solid #888;padding-left:1em;margin:1em 0;}"
)


@dataclass(frozen=True, slots=True)
class VisualizationDoc:
    """A standalone highlight document plus its embeddable body markup."""

    html: str
    legend: dict[str, str]
    body: str
    span_count: int


def _highlight(text: str, entities: EntitySet, category_for: dict[str, str]) -> tuple[str, int]:
    last = 0
    parts: list[str] = []
    count = 0
    for entity in entities:
        start, end = entity.span
        if start < last:
            raise ValueError(f"overlapping entity span {entity.span!r}")
        if end > len(text):
            raise ValueError(f"entity span {entity.span!r} outside text bounds")
        category = category_for.get(entity.normalized)
        if category is None:
            raise ValueError(
                f"entity '{entity.normalized}' missing from the classification"
            )
        parts.append(html.escape(text[last:start]))
        parts.append(
            f'<span class="ent ent-{category}" '
            f'style="background-color:{CATEGORY_COLORS[category]};">'
            f"{html.escape(entity.surface)}</span>"
        )
        count += 1
        last = end
    parts.append(html.escape(text[last:]))
    return "".join(parts), count


def _legend_markup() -> str:
    chips = "".join(
        f'<span class="chip" style="background-color:{CATEGORY_COLORS[cat]};">'
        f"{cat} ({color})</span>"
        for cat, color in LEGEND.items()
    )
    return f'<div class="legend">{chips}</div>'


def _document(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>\n"
        '<html lang="en"><head><meta charset="utf-8"/>'
        f"<title>{html.escape(title)}</title>"
        f"<style>{_PAGE_STYLE}</style></head>"
        f"<body>{body}</body></html>\n"
    )


def render_entity_html(
    pair: ReportPair,
    final_entities: EntitySet,
    prelim_entities: EntitySet,
    cls: Classification,
    selector: SectionSelector = SectionSelector.BOTH,
) -> VisualizationDoc:
    """Side-by-side report panels with one highlighted span per entity occurrence.

    The classification must have been produced from these entity sets;
    every distinct form must belong to one of its categories.
    """
    final_text = pair_text(pair, Side.FINAL, selector)
    prelim_text = pair_text(pair, Side.PRELIMINARY, selector)

    shared = {e: "matched" for e in cls.matched}
    shared.update({e: "mismatched" for e in cls.mismatched})
    final_categories = dict(shared)
    final_categories.update({e: "missing" for e in cls.missing})
    prelim_categories = dict(shared)
    prelim_categories.update({e: "surplus" for e in cls.surplus})

    prelim_markup, prelim_count = _highlight(prelim_text, prelim_entities, prelim_categories)
    final_markup, final_count = _highlight(final_text, final_entities, final_categories)

    body = (
        f"<h1>Entity comparison: {html.escape(pair.id)}</h1>"
        + _legend_markup()
        + '<div class="panels">'
        + '<div class="panel"><h2>Preliminary report</h2>'
        + f'<div class="report-text">{prelim_markup}</div></div>'
        + '<div class="panel"><h2>Final report</h2>'
        + f'<div class="report-text">{final_markup}</div></div>'
        + "</div>"
    )
    return VisualizationDoc(
        html=_document(f"Entity comparison: {pair.id}", body),
        legend=dict(LEGEND),
        body=body,
        span_count=prelim_count + final_count,
    )


def render_comparison_report(
    result: ScoreResult,
    doc: VisualizationDoc,
    explanation: str | None = None,
) -> str:
    """One document bundling score, category counts, weights, highlights and
    the optional narrative explanation.

    The explicit explanation argument wins over result.explanation.
    """
    if result.method is not Method.ENTSCORE:
        raise ValueError("comparison reports require an entity-score result")
    if result.score01 is None or result.classification is None:
        raise ValueError("result lacks a score01 or classification")

    counts = result.classification.counts()
    rows = "".join(
        f"<tr><td>{category}</td><td>{count}</td></tr>"
        for category, count in counts.items()
    )
    weight_line = ""
    if result.weights is not None:
        weight_line = (
            "<p>Weights: mismatch "
            f"{result.weights.w_mismatch:g}, missing {result.weights.w_missing:g}, "
            f"surplus {result.weights.w_surplus:g}</p>"
        )
    text = explanation if explanation is not None else result.explanation
    explanation_block = (
        f'<div class="explanation"><h2>Explanation</h2>'
        f"<p>{html.escape(text)}</p></div>"
        if text
        else ""
    )
    flags_line = (
        f"<p>Warnings: {html.escape(', '.join(result.flags))}</p>" if result.flags else ""
    )

    body = (
        "<h1>Report comparison</h1>"
        f"<p>Similarity score: <strong>{result.score01:.2f}</strong> "
        f"({result.score10:.1f}/10)</p>"
        f'<table class="counts"><tr><th>Category</th><th>Entities</th></tr>'
        f"{rows}</table>"
        + weight_line
        + flags_line
        + doc.body
        + explanation_block
    )
    return _document("Report comparison", body)
