"""Command-line interface: extract, compare, evaluate, perturb, visualize.

Exit status: 0 on success, 1 on input/usage errors, 2 on backend failure.
With the mock backend every command is deterministic: identical argv,
config and corpus produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import (
    ConfigError,
    EngineConfig,
    ExtractorRuntime,
    load_config,
    parse_extractor_spec,
    parse_llm_spec,
    parse_weights_spec,
)
from .corpus import (
    CorpusError,
    Report,
    ReportPair,
    SectionSelector,
    Side,
    pair_text,
    parse_corpus,
    serialize_corpus,
)
from .evaluation import Scale, confusion_csv, evaluate, histogram_csv
from .llm import BackendError, ReplyParseError, direct_similarity, explain_score, judge_entity_context
from .perturb import PerturbationError, generate_negation_llm, inject_negation_rule
from .render import render_comparison_report, render_entity_html
from .scoring import (
    Method,
    ScoreResult,
    ScoringError,
    classify_entities,
    entscore,
    agreement_score,
    ner_cosine_score,
    word_for_word,
)
from .worker import WorkerError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BACKEND = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> "None":  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="radcompare", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--corpus", help="corpus file (JSON lines)")
    common.add_argument("--out", help="output path")
    common.add_argument("--weights", help="e.g. missing=2,mismatch=1.5,surplus=1")
    common.add_argument("--extractor", help="lexicon[:path] | tcp:host:port | cmd:<command>")
    common.add_argument("--llm", help="mock | <http(s) endpoint URL>")
    common.add_argument("--section", choices=["findings", "impression", "both"])
    common.add_argument("--concurrency", type=int)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="write extracted entities per pair")
    p.add_argument("--pair-id", help="restrict to one pair")

    p = sub.add_parser("compare", parents=[common], help="score one pair")
    p.add_argument("--pair-id", required=True)
    p.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.ENTSCORE.value,
    )
    p.add_argument("--explain", action="store_true", help="attach a narrative explanation")

    p = sub.add_parser("evaluate", parents=[common], help="score a corpus against ground truth")
    p.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.ENTSCORE.value,
    )

    p = sub.add_parser("perturb", parents=[common], help="emit single-negation variants")
    p.add_argument("--in", dest="in_path", help="input corpus (alias for --corpus)")
    p.add_argument("--mode", choices=["rule", "llm"], default="rule")
    p.add_argument("--index", type=int, help="entity occurrence to toggle (rule mode)")
    p.add_argument("--seed", type=int, help="pick a random occurrence per pair (rule mode)")

    p = sub.add_parser("visualize", parents=[common], help="render one pair as HTML")
    p.add_argument("--pair-id", required=True)
    p.add_argument("--explain", action="store_true")

    return parser


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config)
    if args.extractor:
        config = replace(config, extractor=parse_extractor_spec(args.extractor))
    if args.llm:
        config = replace(config, llm=parse_llm_spec(args.llm, config.llm))
    if args.weights:
        config = replace(config, weights=parse_weights_spec(args.weights, config.weights))
    if args.section:
        config = replace(config, section=SectionSelector.from_string(args.section))
    if args.concurrency is not None:
        config = replace(config, concurrency=args.concurrency)
    return config


def _load_pairs(args: argparse.Namespace) -> list[ReportPair]:
    path = getattr(args, "in_path", None) or args.corpus
    if not path:
        raise ConfigError("--corpus is required")
    return parse_corpus(Path(path).read_bytes())


def _find_pair(pairs: list[ReportPair], pair_id: str) -> ReportPair:
    for pair in pairs:
        if pair.id == pair_id:
            return pair
    raise CorpusError(f"pair '{pair_id}' not found in corpus")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _judge_for(config: EngineConfig):
    def judge(entity: str, final_text: str, prelim_text: str):
        return judge_entity_context(config.llm, entity, final_text, prelim_text).value

    return judge


def _score_pair(
    pair: ReportPair, method: Method, config: EngineConfig, runtime: ExtractorRuntime,
    explain: bool = False,
) -> dict:
    final_text = pair_text(pair, Side.FINAL, config.section)
    prelim_text = pair_text(pair, Side.PRELIMINARY, config.section)
    payload: dict = {"pair_id": pair.id, "method": method.value}

    if method is Method.WORD_FOR_WORD:
        score = word_for_word(final_text, prelim_text)
        payload.update(score01=score, score10=10.0 * score)
    elif method is Method.DIRECT_LLM:
        direct = direct_similarity(config.llm, final_text, prelim_text)
        payload.update(score10=direct.score, reasoning=direct.reasoning)
    elif method is Method.NER_COSINE:
        breakdown = ner_cosine_score(
            runtime.extract(final_text), runtime.extract(prelim_text)
        )
        payload.update(
            score01=breakdown.score,
            score10=10.0 * breakdown.score,
            exact_matches=breakdown.c,
            total_final_entities=breakdown.t,
            per_entity_best={
                k: breakdown.per_entity_best[k] for k in sorted(breakdown.per_entity_best)
            },
            flags=sorted(breakdown.flags),
        )
    else:
        result = entscore(
            pair,
            runtime.extract,
            _judge_for(config),
            config.weights,
            selector=config.section,
            explain=explain,
            explainer=lambda s, ft, pt: explain_score(config.llm, s, ft, pt),
            max_workers=config.concurrency,
        )
        assert result.classification is not None
        payload.update(
            score01=result.score01,
            score10=result.score10,
            classification={
                category: sorted(getattr(result.classification, category))
                for category in ("matched", "mismatched", "missing", "surplus")
            },
            flags=sorted(result.flags),
            weights={
                "mismatch": config.weights.w_mismatch,
                "missing": config.weights.w_missing,
                "surplus": config.weights.w_surplus,
            },
        )
        if result.explanation is not None:
            payload["explanation"] = result.explanation
    return payload


def _cmd_extract(args: argparse.Namespace) -> int:
    config = _engine_config(args)
    pairs = _load_pairs(args)
    if args.pair_id:
        pairs = [_find_pair(pairs, args.pair_id)]
    lines = []
    with ExtractorRuntime(config.extractor) as runtime:
        for pair in pairs:
            record: dict = {"id": pair.id}
            for side in (Side.PRELIMINARY, Side.FINAL):
                entities = runtime.extract(pair_text(pair, side, config.section))
                record[side.value] = [
                    {
                        "surface": e.surface,
                        "normalized": e.normalized,
                        "start": e.span[0],
                        "end": e.span[1],
                        "label": e.label,
                    }
                    for e in entities
                ]
            lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _engine_config(args)
    pair = _find_pair(_load_pairs(args), args.pair_id)
    with ExtractorRuntime(config.extractor) as runtime:
        payload = _score_pair(pair, Method(args.method), config, runtime, explain=args.explain)
    _write_text(args.out, _dump(payload))
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _engine_config(args)
    method = Method(args.method)
    pairs = _load_pairs(args)
    if not args.out:
        raise ConfigError("--out directory is required for evaluate")
    missing_truth = [p.id for p in pairs if p.ground_truth_score is None]
    if missing_truth:
        raise CorpusError(
            f"pairs lack ground_truth_score: {', '.join(missing_truth)}"
        )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    scale = Scale.TEN if method is Method.DIRECT_LLM else Scale.UNIT
    rows: list[dict] = []
    with ExtractorRuntime(config.extractor) as runtime:

        def run_one(pair: ReportPair) -> dict:
            try:
                payload = _score_pair(pair, method, config, runtime)
                pred = payload["score10"] if method is Method.DIRECT_LLM else payload["score01"]
                return {"pair_id": pair.id, "truth": pair.ground_truth_score, "pred": pred}
            except (BackendError, WorkerError, ScoringError, ReplyParseError) as exc:
                return {
                    "pair_id": pair.id,
                    "truth": pair.ground_truth_score,
                    "error": str(exc),
                }

        if config.concurrency > 1:
            with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
                rows = list(pool.map(run_one, pairs))
        else:
            rows = [run_one(pair) for pair in pairs]

    scored = [r for r in rows if "error" not in r]
    failed = [r for r in rows if "error" in r]

    summary_payload: dict = {
        "method": method.value,
        "pairs_total": len(rows),
        "pairs_scored": len(scored),
        "pairs_failed": len(failed),
    }
    if scored:
        summary = evaluate(
            [r["pred"] for r in scored], [r["truth"] for r in scored], scale
        )
        summary_payload.update(
            n=summary.n,
            accuracy=summary.accuracy,
            accuracy_pm1=summary.accuracy_pm1,
            precision=summary.precision,
            recall=summary.recall,
            f1=summary.f1,
            confusion=[list(row) for row in summary.confusion],
            pred_histogram=list(summary.pred_histogram),
            truth_histogram=list(summary.truth_histogram),
        )
        (out_dir / "confusion.csv").write_text(confusion_csv(summary), encoding="utf-8")
        (out_dir / "histogram.csv").write_text(histogram_csv(summary), encoding="utf-8")

    (out_dir / "summary.json").write_text(_dump(summary_payload), encoding="utf-8")

    per_pair_lines = ["pair_id,truth,pred,status"]
    for row in rows:
        if "error" in row:
            status = "error: " + row["error"].replace("\n", " ").replace(",", ";")
            per_pair_lines.append(f"{row['pair_id']},{row['truth']},,{status}")
        else:
            per_pair_lines.append(
                f"{row['pair_id']},{row['truth']},{row['pred']},ok"
            )
    (out_dir / "per_pair.csv").write_text(
        "\n".join(per_pair_lines) + "\n", encoding="utf-8"
    )

    for row in failed:
        print(f"pair {row['pair_id']} failed: {row['error']}", file=sys.stderr)
    if failed and len(failed) > 0.10 * len(rows):
        print(
            f"{len(failed)}/{len(rows)} pairs failed; partial results in {out_dir}",
            file=sys.stderr,
        )
        return EXIT_BACKEND
    return EXIT_OK


def _cmd_perturb(args: argparse.Namespace) -> int:
    config = _engine_config(args)
    pairs = _load_pairs(args)
    if not args.out:
        raise ConfigError("--out is required for perturb")
    rng = random.Random(args.seed) if args.seed is not None else None

    out_pairs: list[ReportPair] = []
    with ExtractorRuntime(config.extractor) as runtime:
        for pair in pairs:
            findings = pair.final.findings if pair.final.has_findings else None
            impression = pair.final.impression if pair.final.has_impression else None
            if args.mode == "llm":
                # the model rewrites one section; findings preferred
                target = findings if findings is not None else impression
                assert target is not None
                record = generate_negation_llm(config.llm, target)
                if findings is not None:
                    new_report = Report(findings=record.perturbed, impression=impression)
                else:
                    new_report = Report(findings=None, impression=record.perturbed)
            else:
                sections = []
                for name, text in (("findings", findings), ("impression", impression)):
                    if text is None:
                        continue
                    entities = runtime.extract(text)
                    sections.extend((name, text, entities, i) for i in range(len(entities)))
                if not sections:
                    raise CorpusError(f"pair '{pair.id}' has no entities to perturb")
                if args.index is not None:
                    if not 0 <= args.index < len(sections):
                        raise CorpusError(
                            f"index {args.index} out of range for pair '{pair.id}' "
                            f"({len(sections)} occurrences)"
                        )
                    chosen = sections[args.index]
                else:
                    chosen = sections[rng.randrange(len(sections))] if rng else sections[0]
                name, text, entities, local_index = chosen
                record = inject_negation_rule(text, entities, local_index)
                if name == "findings":
                    new_report = Report(findings=record.perturbed, impression=impression)
                else:
                    new_report = Report(findings=findings, impression=record.perturbed)
            out_pairs.append(
                ReportPair(
                    id=pair.id,
                    modality=pair.modality,
                    preliminary=new_report,
                    final=pair.final,
                    ground_truth_score=None,
                )
            )

    Path(args.out).write_bytes(serialize_corpus(out_pairs))
    return EXIT_OK


def _cmd_visualize(args: argparse.Namespace) -> int:
    config = _engine_config(args)
    pair = _find_pair(_load_pairs(args), args.pair_id)
    final_text = pair_text(pair, Side.FINAL, config.section)
    prelim_text = pair_text(pair, Side.PRELIMINARY, config.section)
    with ExtractorRuntime(config.extractor) as runtime:
        final_entities = runtime.extract(final_text)
        prelim_entities = runtime.extract(prelim_text)
        classification = classify_entities(
            final_entities,
            prelim_entities,
            _judge_for(config),
            final_text,
            prelim_text,
            max_workers=config.concurrency,
        )
        score = agreement_score(classification, config.weights)
        explanation = (
            explain_score(config.llm, float(score), final_text, prelim_text)
            if args.explain
            else None
        )
    result = ScoreResult(
        method=Method.ENTSCORE,
        score10=10.0 * float(score),
        score01=float(score),
        classification=classification,
        explanation=explanation,
        flags=score.flags,
        weights=config.weights,
    )
    doc = render_entity_html(
        pair, final_entities, prelim_entities, classification, selector=config.section
    )
    _write_text(args.out, render_comparison_report(result, doc))
    return EXIT_OK


_COMMANDS = {
    "extract": _cmd_extract,
    "compare": _cmd_compare,
    "evaluate": _cmd_evaluate,
    "perturb": _cmd_perturb,
    "visualize": _cmd_visualize,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one command; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (BackendError, WorkerError, ScoringError, ReplyParseError, PerturbationError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ConfigError, CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
