"""Batch command-line interface: ingest a KB, link questions, evaluate runs.

Questions and results flow as JSON Lines, one record per question, streamed
so large runs never hold the whole set in memory.  Output records keep the
input order, so identical inputs produce byte-identical outputs under any
worker count.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .evaluation import (
    GoldRecord,
    build_report,
    label_sets,
    read_gold,
    relaxed_score,
    render_table,
    report_to_dict,
    score_sets,
)
from .generator import ENV_PREFIX, GeneratorConfig, GeneratorError, make_generator
from .kb_store import KbLoadError, KbStore, load_kb, load_profile_config
from .knowledge_integration import (
    DEFAULT_BUDGET,
    EncoderInput,
    InputTooLongError,
    QuestionRecord,
    build_encoder_input,
    read_question_records,
    token_count,
)
from .knowledge_validation import (
    DEFAULT_ASK_LIMIT,
    DEFAULT_BEAM_LIMIT,
    ValidationConfig,
    fallback_result,
    link,
    result_record,
)
from .similarity import WordVectorSimilarity
from .terms import PROFILES, Profile, get_profile, normalize_iri

logger = logging.getLogger(__name__)

EVAL_MODES = ("strict", "relaxed", "label-level")


def _resolve_profile(value: str) -> Profile:
    if value in PROFILES:
        return get_profile(value)
    path = Path(value)
    if path.exists():
        with open(path, encoding="utf-8") as handle:
            return load_profile_config(handle)
    raise KbLoadError(f"profile {value!r} is neither a known name nor a config file")


def _load_store(args: argparse.Namespace) -> KbStore:
    profile = _resolve_profile(args.profile)
    ontology = None
    if args.ontology:
        ontology = open(args.ontology, encoding="utf-8")
    try:
        with open(args.kb, encoding="utf-8") as triples:
            return load_kb(triples, ontology, profile)
    finally:
        if ontology is not None:
            ontology.close()


def _generator_config(args: argparse.Namespace) -> GeneratorConfig:
    endpoint = os.environ.get(ENV_PREFIX + "ENDPOINT", args.endpoint)
    timeout = float(os.environ.get(ENV_PREFIX + "TIMEOUT", args.timeout))
    return GeneratorConfig(
        kind=args.generator,
        beam_width=args.beams,
        fixture_path=args.fixtures,
        endpoint=endpoint,
        timeout=timeout,
    )


def _open_in(path: str):
    return sys.stdin if path == "-" else open(path, encoding="utf-8")


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8")


# -- subcommands ------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    store = _load_store(args)
    counts = store.instance_counts()
    print(f"triples:        {len(store)}")
    print(f"classes:        {len(counts)}")
    print(f"instances:      {sum(counts.values())}")
    print(f"relation labels: {store.lexicon_size}")
    return 0


def _process_question(
    record: QuestionRecord,
    store: KbStore,
    generator,
    similarity,
    args: argparse.Namespace,
    vconfig: ValidationConfig,
) -> dict:
    try:
        if args.wo_kb:
            if token_count(record.question) > args.budget:
                raise InputTooLongError(
                    f"question alone is {token_count(record.question)} tokens, "
                    f"budget {args.budget}"
                )
            enc = EncoderInput(record.question, [], record.question, args.budget)
        else:
            enc = build_encoder_input(
                store, record.question, record.entities, args.budget, similarity
            )
        beams = generator.generate(enc, record.question_id)
        if args.wo_kb:
            result = fallback_result(store, beams, record.entities)
        else:
            result = link(store, record.question, beams, record.entities, vconfig)
        return result_record(record.question_id, result)
    except (InputTooLongError, GeneratorError) as exc:
        logger.error("question %s failed: %s", record.question_id, exc)
        failed = result_record(record.question_id, fallback_result(store, []))
        failed["error"] = str(exc)
        return failed


def cmd_link(args: argparse.Namespace) -> int:
    store = _load_store(args)
    config = _generator_config(args)
    similarity = None
    if args.vectors:
        with open(args.vectors, encoding="utf-8") as handle:
            similarity = WordVectorSimilarity.load(handle)
    generator = make_generator(config, similarity)
    vconfig = ValidationConfig(beam_limit=args.beams, ask_limit=args.ask_beams)

    def work(record: QuestionRecord) -> dict:
        return _process_question(record, store, generator, similarity, args, vconfig)

    source = _open_in(args.questions)
    sink = _open_out(args.out)
    try:
        records = read_question_records(source, store.profile)
        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                results = pool.map(work, records)
                for output in results:
                    sink.write(json.dumps(output) + "\n")
        else:
            for record in records:
                sink.write(json.dumps(work(record)) + "\n")
    finally:
        if source is not sys.stdin:
            source.close()
        if sink is not sys.stdout:
            sink.close()
    return 0


def _read_predictions(path: str, profile: Profile) -> dict[str, set]:
    predictions: dict[str, set] = {}
    with _open_in(path) as source:
        for lineno, line in enumerate(source, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                predictions[str(raw["question_id"])] = {
                    normalize_iri(r, profile) for r in raw["relations"]
                }
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"predictions line {lineno}: {exc}") from None
    return predictions


def cmd_eval(args: argparse.Namespace) -> int:
    profile = _resolve_profile(args.profile)
    with _open_in(args.gold) as handle:
        gold_records = list(read_gold(handle, profile))
    predictions = _read_predictions(args.pred, profile)

    gold_ids = {g.question_id for g in gold_records}
    missing_pred = sorted(gold_ids - set(predictions))
    missing_gold = sorted(set(predictions) - gold_ids)
    if missing_pred or missing_gold:
        if missing_pred:
            print(f"missing from predictions: {', '.join(missing_pred)}", file=sys.stderr)
        if missing_gold:
            print(f"missing from gold: {', '.join(missing_gold)}", file=sys.stderr)
        return 2

    store: KbStore | None = None
    if args.eval_mode == "relaxed":
        if not args.kb:
            print("relaxed mode requires --kb", file=sys.stderr)
            return 2
        store = _load_store(args)

    gold_records.sort(key=lambda g: g.question_id)
    scores = []
    sizes = []
    for gold in gold_records:
        pred = predictions[gold.question_id]
        if args.eval_mode == "label-level":
            scores.append(score_sets(label_sets(gold.relations), label_sets(pred)))
        elif args.eval_mode == "relaxed":
            scores.append(_relaxed_or_strict(store, gold, pred))
        else:
            scores.append(score_sets(gold.relations, pred))
        sizes.append((len(gold.relations), len(pred)))
    report = build_report(scores, sizes)
    if args.json:
        print(json.dumps(report_to_dict(report), indent=2))
    else:
        print(render_table(report))
    return 0


def _relaxed_or_strict(store: KbStore, gold: GoldRecord, pred: set) -> tuple:
    if gold.graph is None:
        logger.warning("gold %s has no graph; scoring strictly", gold.question_id)
        return score_sets(gold.relations, pred)
    return relaxed_score(store, gold, pred, overlap=relaxed_overlap_mode())


def relaxed_overlap_mode() -> str:
    """Relaxed answer-set comparison: strict equality unless overridden."""
    return os.environ.get(ENV_PREFIX + "RELAXED_OVERLAP", "equal")


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rellink",
        description="Relation linking over a local KB: ingest, link, evaluate.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_kb_flags(p: argparse.ArgumentParser, kb_required: bool) -> None:
        p.add_argument("--kb", required=kb_required, help="N-Triples file")
        p.add_argument("--ontology", help="ontology TSV (subclass/count/label rows)")
        p.add_argument(
            "--profile",
            default="dbpedia",
            help="profile name (dbpedia, wikidata) or profile config file",
        )

    p_ingest = sub.add_parser("ingest", help="load a KB and print index counts")
    add_kb_flags(p_ingest, kb_required=True)
    p_ingest.set_defaults(func=cmd_ingest)

    p_link = sub.add_parser("link", help="link questions to KB relations")
    add_kb_flags(p_link, kb_required=True)
    p_link.add_argument("questions", help="questions JSONL ('-' for stdin)")
    p_link.add_argument("-o", "--out", default="-", help="results JSONL ('-' for stdout)")
    p_link.add_argument(
        "--generator", choices=("fixture", "remote", "baseline"), default="baseline"
    )
    p_link.add_argument("--fixtures", help="beam fixture JSONL (fixture generator)")
    p_link.add_argument("--endpoint", help="remote generator URL")
    p_link.add_argument("--timeout", type=float, default=30.0, help="remote timeout (s)")
    p_link.add_argument("--beams", type=int, default=DEFAULT_BEAM_LIMIT)
    p_link.add_argument("--ask-beams", type=int, default=DEFAULT_ASK_LIMIT)
    p_link.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_link.add_argument("--vectors", help="word-vector text file for ranking")
    p_link.add_argument(
        "--wo-kb",
        action="store_true",
        help="ablation: raw question input, no KB validation",
    )
    p_link.add_argument("--workers", type=int, default=1)
    p_link.set_defaults(func=cmd_link)

    p_eval = sub.add_parser("eval", help="score predictions against gold")
    add_kb_flags(p_eval, kb_required=False)
    p_eval.add_argument("--gold", required=True, help="gold JSONL")
    p_eval.add_argument("--pred", required=True, help="predictions JSONL")
    p_eval.add_argument("--eval-mode", choices=EVAL_MODES, default="strict")
    p_eval.add_argument("--json", action="store_true", help="JSON report instead of table")
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (KbLoadError, GeneratorError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
