"""Precision/recall/F1 scoring with namespace-relaxed re-evaluation.

Strict scoring compares URI sets.  Relaxed scoring re-scores against every
namespace-swapped variant of the gold graph that is satisfiable and yields
the same answers, keeping the best F1.  Aggregation is macro (per-question
average) and also buckets questions by predicted-versus-gold relation count.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from itertools import product
from typing import IO, Iterable, Iterator

from .kb_store import KbStore
from .terms import (
    Iri,
    Profile,
    PropertyPath,
    TriplePattern,
    VAR_X,
    VAR_Y,
    Variable,
    local_name,
    namespace_of,
    normalize_iri,
    parse_term,
    relation_uri,
)

logger = logging.getLogger(__name__)

# Namespace pairs treated as interchangeable under relaxed scoring.
SWAPPABLE = {"dbo": "dbp", "dbp": "dbo"}


@dataclass
class GoldRecord:
    question_id: str
    question: str
    relations: set[Iri]
    graph: tuple[TriplePattern, ...] | None = None


@dataclass
class EvalReport:
    per_question: list[tuple[float, float, float]]
    precision: float
    recall: float
    f1: float
    pct_equal: float
    pct_more: float
    pct_fewer: float


def score_sets(gold: set, pred: set) -> tuple[float, float, float]:
    """Set precision/recall/F1; two empty sets count as a perfect match."""
    hits = len(gold & pred)
    if pred:
        precision = hits / len(pred)
    else:
        precision = 1.0 if not gold else 0.0
    if gold:
        recall = hits / len(gold)
    else:
        recall = 1.0 if not pred else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def build_report(
    per_question: list[tuple[float, float, float]],
    sizes: list[tuple[int, int]],
) -> EvalReport:
    """Assemble a report from per-question scores and (gold, pred) set sizes."""
    if not per_question or len(per_question) != len(sizes):
        raise ValueError("need one score and one size pair per question")
    n = len(per_question)
    equal = sum(1 for gold_n, pred_n in sizes if pred_n == gold_n)
    more = sum(1 for gold_n, pred_n in sizes if pred_n > gold_n)
    fewer = n - equal - more
    return EvalReport(
        per_question=per_question,
        precision=sum(p for p, _, _ in per_question) / n,
        recall=sum(r for _, r, _ in per_question) / n,
        f1=sum(f for _, _, f in per_question) / n,
        pct_equal=100.0 * equal / n,
        pct_more=100.0 * more / n,
        pct_fewer=100.0 * fewer / n,
    )


def aggregate(records: list[tuple[set[Iri], set[Iri]]]) -> EvalReport:
    """Macro-averaged metrics plus relation-count buckets, as percentages."""
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    scores = [score_sets(gold, pred) for gold, pred in records]
    sizes = [(len(gold), len(pred)) for gold, pred in records]
    return build_report(scores, sizes)


def _swap_namespace(pattern: TriplePattern) -> TriplePattern | None:
    """The same pattern under the sibling namespace, when one exists."""
    predicate = pattern.predicate
    if isinstance(predicate, PropertyPath):
        return None
    ns, sep, local = predicate.value.partition(":")
    if sep and ns in SWAPPABLE:
        swapped = Iri(f"{SWAPPABLE[ns]}:{local}")
        return TriplePattern(pattern.subject, predicate=swapped, object=pattern.object)
    return None


def _answer_variable(patterns: Iterable[TriplePattern]) -> Variable | None:
    """?y when any pattern uses it, else ?x when present."""
    terms = [t for p in patterns for t in (p.subject, p.object)]
    if any(t == VAR_Y for t in terms):
        return VAR_Y
    if any(t == VAR_X for t in terms):
        return VAR_X
    return None


def relaxed_score(
    store: KbStore,
    gold: GoldRecord,
    pred: set[Iri],
    overlap: str = "equal",
) -> tuple[float, float, float]:
    """Best score over answer-preserving namespace variants of the gold graph.

    ``overlap`` selects how a variant's answers qualify it: ``equal``
    requires the same answer set as the original graph, ``any`` accepts any
    shared answer.  An unsatisfiable gold graph falls back to strict scoring.
    """
    if gold.graph is None:
        raise ValueError(f"gold record {gold.question_id} carries no graph")
    if overlap not in ("equal", "any"):
        raise ValueError(f"unknown overlap mode {overlap!r}")
    base = score_sets(gold.relations, pred)
    if store.match_graph(gold.graph) is None:
        logger.warning(
            "gold graph for %s is unsatisfiable; falling back to strict score",
            gold.question_id,
        )
        return base
    answer_var = _answer_variable(gold.graph)
    original_answers = (
        store.answers(gold.graph, answer_var) if answer_var is not None else None
    )

    choices: list[list[TriplePattern]] = []
    for pattern in gold.graph:
        swapped = _swap_namespace(pattern)
        choices.append([pattern] if swapped is None else [pattern, swapped])

    best = base
    for combo in product(*choices):
        if store.match_graph(combo) is None:
            continue
        if original_answers is not None:
            answers = store.answers(combo, answer_var)
            if overlap == "equal":
                if answers != original_answers:
                    continue
            elif not (answers & original_answers):
                continue
        variant_relations = {relation_uri(p.predicate) for p in combo}
        candidate = score_sets(variant_relations, pred)
        if candidate[2] > best[2]:
            best = candidate
    return best


def label_key(iri: Iri) -> str:
    """Namespace-free comparison key for label-level evaluation."""
    return local_name(iri).casefold()


def label_sets(relations: set[Iri]) -> set[str]:
    return {label_key(r) for r in relations}


def read_gold(source: IO[str] | Iterable[str], profile: Profile) -> Iterator[GoldRecord]:
    """Gold JSON Lines: id, question, relation URIs, optional pattern graph.

    Graph patterns are triple arrays of term strings (``?x``, quoted
    literals, or IRIs).
    """
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            relations = {normalize_iri(r, profile) for r in raw["relations"]}
            graph = None
            if raw.get("graph"):
                patterns = []
                for spo in raw["graph"]:
                    s, p, o = (parse_term(t, profile) for t in spo)
                    if not isinstance(p, Iri):
                        raise ValueError("graph predicate must be an IRI")
                    patterns.append(TriplePattern(s, p, o))
                graph = tuple(patterns)
            yield GoldRecord(str(raw["question_id"]), raw["question"], relations, graph)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"gold line {lineno}: {exc}") from None


def render_table(report: EvalReport) -> str:
    """The report as an aligned two-block plain-text table."""
    lines = [
        f"{'':<10}{'P':>8}{'R':>8}{'F1':>8}",
        f"{'overall':<10}{report.precision:>8.3f}{report.recall:>8.3f}{report.f1:>8.3f}",
        "",
        f"{'pred=gold':>12}{'pred>gold':>12}{'pred<gold':>12}",
        f"{report.pct_equal:>11.1f}%{report.pct_more:>11.1f}%{report.pct_fewer:>11.1f}%",
    ]
    return "\n".join(lines)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "count_buckets": {
            "equal": report.pct_equal,
            "more": report.pct_more,
            "fewer": report.pct_fewer,
        },
        "per_question": [
            {"precision": p, "recall": r, "f1": f} for p, r, f in report.per_question
        ],
    }
