"""The structured output format: ``[Arg1 | Rel1], [Arg2 | Rel2], ...``

Targets are serialized from argument-relation pairs, and generator output is
parsed back, classifying each argument as a question-entity mention or a
Wh-term placeholder.  A lone ``-`` separator (surrounded by spaces) is
accepted as an alias for ``|`` when parsing.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import brackets
from .knowledge_integration import LinkedEntity
from .terms import Iri

WH_LEXICON = frozenset(
    {"who", "what", "where", "when", "which", "whom", "whose", "how"}
)

ASK_LEAD_TOKENS = frozenset(
    {"is", "was", "are", "were", "do", "does", "did", "has", "have", "had", "can"}
)

FUZZY_OVERLAP_THRESHOLD = 0.5


class OutputParseError(ValueError):
    """Generator output that does not fit the grammar; carries the chunk."""

    def __init__(self, message: str, chunk: str = ""):
        super().__init__(message)
        self.chunk = chunk


@dataclass(frozen=True)
class EntityArg:
    """An argument naming a question entity; resolution is best-effort."""

    mention: str
    entity: Iri | None = None
    fuzzy: bool = False


@dataclass(frozen=True)
class PlaceholderArg:
    """A Wh-term argument standing in for an unknown answer entity."""

    wh_term: str


Argument = EntityArg | PlaceholderArg


@dataclass(frozen=True)
class ArgRelPair:
    argument: Argument
    relation_label: str

    def __post_init__(self):
        if not self.relation_label:
            raise ValueError("relation label must be non-empty")


@dataclass(frozen=True)
class OutputSequence:
    """One beam: raw decoder text with its score and 1-based rank."""

    text: str
    score: float
    rank: int


def _argument_text(argument: Argument) -> str:
    if isinstance(argument, PlaceholderArg):
        return argument.wh_term
    return argument.mention


def serialize_target(pairs: list[ArgRelPair]) -> str:
    if not pairs:
        raise ValueError("cannot serialize an empty pair list")
    rendered = []
    for pair in pairs:
        arg = brackets.escape(_argument_text(pair.argument))
        rel = brackets.escape(pair.relation_label)
        rendered.append(f"[{arg} | {rel}]")
    return ", ".join(rendered)


def _resolve_mention(
    mention: str, question_entities: list[LinkedEntity] | tuple[LinkedEntity, ...]
) -> EntityArg:
    for ent in question_entities:
        if ent.mention == mention:
            return EntityArg(mention, ent.entity)
    folded = mention.casefold()
    for ent in question_entities:
        if ent.mention.casefold() == folded:
            return EntityArg(mention, ent.entity)
    arg_tokens = set(mention.casefold().split())
    if arg_tokens:
        best: LinkedEntity | None = None
        best_overlap = 0.0
        for ent in question_entities:
            ent_tokens = set(ent.mention.casefold().split())
            overlap = len(arg_tokens & ent_tokens) / len(arg_tokens)
            if overlap > best_overlap:
                best, best_overlap = ent, overlap
        if best is not None and best_overlap >= FUZZY_OVERLAP_THRESHOLD:
            return EntityArg(mention, best.entity, fuzzy=True)
    return EntityArg(mention)


def _split_pair(group: str) -> tuple[str, str]:
    fields = brackets.split_unescaped(group, "|")
    if len(fields) == 2:
        return fields[0], fields[1]
    if len(fields) == 1:
        # Legacy "[E1 - RelA]" alias: split at the last spaced dash.
        head, sep, tail = fields[0].rpartition(" - ")
        if sep:
            return head, tail
        raise OutputParseError("pair lacks a '|' separator", group)
    raise OutputParseError("pair has more than one '|' separator", group)


def parse_output(
    text: str,
    question_entities: list[LinkedEntity] | tuple[LinkedEntity, ...] = (),
    wh_lexicon: frozenset[str] | set[str] = WH_LEXICON,
) -> list[ArgRelPair]:
    """Parse decoder text into argument-relation pairs.

    Raises :class:`OutputParseError` on any structural problem; arbitrary
    text never produces a partial result.  Entity arguments are matched
    against the question's linked mentions exactly, then case-insensitively,
    then by best token overlap at or above 50% (marked fuzzy); unmatched
    arguments keep ``entity=None`` for the caller to reject.
    """
    try:
        groups = brackets.bracket_groups(text)
    except brackets.BracketError as exc:
        raise OutputParseError(str(exc), exc.chunk) from None
    if not groups:
        raise OutputParseError("no bracketed pairs found", text)
    pairs = []
    for group in groups:
        raw_arg, raw_rel = _split_pair(group)
        arg_text = brackets.unescape(raw_arg.strip())
        rel_text = brackets.unescape(raw_rel.strip())
        if not arg_text:
            raise OutputParseError("empty argument", group)
        if not rel_text:
            raise OutputParseError("empty relation label", group)
        argument: Argument
        if arg_text.casefold() in wh_lexicon:
            argument = PlaceholderArg(arg_text)
        else:
            argument = _resolve_mention(arg_text, list(question_entities))
        pairs.append(ArgRelPair(argument, rel_text))
    return pairs


def detect_ask(question: str) -> bool:
    """True when the leading question token marks a yes/no (ASK) question."""
    tokens = question.split()
    if not tokens:
        return False
    head = tokens[0].strip("\"'¿¡.,;:!?()").casefold()
    return head in ASK_LEAD_TOKENS
