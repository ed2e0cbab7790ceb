"""Sources of ranked output sequences: fixture replay, remote client, baseline.

The baseline synthesizes beams from the encoder input alone, pairing each
entity mention with its candidate relation labels; it exists so the whole
pipeline runs with no network and no trained model.  All kinds return beams
in a total order: descending score, ties broken by text.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import IO, Iterable

import requests

from .knowledge_integration import EncoderInput
from .sequence_grammar import ArgRelPair, EntityArg, OutputSequence, serialize_target
from .similarity import DEFAULT_SIMILARITY, Similarity

logger = logging.getLogger(__name__)

GENERATOR_KINDS = ("fixture", "remote", "baseline")
DEFAULT_BEAM_WIDTH = 50
ENV_PREFIX = "RELLINK_"


class GeneratorError(Exception):
    """Remote transport or protocol failure, or bad configuration."""


@dataclass
class GeneratorConfig:
    kind: str = "baseline"
    beam_width: int = DEFAULT_BEAM_WIDTH
    fixture_path: str | Path | None = None
    endpoint: str | None = None
    timeout: float = 30.0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise GeneratorError(f"unknown generator kind {self.kind!r}")
        if self.beam_width < 1:
            raise GeneratorError("beam_width must be >= 1")
        if self.kind == "fixture":
            if self.fixture_path is None or not os.access(self.fixture_path, os.R_OK):
                raise GeneratorError(f"fixture path not readable: {self.fixture_path}")
        if self.kind == "remote" and not self.endpoint:
            raise GeneratorError("remote generator requires an endpoint")


def _ranked(raw: Iterable[tuple[str, float]], width: int) -> list[OutputSequence]:
    ordered = sorted(raw, key=lambda pair: (-pair[1], pair[0]))[:width]
    return [OutputSequence(text, score, i + 1) for i, (text, score) in enumerate(ordered)]


def read_beam_fixture(source: IO[str] | Iterable[str]) -> dict[str, list[tuple[str, float]]]:
    """Beam fixture JSON Lines: question_id to (text, score) lists."""
    beams: dict[str, list[tuple[str, float]]] = {}
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            beams[str(raw["question_id"])] = [
                (b["text"], float(b["score"])) for b in raw["beams"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise GeneratorError(f"beam fixture line {lineno}: {exc}") from None
    return beams


def write_beam_fixture(sink: IO[str], beams: dict[str, list[tuple[str, float]]]) -> None:
    for question_id, entries in beams.items():
        record = {
            "question_id": question_id,
            "beams": [{"text": t, "score": s} for t, s in entries],
        }
        sink.write(json.dumps(record) + "\n")


class FixtureGenerator:
    """Replays pre-recorded beams keyed by question id."""

    def __init__(self, path: str | Path, beam_width: int = DEFAULT_BEAM_WIDTH):
        with open(path, encoding="utf-8") as handle:
            self._beams = read_beam_fixture(handle)
        self.beam_width = beam_width

    def generate(self, enc: EncoderInput, question_id: str | None = None) -> list[OutputSequence]:
        if question_id not in self._beams:
            logger.warning("no fixture beams for question %r", question_id)
            return []
        # Stable sort: file order defines rank among equal scores.
        entries = sorted(self._beams[question_id], key=lambda pair: -pair[1])
        entries = entries[: self.beam_width]
        return [OutputSequence(text, score, i + 1) for i, (text, score) in enumerate(entries)]


class RemoteGenerator:
    """POSTs the rendered input to a model server and maps the JSON reply."""

    def __init__(self, endpoint: str, beam_width: int = DEFAULT_BEAM_WIDTH, timeout: float = 30.0):
        self.endpoint = endpoint
        self.beam_width = beam_width
        self.timeout = timeout

    def generate(self, enc: EncoderInput, question_id: str | None = None) -> list[OutputSequence]:
        payload = {"input": enc.rendered, "beams": self.beam_width}
        try:
            reply = requests.post(self.endpoint, json=payload, timeout=self.timeout)
            reply.raise_for_status()
            body = reply.json()
            raw = [(s["text"], float(s["score"])) for s in body["sequences"]]
        except (requests.RequestException, KeyError, TypeError, ValueError) as exc:
            raise GeneratorError(f"remote generation failed: {exc}") from None
        return _ranked(raw, self.beam_width)


class BaselineGenerator:
    """Deterministic lexical stand-in for a trained sequence model.

    Takes the top-k candidate labels per entity (k chosen so the product can
    reach the beam width), emits every combination as one sequence, and
    scores it by the summed label similarities to the question.
    """

    def __init__(self, beam_width: int = DEFAULT_BEAM_WIDTH, similarity: Similarity | None = None):
        self.beam_width = beam_width
        self.similarity = similarity or DEFAULT_SIMILARITY

    def generate(self, enc: EncoderInput, question_id: str | None = None) -> list[OutputSequence]:
        structures = [s for s in enc.structures if s.relations]
        if not structures:
            return []
        k = 1
        while k ** len(structures) < self.beam_width:
            k += 1
        choices = [
            [(s.mention, label) for label in s.relations[:k]] for s in structures
        ]
        raw = []
        for combo in product(*choices):
            pairs = [ArgRelPair(EntityArg(mention), label) for mention, label in combo]
            score = sum(self.similarity.score(enc.question, label) for _, label in combo)
            raw.append((serialize_target(pairs), score))
        return _ranked(raw, self.beam_width)


Generator = FixtureGenerator | RemoteGenerator | BaselineGenerator


def make_generator(config: GeneratorConfig, similarity: Similarity | None = None) -> Generator:
    if config.kind == "fixture":
        assert config.fixture_path is not None
        return FixtureGenerator(config.fixture_path, config.beam_width)
    if config.kind == "remote":
        assert config.endpoint is not None
        return RemoteGenerator(config.endpoint, config.beam_width, config.timeout)
    return BaselineGenerator(config.beam_width, similarity)


def generate(
    config: GeneratorConfig, enc: EncoderInput, question_id: str | None = None
) -> list[OutputSequence]:
    """One-shot convenience wrapper over :func:`make_generator`."""
    return make_generator(config).generate(enc, question_id)
