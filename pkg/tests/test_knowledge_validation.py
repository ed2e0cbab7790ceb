"""Pattern expansion, candidate graph enumeration, and beam validation."""

from __future__ import annotations

import pytest

from conftest import DBO, DBP, DBR, FORD_QUESTION, OBAMA_QUESTION, nt
from rellink import load_kb
from rellink.knowledge_integration import LinkedEntity
from rellink.knowledge_validation import (
    ValidationConfig,
    enumerate_graphs,
    expand_entity_relation,
    expand_placeholder_relation,
    fallback_result,
    link,
    validate_sequence,
)
from rellink.sequence_grammar import (
    ArgRelPair,
    EntityArg,
    OutputSequence,
    PlaceholderArg,
)
from rellink.terms import Iri, PropertyPath, TriplePattern, VAR_X, VAR_Y

DUAL_NS_TRIPLES = "\n".join(
    [
        nt(DBR + "A", DBO + "owner", DBR + "V1"),
        nt(DBR + "V2", DBO + "owner", DBR + "A"),
        nt(DBR + "A", DBP + "owner", DBR + "V3"),
        nt(DBR + "V4", DBP + "owner", DBR + "A"),
    ]
)


def pair(mention_iri: str, label: str) -> ArgRelPair:
    return ArgRelPair(EntityArg("m", Iri(mention_iri)), label)


class TestEntityExpansion:
    def test_four_patterns_both_namespaces(self):
        store = load_kb(DUAL_NS_TRIPLES)
        patterns = expand_entity_relation(store, pair("dbr:A", "owner"))
        entity = Iri("dbr:A")
        assert patterns == [
            TriplePattern(entity, Iri("dbo:owner"), VAR_X),
            TriplePattern(VAR_X, Iri("dbo:owner"), entity),
            TriplePattern(entity, Iri("dbp:owner"), VAR_X),
            TriplePattern(VAR_X, Iri("dbp:owner"), entity),
        ]

    def test_two_patterns_single_namespace(self, ford_store):
        patterns = expand_entity_relation(
            ford_store, pair("dbr:Kansas_City_Assembly", "owningOrganisation")
        )
        assert len(patterns) == 2
        assert all(p.predicate == Iri("dbo:owningOrganisation") for p in patterns)

    def test_unknown_label_empty(self, ford_store):
        assert expand_entity_relation(ford_store, pair("dbr:A", "noSuchRel")) == []


class TestPlaceholderExpansion:
    def test_uses_y_variable(self):
        store = load_kb(DUAL_NS_TRIPLES)
        patterns = expand_placeholder_relation(
            store, ArgRelPair(PlaceholderArg("Who"), "owner")
        )
        assert len(patterns) == 4
        assert patterns[0] == TriplePattern(VAR_Y, Iri("dbo:owner"), VAR_X)
        assert patterns[1] == TriplePattern(VAR_X, Iri("dbo:owner"), VAR_Y)

    def test_unknown_label_empty(self, ford_store):
        pairs = ArgRelPair(PlaceholderArg("Who"), "noSuchRel")
        assert expand_placeholder_relation(ford_store, pairs) == []


class TestWikidataExpansion:
    def test_reified_routes(self, wikidata_store):
        patterns = expand_entity_relation(
            wikidata_store, pair("wd:Q42", "manufacturer")
        )
        # Direct route (labeled but unloaded) plus the statement route.
        preds = [p.predicate for p in patterns]
        assert Iri("wdt:P176") in preds
        assert PropertyPath(Iri("p:P176"), Iri("ps:P176")) in preds

    def test_qualifier_route_any_entry(self, wikidata_store):
        patterns = expand_entity_relation(wikidata_store, pair("wd:Q42", "follows"))
        assert PropertyPath(None, Iri("pq:P155")) in [p.predicate for p in patterns]

    def test_p31_direct_only(self, wikidata_store):
        patterns = expand_entity_relation(wikidata_store, pair("wd:Q42", "P31"))
        assert patterns == [
            TriplePattern(Iri("wd:Q42"), Iri("wdt:P31"), VAR_X),
            TriplePattern(VAR_X, Iri("wdt:P31"), Iri("wd:Q42")),
        ]

    def test_reified_pair_validates(self, wikidata_store):
        seq = OutputSequence("[maker | manufacturer]", -0.1, 1)
        entities = [LinkedEntity("maker", 0, 5, Iri("wd:Q42"))]
        result = validate_sequence(wikidata_store, seq, entities)
        assert result is not None and result.validated
        assert result.relations == [Iri("ps:P176")]


class TestEnumerateGraphs:
    def test_lexicographic_choice_order(self):
        store = load_kb(DUAL_NS_TRIPLES)
        pairs = [pair("dbr:A", "owner"), pair("dbr:A", "owner")]
        graphs = list(enumerate_graphs(store, pairs))
        assert len(graphs) == 16
        assert graphs[0].choices == (0, 0)
        assert graphs[1].choices == (0, 1)
        assert graphs[4].choices == (1, 0)
        assert graphs[-1].choices == (3, 3)

    def test_pruning_unsatisfiable_patterns(self, ford_store):
        # Only (entity, r, ?x) holds in the Ford fixture; the reverse
        # orientation is pruned before the product.
        pairs = [pair("dbr:Kansas_City_Assembly", "owningOrganisation")]
        graphs = list(enumerate_graphs(ford_store, pairs))
        assert len(graphs) == 1
        assert graphs[0].patterns[0].subject == Iri("dbr:Kansas_City_Assembly")

    def test_empty_when_pair_dies(self, ford_store):
        pairs = [
            pair("dbr:Kansas_City_Assembly", "owningOrganisation"),
            pair("dbr:Kansas_City_Assembly", "noSuchRel"),
        ]
        assert list(enumerate_graphs(ford_store, pairs)) == []

    def test_shared_hub_variable(self):
        store = load_kb(DUAL_NS_TRIPLES)
        graphs = list(enumerate_graphs(store, [pair("dbr:A", "owner")]))
        for graph in graphs:
            terms = {graph.patterns[0].subject, graph.patterns[0].object}
            assert VAR_X in terms


class TestValidateSequence:
    def test_fig3_first_beam_validates(self, ford_store, ford_entities):
        seq = OutputSequence(
            "[Ford Kansas City Assembly Plant | owningOrganisation], "
            "[Ford Y-block engine | manufacturer]",
            -0.05,
            1,
        )
        result = validate_sequence(ford_store, seq, ford_entities)
        assert result is not None
        assert result.validated and result.source_rank == 1
        assert result.relations == [Iri("dbo:owningOrganisation"), Iri("dbo:manufacturer")]

    def test_unparseable_none(self, ford_store, ford_entities):
        seq = OutputSequence("complete garbage", -0.5, 1)
        assert validate_sequence(ford_store, seq, ford_entities) is None

    def test_unresolved_entity_none(self, ford_store, ford_entities):
        seq = OutputSequence("[An Unknown Thing | owningOrganisation]", -0.5, 1)
        assert validate_sequence(ford_store, seq, ford_entities) is None

    def test_no_join_none(self, ford_store, ford_entities):
        # Both relations exist but share no hub entity in this orientation mix.
        seq = OutputSequence(
            "[Ford Kansas City Assembly Plant | location], "
            "[Ford Y-block engine | manufacturer]",
            -0.2,
            1,
        )
        assert validate_sequence(ford_store, seq, ford_entities) is None

    def test_reverse_orientation_found(self):
        # Only (?x, r, e) holds; forward orientation is pruned away.
        store = load_kb(nt(DBR + "V", DBO + "owner", DBR + "A"))
        entities = [LinkedEntity("A thing", 0, 7, Iri("dbr:A"))]
        seq = OutputSequence("[A thing | owner]", -0.1, 1)
        result = validate_sequence(store, seq, entities)
        assert result is not None and result.validated


class TestLink:
    def beam(self, text, rank):
        return OutputSequence(text, -0.1 * rank, rank)

    def test_rank_two_fallback(self, ford_store, ford_entities):
        beams = [
            self.beam("[Ford Kansas City Assembly Plant | noSuchRel]", 1),
            self.beam(
                "[Ford Kansas City Assembly Plant | owningOrganisation], "
                "[Ford Y-block engine | manufacturer]",
                2,
            ),
        ]
        result = link(ford_store, FORD_QUESTION, beams, ford_entities)
        assert result.validated and result.source_rank == 2
        assert result.relations == [Iri("dbo:owningOrganisation"), Iri("dbo:manufacturer")]

    def test_first_valid_wins(self, ford_store, ford_entities):
        valid = (
            "[Ford Kansas City Assembly Plant | owningOrganisation], "
            "[Ford Y-block engine | manufacturer]"
        )
        beams = [self.beam(valid, 1), self.beam("[Ford Y-block engine | manufacturer]", 2)]
        result = link(ford_store, FORD_QUESTION, beams, ford_entities)
        assert result.source_rank == 1

    def test_beam_limit_respected(self, ford_store, ford_entities):
        valid = self.beam(
            "[Ford Kansas City Assembly Plant | owningOrganisation], "
            "[Ford Y-block engine | manufacturer]",
            2,
        )
        beams = [self.beam("[Ford Kansas City Assembly Plant | noSuchRel]", 1), valid]
        config = ValidationConfig(beam_limit=1)
        result = link(ford_store, FORD_QUESTION, beams, ford_entities, config)
        assert not result.validated  # the valid beam sits past the limit

    def test_nothing_validates_fallback(self, ford_store, ford_entities):
        beams = [self.beam("[Ford Kansas City Assembly Plant | location], [Ford Y-block engine | manufacturer]", 1)]
        result = link(ford_store, FORD_QUESTION, beams, ford_entities)
        assert not result.validated
        assert result.source_rank == 1
        assert result.relations == [Iri("dbo:location"), Iri("dbo:manufacturer")]

    def test_fallback_prefers_dbo(self):
        store = load_kb(DUAL_NS_TRIPLES + "\n" + nt(DBR + "B", DBP + "tenant", DBR + "C"))
        result = fallback_result(
            store, [OutputSequence("[X | owner], [X | tenant]", -0.1, 1)]
        )
        assert result.relations == [Iri("dbo:owner"), Iri("dbp:tenant")]

    def test_empty_beams(self, ford_store, ford_entities):
        result = link(ford_store, FORD_QUESTION, [], ford_entities)
        assert result.relations == []
        assert not result.validated
        assert result.source_rank == 0
        assert result.ask_answer is None

    def test_unparseable_beams_skipped_everywhere(self, ford_store, ford_entities):
        beams = [self.beam("garbage", 1), self.beam("[Ford Y-block engine | manufacturer]", 2)]
        result = link(ford_store, FORD_QUESTION, beams, ford_entities)
        assert result.source_rank == 2


class TestAsk:
    def beams(self):
        return [
            OutputSequence("[Barack Obama | president], [Canada | president]", -0.1, 1)
        ]

    def test_ask_false_when_triple_absent(self, obama_store, obama_entities):
        result = link(obama_store, OBAMA_QUESTION, self.beams(), obama_entities)
        assert result.ask_answer is False
        assert not result.validated
        assert result.relations == [Iri("dbo:president")]
        assert result.source_rank == 1

    def test_ask_true_when_triple_present(self, obama_true_store, obama_entities):
        result = link(obama_true_store, OBAMA_QUESTION, self.beams(), obama_entities)
        assert result.ask_answer is True
        assert result.validated
        assert result.relations == [Iri("dbo:president")]

    def test_ask_matches_reverse_orientation(self, obama_entities):
        from conftest import OBAMA_TRIPLES

        reversed_store = load_kb(
            OBAMA_TRIPLES + "\n" + nt(DBR + "Canada", DBO + "president", DBR + "Barack_Obama")
        )
        result = link(reversed_store, OBAMA_QUESTION, self.beams(), obama_entities)
        assert result.ask_answer is True

    def test_ask_limit_respected(self, obama_true_store, obama_entities):
        filler = [
            OutputSequence(f"[Barack Obama | noRel{i}]", -0.01 * i, i) for i in range(1, 11)
        ]
        late = OutputSequence(
            "[Barack Obama | president], [Canada | president]", -0.9, 11
        )
        result = link(obama_true_store, OBAMA_QUESTION, filler + [late], obama_entities)
        # The matching beam sits at rank 11, beyond the ASK window of 10.
        assert result.ask_answer is False
        assert not result.validated

    def test_non_ask_ignores_ask_path(self, ford_store, ford_entities):
        beams = [
            OutputSequence(
                "[Ford Kansas City Assembly Plant | owningOrganisation], "
                "[Ford Y-block engine | manufacturer]",
                -0.1,
                1,
            )
        ]
        result = link(ford_store, FORD_QUESTION, beams, ford_entities)
        assert result.ask_answer is None
