import pytest

from kweave.extraction import (
    EntityMention,
    Gazetteer,
    attach_entities,
    extract_entities,
)
from kweave.graph import Graph, NodeKind
from kweave.indexing import InvertedIndex


@pytest.fixture
def gazetteer():
    g = Gazetteer()
    g.add("Patrick Balkany", NodeKind.ENTITY_PERSON)
    g.add("P. Balkany", NodeKind.ENTITY_PERSON)
    g.add("Areva", NodeKind.ENTITY_ORGANIZATION, 0.9)
    g.add("Centrafrique", NodeKind.ENTITY_LOCATION)
    return g


def test_gazetteer_tsv_loading(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text(
        "# surfaces\nPatrick Balkany\tperson\t1.0\nAreva\torganization\t0.9\n"
        "Levallois-Perret\tlocation\n",
        encoding="utf-8",
    )
    g = Gazetteer.load(path)
    assert len(g) == 3
    assert g.get("patrick balkany") == (NodeKind.ENTITY_PERSON, 1.0)
    assert g.get("AREVA") == (NodeKind.ENTITY_ORGANIZATION, 0.9)
    assert g.get("Levallois-Perret") == (NodeKind.ENTITY_LOCATION, 1.0)


def test_gazetteer_rejects_bad_kind(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text("X\tplanet\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown entity kind"):
        Gazetteer.load(path)


def test_two_mentions_in_sentence(gazetteer):
    label = "Le contrat entre Patrick Balkany et Areva fut signé."
    mentions = extract_entities(label, gazetteer)
    assert [(m.surface, m.kind) for m in mentions] == [
        ("Patrick Balkany", NodeKind.ENTITY_PERSON),
        ("Areva", NodeKind.ENTITY_ORGANIZATION),
    ]
    for m in mentions:
        assert label[m.start : m.end] == m.surface


def test_longest_match_wins(gazetteer):
    gazetteer.add("Balkany", NodeKind.ENTITY_PERSON)
    mentions = extract_entities("Patrick Balkany spoke.", gazetteer)
    assert [m.surface for m in mentions] == ["Patrick Balkany"]


def test_do_not_link_mention_dropped(gazetteer):
    gazetteer.add("néant", NodeKind.ENTITY_LOCATION)
    assert extract_entities("néant", gazetteer, {"néant"}) == []


def test_no_hits_is_empty(gazetteer):
    assert extract_entities("nothing to see here", gazetteer) == []


def test_person_heuristic_off_by_default(gazetteer):
    label = "Meeting with Jeanne Dupont today."
    assert extract_entities(label, gazetteer) == []
    found = extract_entities(label, gazetteer, person_heuristic=True)
    assert [m.surface for m in found] == ["Jeanne Dupont"]
    assert found[0].kind is NodeKind.ENTITY_PERSON


def build_parent(label="Entre P. Balkany et Areva."):
    graph = Graph()
    index = InvertedIndex()
    parent = graph.add_node(NodeKind.VALUE, label, dataset=0)
    index.index_node(graph, parent)
    return graph, index, parent


def test_attach_creates_entity_and_edge(gazetteer):
    graph, index, parent = build_parent()
    mentions = extract_entities(graph.node(parent).label, gazetteer)
    pairs = attach_entities(graph, parent, mentions, index)
    assert len(pairs) == 2
    person_id, edge_id = pairs[0]
    assert graph.node(person_id).kind is NodeKind.ENTITY_PERSON
    edge = graph.edge(edge_id)
    assert edge.source == parent and edge.target == person_id
    assert edge.label == "extract:person"
    assert edge.confidence == 1.0
    org_edge = graph.edge(pairs[1][1])
    assert org_edge.label == "extract:organization"
    assert org_edge.confidence == 0.9
    # keyword transfer: the entity node answers for its own tokens
    assert person_id in index.raw_postings("balkany")


def test_shared_entity_across_two_sentences(gazetteer):
    graph = Graph()
    index = InvertedIndex()
    s1 = graph.add_node(NodeKind.VALUE, "P. Balkany visita le Maroc.", 0)
    s2 = graph.add_node(NodeKind.VALUE, "On revit P. Balkany plus tard.", 0)
    nodes_before = len(graph.nodes)
    for sentence in (s1, s2):
        mentions = extract_entities(graph.node(sentence).label, gazetteer)
        attach_entities(graph, sentence, mentions, index)
    entities = [n for n in graph.nodes.values() if n.kind.is_entity]
    assert len(entities) == 1
    assert len(graph.nodes) == nodes_before + 1
    entity = entities[0]
    incoming = [e for e in graph.edges.values() if e.target == entity.id]
    assert len(incoming) == 2


def test_attach_is_idempotent(gazetteer):
    graph, index, parent = build_parent()
    mentions = extract_entities(graph.node(parent).label, gazetteer)
    first = attach_entities(graph, parent, mentions, index)
    nodes, edges = len(graph.nodes), len(graph.edges)
    second = attach_entities(graph, parent, mentions, index)
    assert (len(graph.nodes), len(graph.edges)) == (nodes, edges)
    assert first == second


def test_attach_empty_mentions_changes_nothing(gazetteer):
    graph, index, parent = build_parent()
    before = (len(graph.nodes), len(graph.edges))
    assert attach_entities(graph, parent, [], index) == []
    assert (len(graph.nodes), len(graph.edges)) == before


def test_entities_are_leaves_of_their_dataset(gazetteer):
    graph, index, parent = build_parent()
    mentions = extract_entities(graph.node(parent).label, gazetteer)
    pairs = attach_entities(graph, parent, mentions, index)
    for entity_id, _ in pairs:
        assert graph.out_edges(entity_id) == []
