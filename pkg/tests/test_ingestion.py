import json

import pytest

from kweave.corpus import Corpus
from kweave.errors import ParseError
from kweave.extraction import Gazetteer
from kweave.graph import EdgeKind, NodeKind
from kweave.ingestion import (
    LoadMode,
    NodeSpec,
    RegistrationConfig,
    SourceFormat,
    node_key,
    traverse,
)


def edges_of(data, fmt):
    return list(traverse(data, fmt))


# ---------------------------------------------------------------------------
# traversal shapes
# ---------------------------------------------------------------------------


def test_json_map_shape():
    edges = edges_of('{"a":"x"}', SourceFormat.JSON)
    assert len(edges) == 2
    (root, l1, map_spec), (parent, l2, leaf) = edges
    assert root.kind is NodeKind.DATASET
    assert map_spec.kind is NodeKind.INTERNAL and map_spec.label == ""
    assert (l1, l2) == ("", "a")
    assert parent is map_spec
    assert leaf.kind is NodeKind.VALUE and leaf.label == "x"
    assert leaf.path == ".a"


def test_json_array_elements_have_empty_edge_label():
    edges = edges_of('{"xs":["p","q"]}', SourceFormat.JSON)
    labels = [label for _, label, _ in edges]
    assert labels == ["", "xs", "", ""]
    leaves = [t.label for _, _, t in edges if t.kind is NodeKind.VALUE]
    assert leaves == ["p", "q"]


def test_json_numbers_booleans_and_null():
    edges = edges_of('{"n": 3, "f": 2.5, "b": true, "z": null, "e": ""}', SourceFormat.JSON)
    leaves = [(t.kind, t.label) for _, _, t in edges if t.kind is not NodeKind.INTERNAL]
    assert leaves == [
        (NodeKind.NUMBER, "3"),
        (NodeKind.NUMBER, "2.5"),
        (NodeKind.VALUE, "true"),
    ]


def test_json_parse_error_carries_line():
    with pytest.raises(ParseError) as err:
        edges_of('{"a": \n oops}', SourceFormat.JSON)
    assert err.value.line == 2


def test_csv_rows_become_tuples():
    edges = edges_of("name,city\nMarie,Paris\nJean,Lyon\n", SourceFormat.CSV)
    tuples = [t for _, _, t in edges if t.kind is NodeKind.INTERNAL]
    assert len(tuples) == 2
    cells = [(label, t.label, t.kind) for _, label, t in edges if t.kind is not NodeKind.INTERNAL and label]
    assert cells == [
        ("name", "Marie", NodeKind.VALUE),
        ("city", "Paris", NodeKind.VALUE),
        ("name", "Jean", NodeKind.VALUE),
        ("city", "Lyon", NodeKind.VALUE),
    ]


def test_csv_numbers_and_empty_cells():
    edges = edges_of("zip,street\n91200,\n", SourceFormat.CSV)
    leaves = [(t.kind, t.label) for _, _, t in edges if t.kind not in (NodeKind.INTERNAL,)]
    assert leaves == [(NodeKind.NUMBER, "91200")]


def test_csv_ragged_row_rejected():
    with pytest.raises(ParseError) as err:
        edges_of("a,b\n1,2,3\n", SourceFormat.CSV)
    assert err.value.line == 2


def test_ntriples_shapes():
    data = (
        "<http://x.org/s> <http://x.org/p> \"o\" .\n"
        "# a comment\n"
        "<http://x.org/s> <http://x.org/q> <http://x.org/t> .\n"
        '_:b0 <http://x.org/p> "esc\\n\\"quote\\u0041" .\n'
    )
    edges = edges_of(data, SourceFormat.NTRIPLES)
    assert [(s.kind, label, t.kind) for s, label, t in edges] == [
        (NodeKind.URI, "http://x.org/p", NodeKind.VALUE),
        (NodeKind.URI, "http://x.org/q", NodeKind.URI),
        (NodeKind.URI, "http://x.org/p", NodeKind.VALUE),
    ]
    assert edges[2][0].label == "_:b0"
    assert edges[2][2].label == 'esc\n"quoteA'


def test_ntriples_typed_and_tagged_literals():
    data = (
        '<http://x.org/s> <http://x.org/p> "42"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
        '<http://x.org/s> <http://x.org/p> "oui"@fr .\n'
    )
    edges = edges_of(data, SourceFormat.NTRIPLES)
    assert [t.label for _, _, t in edges] == ["42", "oui"]


def test_ntriples_bad_line_reports_position():
    with pytest.raises(ParseError) as err:
        edges_of("<a> <b> .\n", SourceFormat.NTRIPLES)
    assert err.value.line == 1


def test_text_sentence_split():
    edges = edges_of("A b. C d.", SourceFormat.TEXT)
    assert [t.label for _, _, t in edges] == ["A b.", "C d."]
    assert all(t.kind is NodeKind.VALUE for _, _, t in edges)


def test_text_delimiters_kept_and_decimals_safe():
    edges = edges_of("Pi is 3.14 roughly! Yes? Fine.", SourceFormat.TEXT)
    assert [t.label for _, _, t in edges] == ["Pi is 3.14 roughly!", "Yes?", "Fine."]


def test_html_element_tree():
    html = "<html><body><p>Hello <b>world</b></p><script>var x=1;</script></body></html>"
    edges = edges_of(html, SourceFormat.HTML)
    internals = [t.label for _, _, t in edges if t.kind is NodeKind.INTERNAL]
    assert internals == ["html", "body", "p", "b"]
    texts = [t.label for _, _, t in edges if t.kind is NodeKind.VALUE]
    assert texts == ["Hello", "world"]
    paths = {t.label: t.path for _, _, t in edges if t.kind is NodeKind.VALUE}
    assert paths["world"] == ".html.body.p.b"


def test_html_unclosed_tags_are_lenient():
    html = "<ul><li>one<li>two</ul><p>after"
    edges = edges_of(html, SourceFormat.HTML)
    texts = [t.label for _, _, t in edges if t.kind is NodeKind.VALUE]
    assert "one" in texts and "two" in texts and "after" in texts


# ---------------------------------------------------------------------------
# unification keys
# ---------------------------------------------------------------------------


def test_per_type_distinguishes_paths():
    k1 = node_key(LoadMode.PER_TYPE, NodeKind.VALUE, "Marie", ".employees.employee.name", 1)
    k2 = node_key(
        LoadMode.PER_TYPE, NodeKind.VALUE, "Marie", ".employees.employee.address.street", 1
    )
    assert k1 != k2


def test_per_type_unifies_same_path():
    key = lambda: node_key(
        LoadMode.PER_TYPE, NodeKind.NUMBER, "91200", ".employee.address.zipcode", 1
    )
    assert key() == key()


def test_per_instance_always_unique():
    make = lambda: node_key(LoadMode.PER_INSTANCE, NodeKind.VALUE, "same", ".p", 1)
    assert make() != make()


def test_per_value_ignores_path():
    k1 = node_key(LoadMode.PER_VALUE, NodeKind.VALUE, "Paris", ".a", 1)
    k2 = node_key(LoadMode.PER_VALUE, NodeKind.VALUE, "Paris", ".b", 1)
    assert k1 == k2
    assert k1 != node_key(LoadMode.PER_VALUE, NodeKind.VALUE, "Paris", ".a", 2)


# ---------------------------------------------------------------------------
# registration
# ---------------------------------------------------------------------------

PARIS_JSON = json.dumps(
    {
        "persons": [{"name": f"p{i}", "livesIn": "Paris"} for i in range(10)],
        "firms": [{"name": f"f{i}", "locatedIn": "Paris"} for i in range(5)],
    }
)


def paris_count(mode):
    corpus = Corpus.new()
    corpus.register(PARIS_JSON, SourceFormat.JSON, RegistrationConfig(mode=mode), "paris")
    return sum(1 for n in corpus.graph.nodes.values() if n.label == "Paris")


def test_paris_counts_per_mode():
    assert paris_count(LoadMode.PER_INSTANCE) == 15
    assert paris_count(LoadMode.PER_TYPE) == 2
    assert paris_count(LoadMode.PER_VALUE) == 1


def test_mode_monotonicity_on_hierarchical_input():
    counts = {mode: None for mode in LoadMode}
    for mode in LoadMode:
        corpus = Corpus.new()
        corpus.register(PARIS_JSON, SourceFormat.JSON, RegistrationConfig(mode=mode), "d")
        counts[mode] = len(corpus.graph.nodes)
    assert counts[LoadMode.PER_VALUE] <= counts[LoadMode.PER_TYPE] <= counts[LoadMode.PER_INSTANCE]


def test_ntriples_forces_per_value(caplog):
    data = '<http://x/s> <http://x/p> "o" .\n<http://x/s> <http://x/p> "o" .\n'
    corpus = Corpus.new()
    with caplog.at_level("WARNING"):
        report = corpus.register(
            data, SourceFormat.NTRIPLES, RegistrationConfig(mode=LoadMode.PER_TYPE), "rdf"
        )
    assert any("forcing per-value" in r.message for r in caplog.records)
    # one node per distinct term, duplicate triple deduplicated
    labels = sorted(n.label for n in corpus.graph.nodes.values() if n.kind is not NodeKind.DATASET)
    assert labels == ["http://x/s", "o"]
    assert report.edges_added == 1


def test_registration_creates_root_and_data_edges():
    corpus = Corpus.new()
    report = corpus.register('{"a":"x"}', SourceFormat.JSON, None, "tiny.json")
    graph = corpus.graph
    root = graph.node(report.dataset)
    assert root.kind is NodeKind.DATASET and root.label == "tiny.json"
    assert root.dataset == report.dataset
    assert len(graph.nodes) == 3 and len(graph.edges) == 2
    assert all(e.confidence == 1.0 and e.kind is EdgeKind.DATA for e in graph.edges.values())


def test_do_not_link_values_become_special_nodes():
    corpus = Corpus.new()
    config = RegistrationConfig(do_not_link=frozenset({"néant"}))
    corpus.register('{"a":"néant","b":"néant"}', SourceFormat.JSON, config, "d1")
    corpus.register('{"c":"néant"}', SourceFormat.JSON, config, "d2")
    specials = [n for n in corpus.graph.nodes.values() if n.kind is NodeKind.DO_NOT_LINK]
    assert specials and all(n.rep == n.id for n in specials)
    assert not any(e.kind is EdgeKind.SIMILAR for e in corpus.graph.edges.values())


def test_value_leaf_count_preserved():
    doc = {"a": ["x", "y", {"b": "z", "n": 7}], "c": "x"}
    edges = edges_of(json.dumps(doc), SourceFormat.JSON)
    leaves = [t for _, _, t in edges if t.kind in (NodeKind.VALUE, NodeKind.NUMBER)]
    assert len(leaves) == 5  # x, y, z, 7, x before unification


def test_reregistering_same_file_makes_disjoint_subgraphs():
    corpus = Corpus.new()
    data = '{"city":"Paris","mayor":"Anne"}'
    r1 = corpus.register(data, SourceFormat.JSON, None, "d1")
    r2 = corpus.register(data, SourceFormat.JSON, None, "d2")
    graph = corpus.graph
    datasets = {n.dataset for n in graph.nodes.values()}
    assert datasets == {r1.dataset, r2.dataset}
    for edge in graph.edges.values():
        if edge.kind is EdgeKind.DATA:
            assert graph.node(edge.source).dataset == graph.node(edge.target).dataset
    paris_nodes = [n.id for n in graph.nodes.values() if n.label == "Paris"]
    assert len(paris_nodes) == 2
    reps = {graph.representative(n) for n in paris_nodes}
    assert len(reps) == 1  # connected via representative only


def test_registration_runs_extraction_pipeline():
    gazetteer = Gazetteer()
    gazetteer.add("Patrick Balkany", NodeKind.ENTITY_PERSON)
    config = RegistrationConfig(gazetteer=gazetteer)
    corpus = Corpus.new()
    r1 = corpus.register(
        "Patrick Balkany parle. Encore Patrick Balkany.", SourceFormat.TEXT, config, "t1"
    )
    r2 = corpus.register("Article sur Patrick Balkany.", SourceFormat.TEXT, config, "t2")
    assert r1.entities_added == 1  # shared across the two sentences
    assert r2.entities_added == 1
    entities = [n for n in corpus.graph.nodes.values() if n.kind.is_entity]
    assert len(entities) == 2
    reps = {corpus.graph.representative(n.id) for n in entities}
    assert len(reps) == 1  # cross-dataset equivalence through representatives


def test_specificity_initialized_during_registration():
    corpus = Corpus.new()
    corpus.register(PARIS_JSON, SourceFormat.JSON, RegistrationConfig(mode=LoadMode.PER_VALUE), "d")
    from kweave.specificity import specificity_naive

    for e in corpus.graph.edges:
        assert corpus.graph.edge(e).specificity == pytest.approx(
            specificity_naive(corpus.graph, e), abs=1e-12
        )
