"""Shared fixtures: a small four-dataset corpus exercising every link kind.

One CSV table of assets, one JSON listing of officials, one JSON-wrapped
article and one N-Triples fragment. A gazetteer extracts people, places and
organizations, so the same names in different datasets meet through entity
nodes and representatives; one similarity edge is asserted manually between
the "Centrafrique" entity and the "Central African Republic" literal with
the illustrative confidence 0.85.
"""

import pytest

from kweave.corpus import Corpus
from kweave.extraction import Gazetteer
from kweave.graph import EdgeKind, NodeKind
from kweave.ingestion import LoadMode, RegistrationConfig, SourceFormat
from kweave.specificity import init_specificity

ASSETS_CSV = """owner,asset,location
P. Balkany,Real Estate,Marrakech
J. Dupont,Farmland,Lyon
"""

OFFICIALS_JSON = """
{"officials": [
  {"name": "P. Balkany", "mayorOf": "Levallois-Perret", "spouse": "I. Balkany"},
  {"name": "E. Gyucy", "mayorOf": "Puteaux"}
]}
"""

ARTICLE_JSON = """
{"title": "Affaires",
 "text": "Gyucy discussed with P. Balkany about the Areva deal in Centrafrique and Morocco."}
"""

DBPEDIA_NT = """\
<http://dbpedia.org/resource/Morocco> <http://dbpedia.org/ontology/partOf> <http://dbpedia.org/resource/Africa> .
<http://dbpedia.org/resource/Central_African_Republic> <http://dbpedia.org/ontology/partOf> <http://dbpedia.org/resource/Africa> .
<http://dbpedia.org/resource/Morocco> <http://dbpedia.org/ontology/name> "Morocco" .
<http://dbpedia.org/resource/Central_African_Republic> <http://dbpedia.org/ontology/name> "Central African Republic" .
<http://dbpedia.org/resource/Africa> <http://dbpedia.org/ontology/name> "Africa" .
<http://dbpedia.org/resource/Morocco> <http://dbpedia.org/ontology/capital> "Rabat" .
"""


def example_gazetteer() -> Gazetteer:
    gaz = Gazetteer()
    gaz.add("P. Balkany", NodeKind.ENTITY_PERSON)
    gaz.add("I. Balkany", NodeKind.ENTITY_PERSON)
    gaz.add("Gyucy", NodeKind.ENTITY_PERSON)
    gaz.add("Areva", NodeKind.ENTITY_ORGANIZATION)
    gaz.add("Centrafrique", NodeKind.ENTITY_LOCATION)
    gaz.add("Levallois-Perret", NodeKind.ENTITY_LOCATION)
    gaz.add("Marrakech", NodeKind.ENTITY_LOCATION)
    gaz.add("Morocco", NodeKind.ENTITY_LOCATION)
    return gaz


def build_example_corpus() -> Corpus:
    config = RegistrationConfig(mode=LoadMode.PER_TYPE, gazetteer=example_gazetteer())
    corpus = Corpus.new()
    corpus.register(ASSETS_CSV, SourceFormat.CSV, config, "assets.csv")
    corpus.register(OFFICIALS_JSON, SourceFormat.JSON, config, "officials.json")
    corpus.register(ARTICLE_JSON, SourceFormat.JSON, config, "article.json")
    corpus.register(DBPEDIA_NT, SourceFormat.NTRIPLES, config, "dbpedia.nt")
    # The similarity between "Centrafrique" and "Central African Republic"
    # comes from a smarter matcher than plain edit distance; assert the
    # illustrative 0.85 edge directly.
    centrafrique = find_node(corpus, "Centrafrique", NodeKind.ENTITY_LOCATION)
    car = find_node(corpus, "Central African Republic", NodeKind.VALUE)
    corpus.graph.thaw()
    edge = corpus.graph.add_edge(centrafrique, car, "sameAs", 0.85, EdgeKind.SIMILAR)
    init_specificity(corpus.graph, edge)
    corpus.graph.freeze()
    return corpus


def find_node(corpus: Corpus, label: str, kind: NodeKind | None = None,
              dataset: int | None = None) -> int:
    for node_id in sorted(corpus.graph.nodes):
        node = corpus.graph.nodes[node_id]
        if node.label != label:
            continue
        if kind is not None and node.kind is not kind:
            continue
        if dataset is not None and node.dataset != dataset:
            continue
        return node_id
    raise AssertionError(f"no node labeled {label!r} (kind={kind}, dataset={dataset})")


def find_nodes(corpus: Corpus, label: str, kind: NodeKind | None = None) -> list[int]:
    return [
        node_id
        for node_id in sorted(corpus.graph.nodes)
        if corpus.graph.nodes[node_id].label == label
        and (kind is None or corpus.graph.nodes[node_id].kind is kind)
    ]


@pytest.fixture(scope="session")
def example_corpus() -> Corpus:
    return build_example_corpus()
