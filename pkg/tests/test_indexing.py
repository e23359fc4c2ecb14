import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kweave.graph import Graph, NodeKind
from kweave.indexing import InvertedIndex, Tokenizer, load_stopwords, plural_stem
from kweave.specificity import init_specificity


@pytest.fixture(scope="module")
def tokenizer():
    return Tokenizer()


def test_tokenize_splits_on_separators(tokenizer):
    assert tokenizer.tokenize("Levallois-Perret") == {"levallois", "perret"}


def test_tokenize_uri_decomposition(tokenizer):
    assert tokenizer.tokenize("http://dbpedia.org/resource/Morocco", NodeKind.URI) == {
        "dbpedia",
        "resource",
        "morocco",
    }


def test_tokenize_all_stopwords_is_empty(tokenizer):
    assert tokenizer.tokenize("the of a") == set()


def test_tokenize_drops_single_characters(tokenizer):
    assert tokenizer.tokenize("P. Balkany") == {"balkany"}


def test_tokenize_keeps_numbers(tokenizer):
    assert tokenizer.tokenize("zipcode 91200") == {"zipcode", "91200"}


def test_tokenize_normalizes_case_and_accents_nfc(tokenizer):
    # decomposed e + combining acute folds into the precomposed form
    assert tokenizer.tokenize("Réal") == tokenizer.tokenize("Réal")


def test_plural_stemming_on_common_forms(tokenizer):
    assert tokenizer.tokenize("estates") == {"estate"}
    assert tokenizer.tokenize("cities councils") == {"city", "council"}
    # short and protected endings stay whole
    assert plural_stem("bus") == "bus"
    assert plural_stem("paris") == "paris"
    assert plural_stem("class") == "class"


def test_identity_stemmer_is_pluggable():
    t = Tokenizer(stemmer="none")
    assert t.tokenize("estates") == {"estates"}


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60))
def test_tokenize_idempotent(label):
    t = Tokenizer()
    once = t.tokenize(label)
    again = t.tokenize(" ".join(sorted(once)))
    assert again == once


def test_stopword_file_roundtrip(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment\nfoo\nBar\n\n", encoding="utf-8")
    words = load_stopwords(path)
    assert words == frozenset({"foo", "bar"})
    t = Tokenizer(words)
    assert t.tokenize("foo bar baz") == {"baz"}


def indexed_graph():
    g = Graph()
    index = InvertedIndex()
    morocco = g.add_node(NodeKind.VALUE, "Morocco", 0)
    internal = g.add_node(NodeKind.INTERNAL, "", 0)
    ivory = g.add_node(NodeKind.VALUE, "Ivory Coast", 0)
    counts = [index.index_node(g, n) for n in (morocco, internal, ivory)]
    return g, index, (morocco, internal, ivory), counts


def test_index_node_posting_counts():
    _, _, _, counts = indexed_graph()
    assert counts == [1, 0, 2]


def test_lookup_miss_is_empty():
    g, index, _, _ = indexed_graph()
    assert index.lookup(g, "atlantis") == {}


def test_lookup_matches_stemmed_keyword():
    g, index, (morocco, _, ivory), _ = indexed_graph()
    assert set(index.lookup(g, "Morocco")) == {morocco}
    assert set(index.lookup(g, "coast")) == {ivory}


def test_lookup_suppresses_parent_when_entity_child_matches():
    g = Graph()
    index = InvertedIndex()
    sentence = g.add_node(NodeKind.VALUE, "Meeting between P. Balkany and others.", 0)
    entity = g.add_node(NodeKind.ENTITY_PERSON, "P. Balkany", 0)
    e = g.add_edge(sentence, entity, "extract:person", 1.0)
    init_specificity(g, e)
    index.index_node(g, sentence)
    index.index_node(g, entity)
    hits = index.lookup(g, "balkany")
    assert set(hits) == {entity}
    # a keyword only the parent matches still returns the parent
    assert set(index.lookup(g, "meeting")) == {sentence}


def test_dataset_nodes_are_not_indexed():
    g = Graph()
    index = InvertedIndex()
    root = g.add_node(NodeKind.DATASET, "officials.json", 0)
    assert index.index_node(g, root) == 0
    assert index.lookup(g, "officials") == {}


def test_do_not_link_nodes_are_indexed():
    g = Graph()
    index = InvertedIndex()
    n = g.add_node(NodeKind.DO_NOT_LINK, "néant", 0)
    assert index.index_node(g, n) == 1
    assert set(index.lookup(g, "néant")) == {n}


def test_index_rebuild_is_byte_identical(tmp_path):
    g, index, nodes, _ = indexed_graph()
    direct = io.StringIO()
    index.dump(direct)
    rebuilt = io.StringIO()
    InvertedIndex.build(g).dump(rebuilt)
    assert direct.getvalue() == rebuilt.getvalue()

    path = tmp_path / "g.idx"
    index.persist(path)
    loaded = InvertedIndex.load(path)
    second = io.StringIO()
    loaded.dump(second)
    assert second.getvalue() == direct.getvalue()


def test_index_records_are_sorted(tmp_path):
    g, index, _, _ = indexed_graph()
    path = tmp_path / "g.idx"
    index.persist(path)
    lines = path.read_text("utf-8").strip().split("\n")
    keys = [line.split('"')[3] for line in lines]
    assert keys == sorted(keys)
