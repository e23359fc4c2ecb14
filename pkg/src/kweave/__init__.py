"""kweave: keyword search over a graph woven from heterogeneous datasets.

Register JSON, CSV, N-Triples, text or HTML sources into one integrated
graph, then ask for the top-k minimal trees connecting a set of keywords.
"""

from .corpus import Corpus
from .errors import ConfigError, GraphError, GraphFormatError, KweaveError, ParseError
from .extraction import Gazetteer
from .graph import Edge, EdgeKind, Graph, Node, NodeKind, SameAs
from .indexing import InvertedIndex, Tokenizer, load_stopwords
from .ingestion import LoadMode, RegistrationConfig, SourceFormat, register, traverse
from .linking import Linker, label_similarity
from .scoring import ScoreBreakdown, ScoreParams
from .search import (
    Answer,
    Query,
    SearchResult,
    all_answers,
    brute_force_answers,
    search,
)
from .syngen import gen_ba, gen_chain, gen_line, gen_star

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "ConfigError",
    "Corpus",
    "Edge",
    "EdgeKind",
    "Gazetteer",
    "Graph",
    "GraphError",
    "GraphFormatError",
    "InvertedIndex",
    "KweaveError",
    "Linker",
    "LoadMode",
    "Node",
    "NodeKind",
    "ParseError",
    "Query",
    "RegistrationConfig",
    "SameAs",
    "ScoreBreakdown",
    "ScoreParams",
    "SearchResult",
    "SourceFormat",
    "Tokenizer",
    "all_answers",
    "brute_force_answers",
    "gen_ba",
    "gen_chain",
    "gen_line",
    "gen_star",
    "label_similarity",
    "load_stopwords",
    "register",
    "search",
    "traverse",
]
