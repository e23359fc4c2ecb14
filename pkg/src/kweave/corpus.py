"""One graph, its inverted index and its linker, handled as a unit."""

from __future__ import annotations

import os
from pathlib import Path

from .graph import Graph
from .indexing import InvertedIndex, Tokenizer
from .ingestion import RegistrationConfig, RegistrationReport, SourceFormat, register
from .linking import Linker
from .search import Query, SearchResult, search


def index_path(graph_path: str | os.PathLike) -> Path:
    return Path(str(graph_path) + ".idx")


class Corpus:
    def __init__(self, graph: Graph, index: InvertedIndex):
        self.graph = graph
        self.index = index
        self.linker = Linker(graph)

    @classmethod
    def new(cls, tokenizer: Tokenizer | None = None) -> "Corpus":
        return cls(Graph(), InvertedIndex(tokenizer))

    @classmethod
    def open(cls, graph_path: str | os.PathLike, tokenizer: Tokenizer | None = None) -> "Corpus":
        """Load a graph file plus its index; the index is rebuilt from the
        graph when the sidecar file is missing."""
        graph = Graph.load(graph_path)
        sidecar = index_path(graph_path)
        if sidecar.exists():
            index = InvertedIndex.load(sidecar, tokenizer)
        else:
            index = InvertedIndex.build(graph, tokenizer)
        return cls(graph, index)

    def save(self, graph_path: str | os.PathLike) -> None:
        self.graph.persist(graph_path)
        self.index.persist(index_path(graph_path))

    def register(
        self,
        data: str,
        fmt: SourceFormat,
        config: RegistrationConfig | None = None,
        name: str = "dataset",
    ) -> RegistrationReport:
        self.graph.thaw()
        report = register(self.graph, self.index, self.linker, data, fmt, config, name)
        self.graph.freeze()
        return report

    def search(self, query: Query) -> SearchResult:
        return search(self.graph, self.index, query)
