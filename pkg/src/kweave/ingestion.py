"""Source document traversal and dataset registration.

Each supported format is walked into parent-to-child edges in document
order; every emitted node carries its kind, label and root path. The
registration pipeline unifies nodes per the configured mode, applies the
do-not-link policy, and runs each new node through indexing, entity
extraction, representative assignment and similarity linking, updating edge
specificity as it goes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import re
from dataclasses import dataclass, field as dc_field
from enum import Enum
from html.parser import HTMLParser
from typing import Iterable, Iterator

from . import specificity
from .errors import ConfigError, ParseError
from .extraction import Gazetteer, attach_entities, extract_entities
from .graph import EdgeKind, Graph, NodeKind
from .indexing import InvertedIndex
from .linking import Linker

logger = logging.getLogger(__name__)

EMPTY = ""


class SourceFormat(Enum):
    JSON = "json"
    CSV = "csv"
    NTRIPLES = "ntriples"
    TEXT = "text"
    HTML = "html"


class LoadMode(Enum):
    PER_INSTANCE = "per-instance"
    PER_TYPE = "per-type"
    PER_VALUE = "per-value"


@dataclass
class RegistrationConfig:
    mode: LoadMode = LoadMode.PER_TYPE
    do_not_link: frozenset[str] = frozenset()
    tau: float = 0.8
    gazetteer: Gazetteer | None = None
    person_heuristic: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")


@dataclass(eq=False)
class NodeSpec:
    """A node as seen by a traversal, before unification.

    Internal and dataset nodes are identified by spec instance (never
    fused); leaf nodes are fused according to the loading mode.
    """

    kind: NodeKind
    label: str
    path: str = EMPTY


_unique_keys = itertools.count()


def node_key(mode: LoadMode, kind: NodeKind, label: str, path: str, dataset: int) -> tuple:
    """Unification key for a leaf node.

    Per-instance keys are unique on every call; per-value keys fuse equal
    labels across the dataset; per-type keys additionally require the same
    root path.
    """
    if mode is LoadMode.PER_INSTANCE:
        return ("i", next(_unique_keys))
    if mode is LoadMode.PER_VALUE:
        return ("v", dataset, kind.value, label)
    return ("t", dataset, kind.value, label, path)


# ---------------------------------------------------------------------------
# traversals
# ---------------------------------------------------------------------------

TraversalEdge = "tuple[NodeSpec, str, NodeSpec]"

_NUMBER_RE = re.compile(r"[+-]?\d+(\.\d+)?\Z")


def traverse(data: str, fmt: SourceFormat, root: NodeSpec | None = None) -> Iterator[TraversalEdge]:
    """Walk a document into (source spec, edge label, target spec) triples."""
    if root is None:
        root = NodeSpec(NodeKind.DATASET, EMPTY)
    if fmt is SourceFormat.JSON:
        return _traverse_json(data, root)
    if fmt is SourceFormat.CSV:
        return _traverse_csv(data, root)
    if fmt is SourceFormat.NTRIPLES:
        return _traverse_ntriples(data)
    if fmt is SourceFormat.TEXT:
        return _traverse_text(data, root)
    if fmt is SourceFormat.HTML:
        return _traverse_html(data, root)
    raise ConfigError(f"unsupported format {fmt}")


def _scalar_spec(value, path: str) -> NodeSpec | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return NodeSpec(NodeKind.VALUE, "true" if value else "false", path)
    if isinstance(value, (int, float)):
        return NodeSpec(NodeKind.NUMBER, repr(value) if isinstance(value, float) else str(value), path)
    if value == EMPTY:
        return None
    return NodeSpec(NodeKind.VALUE, str(value), path)


def _traverse_json(data: str, root: NodeSpec) -> Iterator[TraversalEdge]:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    yield from _json_value(root, EMPTY, doc, EMPTY)


def _json_value(parent: NodeSpec, edge_label: str, value, path: str) -> Iterator[TraversalEdge]:
    if isinstance(value, dict):
        node = NodeSpec(NodeKind.INTERNAL, EMPTY, path)
        yield parent, edge_label, node
        for key, child in value.items():
            yield from _json_value(node, key, child, f"{path}.{key}")
    elif isinstance(value, list):
        node = NodeSpec(NodeKind.INTERNAL, EMPTY, path)
        yield parent, edge_label, node
        for child in value:
            # Array elements inherit the array's path; element edges are
            # unlabeled, the format gives them no name.
            yield from _json_value(node, EMPTY, child, path)
    else:
        leaf = _scalar_spec(value, path)
        if leaf is not None:
            yield parent, edge_label, leaf


def _traverse_csv(data: str, root: NodeSpec) -> Iterator[TraversalEdge]:
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader, None)
    except csv.Error as exc:
        raise ParseError(f"invalid CSV: {exc}", line=1) from None
    if header is None:
        return
    try:
        for row in reader:
            if not row:
                continue
            lineno = reader.line_num
            if len(row) != len(header):
                raise ParseError(
                    f"ragged row: {len(row)} cells, header has {len(header)}", line=lineno
                )
            tuple_node = NodeSpec(NodeKind.INTERNAL, EMPTY, EMPTY)
            yield root, EMPTY, tuple_node
            for column, cell in zip(header, row):
                if cell == EMPTY:
                    continue
                kind = NodeKind.NUMBER if _NUMBER_RE.match(cell) else NodeKind.VALUE
                yield tuple_node, column, NodeSpec(kind, cell, f".{column}")
    except csv.Error as exc:
        raise ParseError(f"invalid CSV: {exc}", line=reader.line_num) from None


_NT_IRI = r"<([^<>\"{}|^`\\\x00-\x20]*)>"
_NT_BNODE = r"(_:[A-Za-z][A-Za-z0-9._-]*)"
_NT_LITERAL = r'"((?:[^"\\]|\\.)*)"(?:\^\^<[^<>\s]*>|@[a-zA-Z][a-zA-Z0-9-]*)?'
_NT_LINE_RE = re.compile(
    rf"^(?:{_NT_IRI}|{_NT_BNODE})\s+{_NT_IRI}\s+(?:{_NT_IRI}|{_NT_BNODE}|{_NT_LITERAL})\s*\.\s*$"
)
_NT_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _nt_unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        code = text[i + 1] if i + 1 < len(text) else EMPTY
        if code in _NT_ESCAPES:
            out.append(_NT_ESCAPES[code])
            i += 2
        elif code == "u":
            out.append(chr(int(text[i + 2 : i + 6], 16)))
            i += 6
        elif code == "U":
            out.append(chr(int(text[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise ValueError(f"bad escape \\{code}")
    return EMPTY.join(out)


def _traverse_ntriples(data: str) -> Iterator[TraversalEdge]:
    for lineno, line in enumerate(data.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _NT_LINE_RE.match(stripped)
        if match is None:
            raise ParseError("invalid N-Triples statement", line=lineno)
        subj_iri, subj_bnode, pred, obj_iri, obj_bnode, obj_lit = match.groups()
        subject = NodeSpec(NodeKind.URI, subj_iri if subj_iri is not None else subj_bnode)
        if obj_lit is not None:
            try:
                obj = NodeSpec(NodeKind.VALUE, _nt_unescape(obj_lit))
            except ValueError as exc:
                raise ParseError(f"invalid literal: {exc}", line=lineno) from None
        elif obj_iri is not None:
            obj = NodeSpec(NodeKind.URI, obj_iri)
        else:
            obj = NodeSpec(NodeKind.URI, obj_bnode)
        if obj.label == EMPTY:
            continue
        yield subject, pred, obj


_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def _traverse_text(data: str, root: NodeSpec) -> Iterator[TraversalEdge]:
    for sentence in _SENTENCE_SPLIT_RE.split(data.strip()):
        sentence = sentence.strip()
        if sentence:
            yield root, EMPTY, NodeSpec(NodeKind.VALUE, sentence)


_VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
_DROPPED_ELEMENTS = frozenset({"script", "style"})


class _HtmlWalker(HTMLParser):
    """Lenient element-tree walk: unclosed tags close at their parent's end,
    script and style content is dropped."""

    def __init__(self, root: NodeSpec):
        super().__init__(convert_charrefs=True)
        self.stack: list[tuple[str, NodeSpec]] = [("", root)]
        self.edges: list[tuple[NodeSpec, str, NodeSpec]] = []
        self.skip_depth = 0

    def handle_starttag(self, tag: str, attrs) -> None:
        if self.skip_depth:
            self.skip_depth += 1
            return
        if tag in _DROPPED_ELEMENTS:
            self.skip_depth = 1
            return
        parent = self.stack[-1][1]
        spec = NodeSpec(NodeKind.INTERNAL, tag, f"{parent.path}.{tag}")
        self.edges.append((parent, EMPTY, spec))
        if tag not in _VOID_ELEMENTS:
            self.stack.append((tag, spec))

    def handle_startendtag(self, tag: str, attrs) -> None:
        if self.skip_depth or tag in _DROPPED_ELEMENTS:
            return
        parent = self.stack[-1][1]
        spec = NodeSpec(NodeKind.INTERNAL, tag, f"{parent.path}.{tag}")
        self.edges.append((parent, EMPTY, spec))

    def handle_endtag(self, tag: str) -> None:
        if self.skip_depth:
            self.skip_depth -= 1
            return
        if tag in _VOID_ELEMENTS:
            return
        for position in range(len(self.stack) - 1, 0, -1):
            if self.stack[position][0] == tag:
                del self.stack[position:]
                return
        # stray end tag: ignore

    def handle_data(self, data: str) -> None:
        if self.skip_depth:
            return
        text = re.sub(r"\s+", " ", data).strip()
        if not text:
            return
        parent = self.stack[-1][1]
        self.edges.append((parent, EMPTY, NodeSpec(NodeKind.VALUE, text, parent.path)))


def _traverse_html(data: str, root: NodeSpec) -> Iterator[TraversalEdge]:
    walker = _HtmlWalker(root)
    walker.feed(data)
    walker.close()
    return iter(walker.edges)


# ---------------------------------------------------------------------------
# registration
# ---------------------------------------------------------------------------


@dataclass
class RegistrationReport:
    dataset: int
    nodes_added: int = 0
    edges_added: int = 0
    entities_added: int = 0
    similar_added: int = 0
    fused_nodes: int = 0


class Registrar:
    """Drives one dataset registration over a shared graph/index/linker."""

    def __init__(self, graph: Graph, index: InvertedIndex, linker: Linker,
                 config: RegistrationConfig):
        self.graph = graph
        self.index = index
        self.linker = linker
        self.config = config
        self._leaf_ids: dict[tuple, int] = {}
        self._spec_ids: dict[int, int] = {}
        self._entity_cache: dict[tuple[int, NodeKind, str], int] = {}
        self._seen_edges: set[tuple[int, str, int]] = set()
        self.report: RegistrationReport | None = None

    def register(self, data: str, fmt: SourceFormat, name: str) -> int:
        mode = self.config.mode
        if fmt is SourceFormat.NTRIPLES and mode is not LoadMode.PER_VALUE:
            logger.warning(
                "%s loading does not apply to RDF; forcing %s for %s",
                mode.value, LoadMode.PER_VALUE.value, name,
            )
            mode = LoadMode.PER_VALUE
        root_spec = NodeSpec(NodeKind.DATASET, name)
        dataset = self.graph.add_node(NodeKind.DATASET, name, dataset=0)
        self.graph.nodes[dataset].dataset = dataset
        self._spec_ids[id(root_spec)] = dataset
        self.report = RegistrationReport(dataset=dataset)
        self.report.nodes_added = 1
        for src_spec, label, tgt_spec in traverse(data, fmt, root_spec):
            src = self._materialize(src_spec, mode, dataset)
            tgt = self._materialize(tgt_spec, mode, dataset)
            if src is None or tgt is None or src == tgt:
                continue
            signature = (src, label, tgt)
            if signature in self._seen_edges:
                continue
            self._seen_edges.add(signature)
            edge_id = self.graph.add_edge(src, tgt, label, 1.0, EdgeKind.DATA)
            specificity.init_specificity(self.graph, edge_id)
            self.report.edges_added += 1
        return dataset

    def _materialize(self, spec: NodeSpec, mode: LoadMode, dataset: int) -> int | None:
        if spec.kind in (NodeKind.DATASET, NodeKind.INTERNAL):
            node_id = self._spec_ids.get(id(spec))
            if node_id is None:
                node_id = self.graph.add_node(spec.kind, spec.label, dataset, spec.path or None)
                self._spec_ids[id(spec)] = node_id
                self.index.index_node(self.graph, node_id)
                self.report.nodes_added += 1
            return node_id
        if spec.label == EMPTY:
            return None
        kind = spec.kind
        if kind is NodeKind.VALUE and spec.label in self.config.do_not_link:
            kind = NodeKind.DO_NOT_LINK
        key = node_key(mode, kind, spec.label, spec.path, dataset)
        node_id = self._leaf_ids.get(key)
        if node_id is not None:
            self.report.fused_nodes += 1
            return node_id
        node_id = self.graph.add_node(kind, spec.label, dataset, spec.path or None)
        self._leaf_ids[key] = node_id
        self.report.nodes_added += 1
        self._process_new_node(node_id)
        return node_id

    def _process_new_node(self, node_id: int) -> None:
        """Index, extract, link: the shared pipeline for every new leaf."""
        node = self.graph.node(node_id)
        self.index.index_node(self.graph, node_id)
        if node.kind is NodeKind.VALUE and self.config.gazetteer is not None:
            mentions = extract_entities(
                node.label,
                self.config.gazetteer,
                self.config.do_not_link,
                self.config.person_heuristic,
            )
            first_new_node = self.graph.next_node_id
            first_new_edge = self.graph.next_edge_id
            pairs = attach_entities(
                self.graph, node_id, mentions, self.index, self._entity_cache
            )
            for entity_id, _edge_id in pairs:
                if entity_id >= first_new_node:
                    # entity nodes link like any other value
                    self.report.nodes_added += 1
                    self.report.entities_added += 1
                    self.linker.assign_representative(entity_id)
                    self.report.similar_added += len(
                        self.linker.materialize_similar(entity_id, self.config.tau, self.index)
                    )
            self.report.edges_added += self.graph.next_edge_id - first_new_edge
        if node.kind.linkable:
            self.linker.assign_representative(node_id)
            self.report.similar_added += len(
                self.linker.materialize_similar(node_id, self.config.tau, self.index)
            )


def register(
    graph: Graph,
    index: InvertedIndex,
    linker: Linker,
    data: str,
    fmt: SourceFormat,
    config: RegistrationConfig | None = None,
    name: str = "dataset",
) -> RegistrationReport:
    """Register one source document; returns the registration report."""
    registrar = Registrar(graph, index, linker, config or RegistrationConfig())
    registrar.register(data, fmt, name)
    return registrar.report
