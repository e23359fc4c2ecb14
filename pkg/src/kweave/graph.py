"""In-memory multigraph integrating every registered dataset.

Nodes and edges keep their identity from the source documents. Cross-dataset
sameness is stored as a representative id per node instead of materialized
pairwise sameAs edges; ``neighbors`` synthesizes those edges on demand with
confidence 1.0. The graph is written by a single registration pass and then
read-only for any number of concurrent searches.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import GraphError, GraphFormatError

FILE_VERSION = 1
SAMEAS_LABEL = "sameAs"


class NodeKind(Enum):
    DATASET = "dataset"
    INTERNAL = "internal"
    VALUE = "value"
    URI = "uri"
    NUMBER = "number"
    ENTITY_PERSON = "entity:person"
    ENTITY_LOCATION = "entity:location"
    ENTITY_ORGANIZATION = "entity:organization"
    DO_NOT_LINK = "do_not_link"

    @property
    def is_entity(self) -> bool:
        return self in (
            NodeKind.ENTITY_PERSON,
            NodeKind.ENTITY_LOCATION,
            NodeKind.ENTITY_ORGANIZATION,
        )

    @property
    def linkable(self) -> bool:
        """Whether nodes of this kind take part in representative/similarity linking."""
        return self not in (NodeKind.DATASET, NodeKind.INTERNAL, NodeKind.DO_NOT_LINK)


class EdgeKind(Enum):
    DATA = "data"
    SIMILAR = "similar"
    SAMEAS = "sameas"  # virtual only, never persisted


@dataclass
class Node:
    id: int
    kind: NodeKind
    label: str
    dataset: int
    rep: int
    path_sig: str | None = None


@dataclass
class Edge:
    id: int
    source: int
    target: int
    label: str
    confidence: float
    kind: EdgeKind
    # Counts the specificity of this edge was most recently computed from:
    # n_in = same-label data edges into the target's equivalence set,
    # n_out = same-label data edges out of the source's equivalence set.
    n_in: int = 1
    n_out: int = 1
    specificity: float = 1.0


@dataclass(frozen=True, order=True)
class SameAs:
    """Virtual equivalence edge between two nodes of one equivalence set.

    Normalized so ``a < b``; identity is the node pair, there is no stored id.
    """

    a: int
    b: int

    @staticmethod
    def between(x: int, y: int) -> "SameAs":
        return SameAs(x, y) if x < y else SameAs(y, x)

    @property
    def label(self) -> str:
        return SAMEAS_LABEL

    @property
    def confidence(self) -> float:
        return 1.0

    @property
    def specificity(self) -> float:
        return 1.0


# An edge reference as used by search trees: either a stored edge id or a
# virtual SameAs pair.
EdgeRef = "int | SameAs"


@dataclass
class EquivalenceSet:
    """All nodes sharing a representative, with per-label data-edge tallies."""

    rep: int
    members: list[int]
    in_count: dict[str, int] = field(default_factory=dict)
    out_count: dict[str, int] = field(default_factory=dict)


class Graph:
    """Node/edge store with bidirectional adjacency and equivalence bookkeeping."""

    def __init__(self) -> None:
        self.nodes: dict[int, Node] = {}
        self.edges: dict[int, Edge] = {}
        self._next_node_id = 0
        self._next_edge_id = 0
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        # rep id -> member list (only sets of size > 1 are stored; a node
        # without an entry represents itself alone)
        self._members: dict[int, list[int]] = {}
        # (rep id, label) -> count of data edges into/out of the set
        self._in_tally: dict[tuple[int, str], int] = {}
        self._out_tally: dict[tuple[int, str], int] = {}
        self._frozen = False

    # ------------------------------------------------------------------
    # registration surface
    # ------------------------------------------------------------------

    def add_node(
        self,
        kind: NodeKind,
        label: str,
        dataset: int,
        path_sig: str | None = None,
    ) -> int:
        if self._frozen:
            raise GraphError("graph is frozen for reading; no further writes")
        node_id = self._next_node_id
        self._next_node_id += 1
        self.nodes[node_id] = Node(node_id, kind, label, dataset, rep=node_id, path_sig=path_sig)
        self._out[node_id] = []
        self._in[node_id] = []
        return node_id

    def add_edge(
        self,
        source: int,
        target: int,
        label: str,
        confidence: float,
        kind: EdgeKind = EdgeKind.DATA,
    ) -> int:
        if self._frozen:
            raise GraphError("graph is frozen for reading; no further writes")
        if source not in self.nodes:
            raise GraphError(f"edge source {source} does not exist")
        if target not in self.nodes:
            raise GraphError(f"edge target {target} does not exist")
        if source == target:
            raise GraphError(f"self-loop rejected on node {source}")
        if not 0.0 <= confidence <= 1.0:
            raise GraphError(f"confidence {confidence} out of [0, 1]")
        if kind is EdgeKind.SAMEAS:
            raise GraphError("sameAs edges are virtual and cannot be stored")
        edge_id = self._next_edge_id
        self._next_edge_id += 1
        edge = Edge(edge_id, source, target, label, confidence, kind)
        self.edges[edge_id] = edge
        self._out[source].append(edge_id)
        self._in[target].append(edge_id)
        return edge_id

    def freeze(self) -> None:
        """Mark the graph immutable. Searches assume a frozen snapshot."""
        self._frozen = True

    def thaw(self) -> None:
        self._frozen = False

    # ------------------------------------------------------------------
    # lookup surface
    # ------------------------------------------------------------------

    @property
    def next_node_id(self) -> int:
        return self._next_node_id

    @property
    def next_edge_id(self) -> int:
        return self._next_edge_id

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node {node_id}") from None

    def edge(self, edge_id: int) -> Edge:
        try:
            return self.edges[edge_id]
        except KeyError:
            raise GraphError(f"unknown edge {edge_id}") from None

    def representative(self, node_id: int) -> int:
        return self.node(node_id).rep

    def equivalence_set(self, node_id: int) -> EquivalenceSet:
        rep = self.representative(node_id)
        members = self._members.get(rep, [rep])
        in_count = {l: c for (r, l), c in self._in_tally.items() if r == rep}
        out_count = {l: c for (r, l), c in self._out_tally.items() if r == rep}
        return EquivalenceSet(rep, list(members), in_count, out_count)

    def members_of(self, rep: int) -> list[int]:
        """Members of the equivalence set whose representative is ``rep``."""
        return self._members.get(rep, [rep])

    def out_edges(self, node_id: int) -> list[Edge]:
        return [self.edges[e] for e in self._out[node_id]]

    def in_edges(self, node_id: int) -> list[Edge]:
        return [self.edges[e] for e in self._in[node_id]]

    def neighbors(self, node_id: int) -> Iterator[tuple[Edge | SameAs, str, int]]:
        """Yield every edge incident to the node, in both orientations.

        Produces (edge, direction, other_node) with direction ``"out"`` or
        ``"in"`` relative to the queried node. Virtual sameAs edges are
        synthesized between the node and its representative, and, when the
        node is itself a representative, toward every member of its set.
        """
        node = self.node(node_id)
        for edge_id in self._out[node_id]:
            edge = self.edges[edge_id]
            yield edge, "out", edge.target
        for edge_id in self._in[node_id]:
            edge = self.edges[edge_id]
            yield edge, "in", edge.source
        if node.rep != node_id:
            yield SameAs.between(node_id, node.rep), "out", node.rep
        else:
            for member in self._members.get(node_id, ()):
                if member != node_id:
                    yield SameAs.between(node_id, member), "in", member

    def degree(self, node_id: int) -> int:
        return len(self._out[node_id]) + len(self._in[node_id])

    # ------------------------------------------------------------------
    # equivalence plumbing (driven by the linking and specificity modules)
    # ------------------------------------------------------------------

    def set_representative(self, node_id: int, rep: int) -> None:
        """Record that ``node_id`` joins the set represented by ``rep``.

        Only bookkeeping: counter reconciliation is the specificity module's
        job (``join_equivalence_set``), which calls this.
        """
        node = self.node(node_id)
        rep_node = self.node(rep)
        if rep_node.rep != rep:
            raise GraphError(f"{rep} is not a representative")
        if node.rep != node_id or node_id in self._members:
            raise GraphError(f"node {node_id} already belongs to an equivalence set")
        node.rep = rep
        self._members.setdefault(rep, [rep]).append(node_id)

    def tally(self, rep: int, label: str, incoming: bool) -> int:
        table = self._in_tally if incoming else self._out_tally
        return table.get((rep, label), 0)

    def bump_tally(self, rep: int, label: str, incoming: bool, delta: int = 1) -> int:
        table = self._in_tally if incoming else self._out_tally
        key = (rep, label)
        value = table.get(key, 0) + delta
        if value:
            table[key] = value
        else:
            table.pop(key, None)
        return value

    def drop_tallies(self, rep: int) -> dict[tuple[str, bool], int]:
        """Remove and return every tally of a (dissolving) singleton set."""
        removed: dict[tuple[str, bool], int] = {}
        for table, incoming in ((self._in_tally, True), (self._out_tally, False)):
            for key in [k for k in table if k[0] == rep]:
                removed[(key[1], incoming)] = table.pop(key)
        return removed

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def persist(self, path: str | os.PathLike) -> None:
        """Write the graph as newline-delimited JSON records, UTF-8."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            self.dump(fh)

    def dump(self, fh: io.TextIOBase) -> None:
        meta = {
            "kind": "meta",
            "version": FILE_VERSION,
            "next_node_id": self._next_node_id,
            "next_edge_id": self._next_edge_id,
        }
        fh.write(json.dumps(meta, ensure_ascii=False, separators=(",", ":")) + "\n")
        for node_id in sorted(self.nodes):
            n = self.nodes[node_id]
            record = {
                "kind": "node",
                "id": n.id,
                "type": n.kind.value,
                "label": n.label,
                "dataset": n.dataset,
                "rep": n.rep,
                "path": n.path_sig,
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
        for edge_id in sorted(self.edges):
            e = self.edges[edge_id]
            record = {
                "kind": "edge",
                "id": e.id,
                "src": e.source,
                "tgt": e.target,
                "label": e.label,
                "conf": e.confidence,
                "ekind": e.kind.value,
                "n_in": e.n_in,
                "n_out": e.n_out,
                "spec": e.specificity,
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Graph":
        graph = cls()
        with open(path, "r", encoding="utf-8") as fh:
            graph._read(fh)
        return graph

    def _read(self, fh: io.TextIOBase) -> None:
        first = fh.readline()
        if not first:
            raise GraphFormatError("empty graph file (missing meta record)")
        meta = _parse_record(first, 1)
        if meta.get("kind") != "meta":
            raise GraphFormatError("first record must be the meta record")
        if meta.get("version") != FILE_VERSION:
            raise GraphFormatError(
                f"unsupported graph file version {meta.get('version')!r}, "
                f"expected {FILE_VERSION}"
            )
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            record = _parse_record(line, lineno)
            kind = record.get("kind")
            if kind == "node":
                self._read_node(record, lineno)
            elif kind == "edge":
                self._read_edge(record, lineno)
            else:
                raise GraphFormatError(f"line {lineno}: unknown record kind {kind!r}")
        self._next_node_id = int(meta["next_node_id"])
        self._next_edge_id = int(meta["next_edge_id"])
        self._check_references()
        self.freeze()

    def _read_node(self, record: dict, lineno: int) -> None:
        try:
            node = Node(
                id=int(record["id"]),
                kind=NodeKind(record["type"]),
                label=record["label"],
                dataset=int(record["dataset"]),
                rep=int(record["rep"]),
                path_sig=record["path"],
            )
        except (KeyError, ValueError) as exc:
            raise GraphFormatError(f"line {lineno}: bad node record ({exc})") from None
        if node.id in self.nodes:
            raise GraphFormatError(f"line {lineno}: duplicate node id {node.id}")
        self.nodes[node.id] = node
        self._out[node.id] = []
        self._in[node.id] = []

    def _read_edge(self, record: dict, lineno: int) -> None:
        try:
            edge = Edge(
                id=int(record["id"]),
                source=int(record["src"]),
                target=int(record["tgt"]),
                label=record["label"],
                confidence=float(record["conf"]),
                kind=EdgeKind(record["ekind"]),
                n_in=int(record["n_in"]),
                n_out=int(record["n_out"]),
                specificity=float(record["spec"]),
            )
        except (KeyError, ValueError) as exc:
            raise GraphFormatError(f"line {lineno}: bad edge record ({exc})") from None
        if edge.id in self.edges:
            raise GraphFormatError(f"line {lineno}: duplicate edge id {edge.id}")
        self.edges[edge.id] = edge

    def _check_references(self) -> None:
        for edge in self.edges.values():
            if edge.source not in self.nodes or edge.target not in self.nodes:
                raise GraphFormatError(
                    f"edge {edge.id} references a missing endpoint "
                    f"({edge.source} -> {edge.target})"
                )
            self._out[edge.source].append(edge.id)
            self._in[edge.target].append(edge.id)
        for node in self.nodes.values():
            rep = self.nodes.get(node.rep)
            if rep is None:
                raise GraphFormatError(f"node {node.id} references missing rep {node.rep}")
            if rep.rep != rep.id:
                raise GraphFormatError(
                    f"node {node.id} has chained representative {node.rep}"
                )
            if node.rep != node.id:
                self._members.setdefault(node.rep, [node.rep]).append(node.id)
        self._rebuild_tallies()

    def _rebuild_tallies(self) -> None:
        self._in_tally.clear()
        self._out_tally.clear()
        for edge in self.edges.values():
            if edge.kind is not EdgeKind.DATA:
                continue
            self.bump_tally(self.nodes[edge.source].rep, edge.label, incoming=False)
            self.bump_tally(self.nodes[edge.target].rep, edge.label, incoming=True)


def _parse_record(line: str, lineno: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise GraphFormatError(f"line {lineno}: record is not an object")
    return record
