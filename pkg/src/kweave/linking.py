"""Cross-node sameness: representatives for equal labels, similarity edges
for near-equal ones.

Nodes of the same kind carrying the same NFC-normalized label in different
datasets form one equivalence set, represented by the first such node ever
registered. Near-equal labels (similarity in [tau, 1)) get an explicit
similarity edge whose confidence is the similarity, since similarity is not
transitive and cannot be reconstructed.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from . import specificity
from .graph import SAMEAS_LABEL, EdgeKind, Graph, NodeKind
from .indexing import InvertedIndex


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance, two-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def label_similarity(a: str, b: str) -> float:
    """Normalized edit-distance similarity over NFC-lowercased strings.

    Symmetric, 1.0 exactly when the normalized strings are equal, 0.0 when
    every character must change.
    """
    na = unicodedata.normalize("NFC", a).lower()
    nb = unicodedata.normalize("NFC", b).lower()
    if na == nb:
        return 1.0
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(na, nb) / longest


def label_key(kind: NodeKind, label: str) -> tuple[str, str]:
    """Cross-dataset equality key. Kinds must match: a number "2020" and a
    text value "2020" stay apart."""
    return (kind.value, unicodedata.normalize("NFC", label))


@dataclass
class _LabelGroup:
    members: list[int] = field(default_factory=list)
    datasets: set[int] = field(default_factory=set)


class Linker:
    """Tracks label groups over one graph and assigns representatives."""

    def __init__(self, graph: Graph):
        self.graph = graph
        self._groups: dict[tuple[str, str], _LabelGroup] = {}
        # Rebuild group state when attached to a pre-populated graph.
        for node_id in sorted(graph.nodes):
            node = graph.nodes[node_id]
            if node.kind.linkable and node.label:
                group = self._groups.setdefault(label_key(node.kind, node.label), _LabelGroup())
                group.members.append(node_id)
                group.datasets.add(node.dataset)

    def assign_representative(self, node_id: int) -> int:
        """Place a just-inserted node into its equivalence set.

        If an earlier node in a different dataset carries the same label key,
        the whole label group is united under its first-registered node;
        otherwise the node represents itself. Returns the representative.
        """
        node = self.graph.node(node_id)
        if not node.kind.linkable or not node.label:
            return node_id
        group = self._groups.setdefault(label_key(node.kind, node.label), _LabelGroup())
        group.members.append(node_id)
        group.datasets.add(node.dataset)
        if len(group.datasets) < 2:
            return node_id
        rep = group.members[0]
        # Unite any member still on its own: the first cross-dataset
        # occurrence activates the whole group, including same-dataset
        # duplicates registered before activation.
        for member in group.members[1:]:
            if self.graph.representative(member) == member and member != rep:
                specificity.join_equivalence_set(self.graph, rep, member)
        return rep

    def find_similar(
        self, node_id: int, tau: float, index: InvertedIndex
    ) -> list[tuple[int, float]]:
        """Earlier nodes whose label is tau-similar but not equal.

        Candidates are restricted to nodes sharing at least one index keyword
        (blocking), so each new node is compared against a short list instead
        of the whole graph. Returns (other node id, similarity) pairs sorted
        by id; the caller materializes the edges.
        """
        node = self.graph.node(node_id)
        if not node.kind.linkable or not node.label or tau >= 1.0:
            return []
        candidates: set[int] = set()
        for keyword in index.tokenizer.tokenize(node.label, node.kind):
            candidates |= index.raw_postings(keyword)
        results = []
        for other_id in sorted(candidates):
            if other_id == node_id:
                continue
            other = self.graph.node(other_id)
            if not other.kind.linkable or not other.label:
                continue
            sim = label_similarity(node.label, other.label)
            if tau <= sim < 1.0:
                results.append((other_id, sim))
        return results

    def materialize_similar(self, node_id: int, tau: float, index: InvertedIndex) -> list[int]:
        """Add one similarity edge per tau-similar earlier node."""
        edge_ids = []
        for other_id, sim in self.find_similar(node_id, tau, index):
            edge_id = self.graph.add_edge(node_id, other_id, SAMEAS_LABEL, sim, EdgeKind.SIMILAR)
            specificity.init_specificity(self.graph, edge_id)
            edge_ids.append(edge_id)
        return edge_ids
