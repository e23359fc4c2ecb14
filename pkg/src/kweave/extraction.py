"""Entity recognition inside value labels.

A gazetteer (dictionary of known people, locations and organizations) is
matched against token n-grams of each label, longest match first. Recognized
mentions become entity child nodes attached under the text node with an
``extract:<kind>`` edge; the entity label's keywords are indexed on the
entity node so searches land on the entity rather than only on the long text
around it. An optional capitalized-sequence heuristic can tag likely person
names without a gazetteer entry; it is off by default.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

from . import specificity
from .graph import EdgeKind, Graph, NodeKind
from .indexing import InvertedIndex

EXTRACT_LABELS = {
    NodeKind.ENTITY_PERSON: "extract:person",
    NodeKind.ENTITY_LOCATION: "extract:location",
    NodeKind.ENTITY_ORGANIZATION: "extract:organization",
}

_KIND_NAMES = {
    "person": NodeKind.ENTITY_PERSON,
    "location": NodeKind.ENTITY_LOCATION,
    "organization": NodeKind.ENTITY_ORGANIZATION,
}

MAX_NGRAM = 4

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
# Two or more capitalized words in a row, e.g. "Patrick Balkany".
_CAPSEQ_RE = re.compile(r"\b(?:[A-ZÀ-Ý][\wÀ-ÿ]+(?:\s+|$)){2,}")


def _norm(text: str) -> str:
    return unicodedata.normalize("NFC", text).lower()


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    kind: NodeKind
    surface: str
    confidence: float


@dataclass
class Gazetteer:
    """Normalized surface form -> (entity kind, confidence)."""

    entries: dict[str, tuple[NodeKind, float]] = field(default_factory=dict)

    def add(self, surface: str, kind: NodeKind, confidence: float = 1.0) -> None:
        if not surface:
            raise ValueError("empty gazetteer surface")
        if not 0.0 < confidence <= 1.0:
            raise ValueError(f"gazetteer confidence {confidence} out of (0, 1]")
        self.entries[_norm(surface)] = (kind, confidence)

    def get(self, surface: str) -> tuple[NodeKind, float] | None:
        return self.entries.get(_norm(surface))

    @classmethod
    def load(cls, path) -> "Gazetteer":
        """Read a TSV gazetteer: surface<TAB>kind<TAB>confidence, '#' comments.

        The confidence column is optional and defaults to 1.0.
        """
        gaz = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) < 2:
                    raise ValueError(f"{path}:{lineno}: expected surface<TAB>kind")
                surface, kind_name = parts[0], parts[1].strip().lower()
                if kind_name not in _KIND_NAMES:
                    raise ValueError(f"{path}:{lineno}: unknown entity kind {kind_name!r}")
                confidence = float(parts[2]) if len(parts) > 2 and parts[2].strip() else 1.0
                gaz.add(surface, _KIND_NAMES[kind_name], confidence)
        return gaz

    def __len__(self) -> int:
        return len(self.entries)


def extract_entities(
    label: str,
    gazetteer: Gazetteer,
    do_not_link: frozenset[str] | set[str] = frozenset(),
    person_heuristic: bool = False,
) -> list[EntityMention]:
    """Find entity mentions in a label.

    Scans token n-grams (up to 4 tokens) left to right, preferring the
    longest gazetteer match at each position; matched spans do not overlap.
    Mentions whose surface is in the do-not-link set are dropped silently.
    """
    blocked = {_norm(s) for s in do_not_link}
    tokens = [(m.start(), m.end()) for m in _WORD_RE.finditer(label)]
    mentions: list[EntityMention] = []
    i = 0
    while i < len(tokens):
        match = None
        for n in range(min(MAX_NGRAM, len(tokens) - i), 0, -1):
            start = tokens[i][0]
            end = tokens[i + n - 1][1]
            hit = gazetteer.get(label[start:end])
            if hit is not None:
                match = (start, end, hit, n)
                break
        if match is None:
            i += 1
            continue
        start, end, (kind, confidence), n = match
        surface = label[start:end]
        if _norm(surface) not in blocked:
            mentions.append(EntityMention(start, end, kind, surface, confidence))
        i += n
    if person_heuristic:
        mentions.extend(_heuristic_people(label, mentions, blocked))
    return mentions


def _heuristic_people(
    label: str, taken: list[EntityMention], blocked: set[str]
) -> list[EntityMention]:
    found = []
    for m in _CAPSEQ_RE.finditer(label):
        start, end = m.start(), m.end() - (len(m.group()) - len(m.group().rstrip()))
        surface = label[start:end]
        if _norm(surface) in blocked:
            continue
        if any(not (end <= t.start or start >= t.end) for t in taken):
            continue
        found.append(EntityMention(start, end, NodeKind.ENTITY_PERSON, surface, 0.5))
    return found


def attach_entities(
    graph: Graph,
    node_id: int,
    mentions: list[EntityMention],
    index: InvertedIndex,
    entity_cache: dict[tuple[int, NodeKind, str], int] | None = None,
) -> list[tuple[int, int]]:
    """Create entity children for the given mentions.

    Entity nodes are unified per label within the dataset, so the same name
    mentioned in several sentences of one source converges on one node. The
    connecting edge is a data edge labeled by the entity kind, carrying the
    mention confidence. Idempotent: an existing (entity, edge) pair is
    returned instead of duplicated. Entity labels are not scanned again for
    further entities.

    Returns (entity node id, edge id) per mention, new entities first seen.
    ``entity_cache`` lets the registration pipeline share its unification
    table; without one, existing entities are found by scanning the graph.
    Representative assignment for new entity nodes is the caller's job.
    """
    parent = graph.node(node_id)
    created: list[tuple[int, int]] = []
    for mention in mentions:
        edge_label = EXTRACT_LABELS[mention.kind]
        key = (parent.dataset, mention.kind, mention.surface)
        entity_id = None
        if entity_cache is not None:
            entity_id = entity_cache.get(key)
        else:
            for other in graph.nodes.values():
                if (other.dataset, other.kind, other.label) == key:
                    entity_id = other.id
                    break
        if entity_id is None:
            entity_id = graph.add_node(mention.kind, mention.surface, parent.dataset)
            index.index_node(graph, entity_id)
            if entity_cache is not None:
                entity_cache[key] = entity_id
        edge_id = None
        for edge in graph.out_edges(node_id):
            if edge.target == entity_id and edge.label == edge_label:
                edge_id = edge.id
                break
        if edge_id is None:
            edge_id = graph.add_edge(node_id, entity_id, edge_label, mention.confidence)
            specificity.init_specificity(graph, edge_id)
        created.append((entity_id, edge_id))
    return created
