"""Incremental maintenance of edge specificity.

Specificity of a data edge is 2 / (same-label edges out of the source's
equivalence set + same-label edges into the target's equivalence set). It is
1.0 for an edge that is unique on both sides and shrinks as the edge stops
standing out. Counters are kept on each edge and reconciled in place when an
edge is inserted or when a node joins an equivalence set, so registration
never re-traverses previously loaded datasets; ``specificity_naive`` is the
full-recount oracle used to validate the incremental path.

Virtual sameAs edges and similarity edges are outside the metric and carry a
fixed specificity of 1.0.
"""

from __future__ import annotations

from .errors import GraphError
from .graph import Edge, EdgeKind, Graph


def _recompute(edge: Edge) -> None:
    edge.specificity = 2.0 / (edge.n_out + edge.n_in)


def _set_edges(graph: Graph, rep: int, label: str, incoming: bool) -> list[Edge]:
    """All same-label data edges incoming to (or outgoing from) a set."""
    edges = []
    for member in graph.members_of(rep):
        pool = graph.in_edges(member) if incoming else graph.out_edges(member)
        for edge in pool:
            if edge.kind is EdgeKind.DATA and edge.label == label:
                edges.append(edge)
    return edges


def init_specificity(graph: Graph, edge_id: int) -> None:
    """Initialize counters for a freshly inserted data edge.

    Bumps the label tallies of both endpoint sets and refreshes every sibling
    edge that shares the (source set, label) or (target set, label) pair, so
    all of them agree with the new counts.
    """
    edge = graph.edge(edge_id)
    if edge.kind is not EdgeKind.DATA:
        edge.n_in = 1
        edge.n_out = 1
        edge.specificity = 1.0
        return
    src_rep = graph.representative(edge.source)
    tgt_rep = graph.representative(edge.target)
    out_count = graph.bump_tally(src_rep, edge.label, incoming=False)
    in_count = graph.bump_tally(tgt_rep, edge.label, incoming=True)
    for sibling in _set_edges(graph, src_rep, edge.label, incoming=False):
        sibling.n_out = out_count
        _recompute(sibling)
    for sibling in _set_edges(graph, tgt_rep, edge.label, incoming=True):
        sibling.n_in = in_count
        _recompute(sibling)


def join_equivalence_set(graph: Graph, rep: int, node_id: int) -> set[int]:
    """Merge ``node_id`` (a lone, self-representing node) into ``rep``'s set.

    Applies the incremental update per label: when both sides have same-label
    edges on the same orientation, each edge's counter absorbs the other
    side's contribution; when either side has none, the other side's edges
    are untouched. Returns the ids of every edge whose specificity changed.
    """
    node = graph.node(node_id)
    if node.rep != node_id:
        raise GraphError(f"node {node_id} already joined {node.rep}")
    if len(graph.members_of(node_id)) > 1:
        raise GraphError(f"node {node_id} represents other nodes; sets cannot merge")
    if graph.representative(rep) != rep:
        raise GraphError(f"{rep} is not a representative")

    changed: set[int] = set()
    # Tallies of the joining node, removed from its dissolving singleton set.
    contributions = graph.drop_tallies(node_id)
    for incoming in (True, False):
        labels = {label for (label, inc) in contributions if inc is incoming}
        labels.update(
            label
            for (label, inc), count in _tallies_of(graph, rep).items()
            if inc is incoming
        )
        for label in sorted(labels):
            set_count = graph.tally(rep, label, incoming)
            node_count = contributions.get((label, incoming), 0)
            if set_count and node_count:
                # Same-label edges on both sides: every affected edge absorbs
                # the count it did not yet reflect.
                for edge in _set_edges(graph, rep, label, incoming):
                    _absorb(edge, node_count, incoming)
                    changed.add(edge.id)
                for edge in _node_edges(graph, node_id, label, incoming):
                    _absorb(edge, set_count, incoming)
                    changed.add(edge.id)
            if node_count:
                graph.bump_tally(rep, label, incoming, delta=node_count)
    graph.set_representative(node_id, rep)
    return changed


def _absorb(edge: Edge, delta: int, incoming: bool) -> None:
    if incoming:
        edge.n_in += delta
    else:
        edge.n_out += delta
    _recompute(edge)


def _node_edges(graph: Graph, node_id: int, label: str, incoming: bool) -> list[Edge]:
    pool = graph.in_edges(node_id) if incoming else graph.out_edges(node_id)
    return [e for e in pool if e.kind is EdgeKind.DATA and e.label == label]


def _tallies_of(graph: Graph, rep: int) -> dict[tuple[str, bool], int]:
    es = graph.equivalence_set(rep)
    result: dict[tuple[str, bool], int] = {}
    for label, count in es.in_count.items():
        result[(label, True)] = count
    for label, count in es.out_count.items():
        result[(label, False)] = count
    return result


def specificity_naive(graph: Graph, edge_id: int) -> float:
    """Recount specificity from scratch; the testing oracle.

    Walks the current equivalence sets of both endpoints and counts their
    same-label data edges, ignoring all stored counters.
    """
    edge = graph.edge(edge_id)
    if edge.kind is not EdgeKind.DATA:
        return 1.0
    out_count = 0
    for member in graph.members_of(graph.representative(edge.source)):
        for e in graph.out_edges(member):
            if e.kind is EdgeKind.DATA and e.label == edge.label:
                out_count += 1
    in_count = 0
    for member in graph.members_of(graph.representative(edge.target)):
        for e in graph.in_edges(member):
            if e.kind is EdgeKind.DATA and e.label == edge.label:
                in_count += 1
    return 2.0 / (out_count + in_count)
