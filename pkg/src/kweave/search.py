"""Top-k keyword search over the integrated graph.

Answers are minimal trees of undirected-traversed edges covering every query
keyword. The searcher grows partial trees edge by edge away from keyword
matches, jumps from a node to its representative in one step, and eagerly
merges trees that meet at a common root while matching disjoint keyword
subsets. A priority queue drives exploration toward trees that match many
keywords, are small, and extend over specific edges; search stops when the
queue drains, a timeout passes, or enough answers accumulate.

``brute_force_answers`` enumerates every connected acyclic edge subset and
filters it through the same minimality test; it is the oracle the searcher
is validated against on small graphs.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

from .errors import ConfigError, GraphError
from .graph import EdgeKind, Graph, SameAs
from .indexing import InvertedIndex
from .scoring import ScoreBreakdown, ScoreParams, score

EdgeRef = "int | SameAs"

MAX_KEYWORDS = 16
DEFAULT_TIMEOUT_MS = 120_000.0


@dataclass(frozen=True)
class Query:
    keywords: tuple[str, ...]
    k: int = 10
    timeout_ms: float | None = DEFAULT_TIMEOUT_MS
    max_answers: int | None = None  # defaults to max(100, 10k); None here means "derive"
    params: ScoreParams = field(default_factory=ScoreParams)
    unlimited: bool = False  # no answer cap at all (oracle mode)

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ConfigError("query needs at least one keyword")
        if len(self.keywords) > MAX_KEYWORDS:
            raise ConfigError(f"at most {MAX_KEYWORDS} keywords supported")
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.max_answers is not None and self.max_answers < self.k:
            raise ConfigError("max_answers must be at least k")

    @property
    def answer_cap(self) -> int | None:
        if self.unlimited:
            return None
        if self.max_answers is not None:
            return self.max_answers
        return max(100, 10 * self.k)


def edge_identity(ref: EdgeRef) -> tuple:
    """Order-stable identity of an edge reference.

    Stored edges are identified by id, virtual equivalence edges by their
    node pair, so an answer's identity never depends on traversal direction.
    """
    if isinstance(ref, SameAs):
        return ("s", ref.a, ref.b)
    return ("e", ref)


def canonical_key(edges: frozenset, root: int) -> tuple:
    if edges:
        return tuple(sorted(edge_identity(e) for e in edges))
    return (("node", root),)


class PartialTree:
    """An explored tree: edge set, node set, current root, keyword matches.

    The exploration key pairs the canonical edge set with the root: the same
    edge set rooted differently offers different growth steps, and collapsing
    them can strand an answer behind a dead-end root. Only finished answers
    are root-blind.
    """

    __slots__ = ("edges", "nodes", "root", "matched", "key")

    def __init__(
        self,
        edges: frozenset,
        nodes: frozenset,
        root: int,
        matched: dict[str, frozenset[int]],
    ):
        self.edges = edges
        self.nodes = nodes
        self.root = root
        self.matched = matched
        self.key = (canonical_key(edges, root), root)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"PartialTree(root={self.root}, edges={sorted(map(edge_identity, self.edges))})"


@dataclass(frozen=True)
class Answer:
    edges: frozenset
    nodes: frozenset
    matched: dict[str, frozenset[int]]
    canonical: tuple
    breakdown: ScoreBreakdown

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sameas_edges(self) -> list[SameAs]:
        return sorted(e for e in self.edges if isinstance(e, SameAs))


@dataclass
class SearchResult:
    answers: list[Answer]
    total_found: int
    trees_explored: int
    time_first_ms: float | None
    time_total_ms: float
    timed_out: bool
    keyword_matches: dict[str, int]

    @property
    def diagnostics(self) -> list[str]:
        return [
            f"keyword {kw!r} matched no node" for kw, n in self.keyword_matches.items() if n == 0
        ]


# ---------------------------------------------------------------------------
# tree operations
# ---------------------------------------------------------------------------


def _extend_matched(
    matched: dict[str, frozenset[int]], node: int, node_keywords: frozenset[str]
) -> dict[str, frozenset[int]]:
    if not node_keywords:
        return matched
    extended = dict(matched)
    for kw in node_keywords:
        extended[kw] = extended.get(kw, frozenset()) | {node}
    return extended


def _matches_stay_equivalent(
    graph: Graph,
    matched: dict[str, frozenset[int]],
    node: int,
    node_keywords: frozenset[str],
) -> bool:
    """Minimality condition: multiple matches of one keyword must be
    equivalent nodes (same representative)."""
    if not node_keywords:
        return True
    rep = graph.representative(node)
    for kw in node_keywords:
        for other in matched.get(kw, ()):
            if graph.representative(other) != rep:
                return False
    return True


def grow(graph: Graph, tree: PartialTree, edge_id: int, node_keywords) -> PartialTree | None:
    """Extend the tree over a data or similarity edge adjacent to its root.

    Returns the new tree rooted at the edge's other endpoint, or None when
    the step closes a cycle or produces non-equivalent matches of one
    keyword (both mean "skip this step", not an error).
    """
    edge = graph.edge(edge_id)
    if edge.source == tree.root:
        other = edge.target
    elif edge.target == tree.root:
        other = edge.source
    else:
        raise GraphError(f"edge {edge_id} is not adjacent to root {tree.root}")
    if other in tree.nodes:
        return None
    kws = node_keywords(other)
    if not _matches_stay_equivalent(graph, tree.matched, other, kws):
        return None
    return PartialTree(
        tree.edges | {edge_id},
        tree.nodes | {other},
        other,
        _extend_matched(tree.matched, other, kws),
    )


def grow_to_rep(graph: Graph, tree: PartialTree, node_keywords) -> PartialTree | None:
    """Jump from the tree's root to that root's representative.

    A single equivalence step: the new root represents itself, so the move
    never chains. Returns None when the root already is its representative,
    the representative is already inside the tree, or matches would stop
    being equivalent.
    """
    rep = graph.representative(tree.root)
    if rep == tree.root or rep in tree.nodes:
        return None
    kws = node_keywords(rep)
    if not _matches_stay_equivalent(graph, tree.matched, rep, kws):
        return None
    return PartialTree(
        tree.edges | {SameAs.between(tree.root, rep)},
        tree.nodes | {rep},
        rep,
        _extend_matched(tree.matched, rep, kws),
    )


def merge(tree_a: PartialTree, tree_b: PartialTree) -> PartialTree | None:
    """Fuse two trees sharing only their root and matching disjoint keywords."""
    if tree_a.root != tree_b.root:
        return None
    if tree_a.nodes & tree_b.nodes != {tree_a.root}:
        return None
    if tree_a.matched.keys() & tree_b.matched.keys():
        return None
    matched = dict(tree_a.matched)
    matched.update(tree_b.matched)
    return PartialTree(
        tree_a.edges | tree_b.edges,
        tree_a.nodes | tree_b.nodes,
        tree_a.root,
        matched,
    )


# ---------------------------------------------------------------------------
# answer shape checks
# ---------------------------------------------------------------------------


def _tree_adjacency(graph: Graph, edges: frozenset) -> dict[int, list[tuple]]:
    adjacency: dict[int, list[tuple]] = {}
    for ref in edges:
        if isinstance(ref, SameAs):
            a, b = ref.a, ref.b
        else:
            e = graph.edge(ref)
            a, b = e.source, e.target
        adjacency.setdefault(a, []).append((ref, b))
        adjacency.setdefault(b, []).append((ref, a))
    return adjacency


def _component(
    adjacency: dict[int, list[tuple]], start: int, banned: EdgeRef
) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for ref, other in adjacency.get(node, ()):
            if ref == banned or other in seen:
                continue
            seen.add(other)
            stack.append(other)
    return seen


def is_minimal_answer(
    graph: Graph,
    edges: frozenset,
    nodes: frozenset,
    matched: dict[str, frozenset[int]],
    keywords: tuple[str, ...],
) -> bool:
    """Full minimality test for a tree covering every keyword.

    Checks that every leaf matches a keyword, that no edge can be removed
    while one side still covers the whole query, and that multiple matches
    of one keyword are pairwise equivalent.
    """
    for kw in keywords:
        if not matched.get(kw):
            return False
    for kw, group in matched.items():
        reps = {graph.representative(n) for n in group}
        if len(reps) > 1:
            return False
    if not edges:
        return len(nodes) == 1
    adjacency = _tree_adjacency(graph, edges)
    matching_nodes = set()
    for group in matched.values():
        matching_nodes |= group
    for node in nodes:
        if len(adjacency.get(node, ())) == 1 and node not in matching_nodes:
            return False  # leaf contributing no keyword
    for ref in edges:
        if isinstance(ref, SameAs):
            a = ref.a
        else:
            a = graph.edge(ref).source
        side = _component(adjacency, a, ref)
        for part in (side, set(nodes) - side):
            if all(matched[kw] & part for kw in keywords):
                return False  # a proper subtree still covers the query
    return True


def postprocess(
    graph: Graph, edges: frozenset, nodes: frozenset, matched: dict[str, frozenset[int]]
) -> tuple[frozenset, frozenset]:
    """Replace a star of equivalence edges through an unmatched hub by a chain.

    A representative that the search dragged in only as an equivalence
    junction (no data or similarity edge, no keyword match of its own) is
    removed and its set members are reconnected in node-id order, which
    leaves one equivalence edge fewer and no redundant equivalence path.
    """
    matching_nodes = set()
    for group in matched.values():
        matching_nodes |= group
    edges = set(edges)
    nodes = set(nodes)
    changed = True
    while changed:
        changed = False
        adjacency = _tree_adjacency(graph, frozenset(edges))
        for node in sorted(nodes):
            incident = adjacency.get(node, [])
            if len(incident) < 2 or node in matching_nodes:
                continue
            if not all(isinstance(ref, SameAs) for ref, _ in incident):
                continue
            partners = sorted(other for _, other in incident)
            for ref, _ in incident:
                edges.discard(ref)
            nodes.discard(node)
            for a, b in zip(partners, partners[1:]):
                edges.add(SameAs.between(a, b))
            changed = True
            break
    return frozenset(edges), frozenset(nodes)


def max_adjacent_sameas(edges: frozenset) -> int:
    """Size of the largest connected group of equivalence edges in a tree."""
    sameas = [e for e in edges if isinstance(e, SameAs)]
    if not sameas:
        return 0
    adjacency: dict[int, list[SameAs]] = {}
    for ref in sameas:
        adjacency.setdefault(ref.a, []).append(ref)
        adjacency.setdefault(ref.b, []).append(ref)
    remaining = set(sameas)
    best = 0
    while remaining:
        seed = remaining.pop()
        group = {seed}
        stack = [seed.a, seed.b]
        while stack:
            node = stack.pop()
            for ref in adjacency.get(node, ()):
                if ref in remaining:
                    remaining.discard(ref)
                    group.add(ref)
                    stack.extend((ref.a, ref.b))
        best = max(best, len(group))
    return best


def has_redundant_sameas_path(graph: Graph, edges: frozenset) -> bool:
    """True when some node sits inside an equivalence path with no other edge."""
    adjacency = _tree_adjacency(graph, edges)
    for node, incident in adjacency.items():
        sameas = [ref for ref, _ in incident if isinstance(ref, SameAs)]
        if len(sameas) >= 2 and len(sameas) == len(incident):
            return True
    return False


# ---------------------------------------------------------------------------
# the searcher
# ---------------------------------------------------------------------------


class _Searcher:
    def __init__(self, graph: Graph, index: InvertedIndex, query: Query):
        self.graph = graph
        self.index = index
        self.query = query
        # Keyword list as typed, deduplicated, order-preserving.
        self.keywords = tuple(dict.fromkeys(query.keywords))
        self.node_keywords: dict[int, frozenset[str]] = {}
        self.keyword_nodes: dict[str, list[int]] = {}
        for kw in self.keywords:
            hits = index.lookup(graph, kw)
            self.keyword_nodes[kw] = sorted(hits)
            for node_id in hits:
                self.node_keywords[node_id] = self.node_keywords.get(
                    node_id, frozenset()
                ) | {kw}
        self.explored: set[tuple] = set()
        self.by_matched: dict[frozenset[str], list[PartialTree]] = {}
        self.frontier: list = []
        self._push_seq = itertools.count()
        self.answers: dict[tuple, Answer] = {}
        self.started = 0.0
        self.first_answer_at: float | None = None
        self.timed_out = False

    # -- helpers -----------------------------------------------------------

    def _node_kws(self, node_id: int) -> frozenset[str]:
        return self.node_keywords.get(node_id, frozenset())

    def _covers_all(self, tree: PartialTree) -> bool:
        return len(tree.matched) == len(self.keywords)

    def _emit(self, tree: PartialTree) -> None:
        edges, nodes = postprocess(self.graph, tree.edges, tree.nodes, tree.matched)
        canonical = canonical_key(edges, tree.root)
        if canonical in self.answers:
            return
        breakdown = score(self.graph, edges, tree.matched, self.keywords, self.query.params)
        self.answers[canonical] = Answer(edges, nodes, dict(tree.matched), canonical, breakdown)
        if self.first_answer_at is None:
            self.first_answer_at = time.monotonic()

    def _process(self, tree: PartialTree) -> PartialTree | None:
        """Record a candidate tree; returns it when it was new.

        New full-coverage trees are checked for minimality and emitted;
        non-answer trees become merge candidates keyed by their matched
        keyword subset.
        """
        if tree.key in self.explored:
            return None
        self.explored.add(tree.key)
        if self._covers_all(tree):
            if is_minimal_answer(self.graph, tree.edges, tree.nodes, tree.matched, self.keywords):
                self._emit(tree)
            return tree
        self.by_matched.setdefault(frozenset(tree.matched), []).append(tree)
        return tree

    def _push_opportunities(self, tree: PartialTree) -> None:
        if self._covers_all(tree):
            return  # answers (and full-coverage trees) cannot extend into answers
        matched_count = len(tree.matched)
        node_count = len(tree.nodes)
        for edge in self.graph.out_edges(tree.root) + self.graph.in_edges(tree.root):
            other = edge.target if edge.source == tree.root else edge.source
            if other in tree.nodes:
                continue
            if not _matches_stay_equivalent(
                self.graph, tree.matched, other, self._node_kws(other)
            ):
                continue
            priority = (
                -matched_count,
                node_count,
                -edge.specificity,
                tree.key,
                edge_identity(edge.id),
            )
            heapq.heappush(self.frontier, (priority, next(self._push_seq), tree, edge.id))
        rep = self.graph.representative(tree.root)
        if rep != tree.root and rep not in tree.nodes:
            if _matches_stay_equivalent(self.graph, tree.matched, rep, self._node_kws(rep)):
                ref = SameAs.between(tree.root, rep)
                priority = (
                    -matched_count,
                    node_count,
                    -1.0,
                    tree.key,
                    edge_identity(ref),
                )
                heapq.heappush(self.frontier, (priority, next(self._push_seq), tree, ref))

    def _aggressive_merge(self, tree: PartialTree) -> list[PartialTree]:
        products = []
        snapshot = [
            (subset, list(trees))
            for subset, trees in self.by_matched.items()
            if not subset & tree.matched.keys()
        ]
        for _subset, trees in snapshot:
            for candidate in trees:
                if candidate.root != tree.root:
                    continue
                merged = merge(tree, candidate)
                if merged is None:
                    continue
                result = self._process(merged)
                if result is not None:
                    products.append(result)
        return products

    def _out_of_budget(self) -> bool:
        cap = self.query.answer_cap
        if cap is not None and len(self.answers) >= cap:
            return True
        if self.query.timeout_ms is not None:
            if (time.monotonic() - self.started) * 1000.0 >= self.query.timeout_ms:
                self.timed_out = True
                return True
        return False

    # -- main loop ----------------------------------------------------------

    def run(self) -> SearchResult:
        self.started = time.monotonic()
        counts = {kw: len(self.keyword_nodes[kw]) for kw in self.keywords}
        if any(count == 0 for count in counts.values()):
            return self._result(counts)

        seeds: list[PartialTree] = []
        for kw in self.keywords:
            for node_id in self.keyword_nodes[kw]:
                tree = PartialTree(
                    frozenset(),
                    frozenset({node_id}),
                    node_id,
                    {w: frozenset({node_id}) for w in self._node_kws(node_id)},
                )
                result = self._process(tree)
                if result is not None:
                    seeds.append(result)

        # Initial merge pass over the seeds. Two one-node trees only share a
        # root when they are the same tree, so this fires rarely; kept for
        # symmetry with the replenishment step.
        for tree_a, tree_b in itertools.combinations(seeds, 2):
            merged = merge(tree_a, tree_b)
            if merged is not None:
                self._process(merged)

        for tree in seeds:
            self._push_opportunities(tree)

        while self.frontier and not self._out_of_budget():
            _priority, _seq, tree, ref = heapq.heappop(self.frontier)
            if isinstance(ref, SameAs):
                new_tree = grow_to_rep(self.graph, tree, self._node_kws)
            else:
                new_tree = grow(self.graph, tree, ref, self._node_kws)
            if new_tree is None:
                continue
            result = self._process(new_tree)
            if result is None:
                continue
            fresh = [result]
            if not self._covers_all(result):
                fresh.extend(self._aggressive_merge(result))
            for produced in fresh:
                self._push_opportunities(produced)

        return self._result(counts)

    def _result(self, counts: dict[str, int]) -> SearchResult:
        finished = time.monotonic()
        ranked = sorted(
            self.answers.values(),
            key=lambda a: (-a.breakdown.total, len(a.edges), a.canonical),
        )
        return SearchResult(
            answers=ranked[: self.query.k],
            total_found=len(self.answers),
            trees_explored=len(self.explored),
            time_first_ms=(
                (self.first_answer_at - self.started) * 1000.0
                if self.first_answer_at is not None
                else None
            ),
            time_total_ms=(finished - self.started) * 1000.0,
            timed_out=self.timed_out,
            keyword_matches=counts,
        )


def search(graph: Graph, index: InvertedIndex, query: Query) -> SearchResult:
    """Run one keyword search over a frozen graph snapshot."""
    return _Searcher(graph, index, query).run()


def all_answers(graph: Graph, index: InvertedIndex, keywords: tuple[str, ...],
                params: ScoreParams | None = None) -> SearchResult:
    """Exhaustive search: no timeout, no answer cap, every answer ranked."""
    query = Query(
        keywords=tuple(keywords),
        k=10**9,
        timeout_ms=None,
        params=params or ScoreParams(),
        unlimited=True,
    )
    return search(graph, index, query)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


def brute_force_answers(
    graph: Graph,
    index: InvertedIndex,
    keywords: tuple[str, ...],
    params: ScoreParams | None = None,
    max_edges: int = 12,
    guard: int = 1 << 20,
) -> dict[tuple, Answer]:
    """All minimal answers by exhaustive enumeration of connected acyclic
    edge subsets (data, similarity and virtual equivalence edges alike).

    Enumeration is anchored on the nodes matching the scarcest keyword:
    every answer must contain one, so subtrees elsewhere are never visited.
    Only safe on small graphs; raises once more than ``guard`` subtrees are
    generated. Returns answers keyed by canonical edge identity.
    """
    params = params or ScoreParams()
    keywords = tuple(dict.fromkeys(keywords))
    node_keywords: dict[int, frozenset[str]] = {}
    match_sets: dict[str, set[int]] = {}
    for kw in keywords:
        hits = set(index.lookup(graph, kw))
        match_sets[kw] = hits
        for node_id in hits:
            node_keywords[node_id] = node_keywords.get(node_id, frozenset()) | {kw}
    if any(not hits for hits in match_sets.values()):
        return {}
    anchor_nodes = sorted(min(match_sets.values(), key=lambda s: (len(s), sorted(s))))

    incident: dict[int, list[tuple]] = {n: [] for n in graph.nodes}
    for edge in graph.edges.values():
        incident[edge.source].append((edge.id, edge.target))
        incident[edge.target].append((edge.id, edge.source))
    for rep, members in ((r, graph.members_of(r)) for r in sorted(graph.nodes)):
        for member in members:
            if member != rep:
                ref = SameAs.between(member, rep)
                incident[rep].append((ref, member))
                incident[member].append((ref, rep))

    answers: dict[tuple, Answer] = {}

    def consider(edges: frozenset, nodes: frozenset) -> None:
        matched = {}
        for kw in keywords:
            inside = frozenset(n for n in nodes if kw in node_keywords.get(n, ()))
            if not inside:
                return
            matched[kw] = inside
        if not is_minimal_answer(graph, edges, nodes, matched, keywords):
            return
        new_edges, new_nodes = postprocess(graph, edges, nodes, matched)
        canonical = canonical_key(new_edges, min(new_nodes))
        if canonical in answers:
            return
        breakdown = score(graph, new_edges, matched, keywords, params)
        answers[canonical] = Answer(new_edges, new_nodes, matched, canonical, breakdown)

    seen: set = set()
    frontier: list[tuple[frozenset, frozenset]] = []
    for node_id in anchor_nodes:
        tree = (frozenset(), frozenset({node_id}))
        frontier.append(tree)
        seen.add(("node", node_id))
        consider(*tree)
    produced = len(frontier)
    while frontier:
        edges, nodes = frontier.pop()
        if len(edges) >= max_edges:
            continue
        for node in nodes:
            for ref, other in incident[node]:
                if other in nodes:
                    continue
                new_edges = edges | {ref}
                key = canonical_key(new_edges, 0)
                if key in seen:
                    continue
                seen.add(key)
                produced += 1
                if produced > guard:
                    raise GraphError(f"brute force enumeration exceeded {guard} subtrees")
                new_tree = (new_edges, nodes | {other})
                frontier.append(new_tree)
                consider(*new_tree)
    return answers


# ---------------------------------------------------------------------------
# answer serialization
# ---------------------------------------------------------------------------


def answer_to_dict(graph: Graph, answer: Answer) -> dict:
    """JSON-ready form of one answer (schema used by the CLI)."""
    edges = []
    for identity in answer.canonical:
        if identity[0] == "s":
            _, a, b = identity
            edges.append(
                {"src": a, "tgt": b, "label": "sameAs", "kind": "sameas", "conf": 1.0}
            )
        elif identity[0] == "e":
            edge = graph.edge(identity[1])
            edges.append(
                {
                    "src": edge.source,
                    "tgt": edge.target,
                    "label": edge.label,
                    "kind": edge.kind.value,
                    "conf": edge.confidence,
                }
            )
    matches = {kw: min(nodes) for kw, nodes in answer.matched.items()}
    return {
        "score": answer.breakdown.total,
        "ms": answer.breakdown.ms,
        "conf": answer.breakdown.conf_prod,
        "spec": answer.breakdown.spec_prod,
        "edges": edges,
        "matches": matches,
    }
