"""Synthetic benchmark graphs with keywords at controlled positions.

Four families: a line (one answer, the whole path), a chain (a line with two
parallel edges per hop, answer count doubles per hop), a star (several lines
whose inner endpoints form one equivalence set, exercising the jump to the
representative), and a preferential-attachment random graph with hubs. All
generators are deterministic; randomness comes from a splitmix64 generator
with fixed constants so fixtures never drift across platforms.
"""

from __future__ import annotations

from collections import deque

from .corpus import Corpus
from .errors import ConfigError
from .graph import EdgeKind, NodeKind
from .specificity import init_specificity

_MASK = (1 << 64) - 1


class SplitMix64:
    """Tiny deterministic 64-bit generator (splitmix64 constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n


def _add_value(corpus: Corpus, label: str, dataset: int = 0, link: bool = False) -> int:
    node_id = corpus.graph.add_node(NodeKind.VALUE, label, dataset)
    corpus.index.index_node(corpus.graph, node_id)
    if link:
        corpus.linker.assign_representative(node_id)
    return node_id


def _add_data_edge(corpus: Corpus, src: int, tgt: int, label: str) -> int:
    edge_id = corpus.graph.add_edge(src, tgt, label, 1.0, EdgeKind.DATA)
    init_specificity(corpus.graph, edge_id)
    return edge_id


def gen_line(n: int) -> Corpus:
    """Path of n nodes, one edge per hop; keywords at the two ends."""
    if n < 2:
        raise ConfigError(f"line graph needs at least 2 nodes, got {n}")
    corpus = Corpus.new()
    labels = ["kwstart"] + [f"node{i}" for i in range(2, n)] + ["kwend"]
    ids = [_add_value(corpus, label) for label in labels]
    for a, b in zip(ids, ids[1:]):
        _add_data_edge(corpus, a, b, "next")
    corpus.graph.freeze()
    return corpus


def gen_chain(n: int) -> Corpus:
    """Like the line but with two parallel edges (labels "a", "b") per hop."""
    if n < 2:
        raise ConfigError(f"chain graph needs at least 2 nodes, got {n}")
    corpus = Corpus.new()
    labels = ["kwstart"] + [f"node{i}" for i in range(2, n)] + ["kwend"]
    ids = [_add_value(corpus, label) for label in labels]
    for a, b in zip(ids, ids[1:]):
        _add_data_edge(corpus, a, b, "a")
        _add_data_edge(corpus, a, b, "b")
    corpus.graph.freeze()
    return corpus


def gen_star(branches: int, branch_len: int) -> Corpus:
    """Lines joined through an equivalence set of their inner endpoints.

    Each branch lives in its own dataset; the inner endpoints all carry the
    label "hub", so representative assignment fuses them into one set whose
    representative is the first branch's hub. Branch b's outer endpoint is
    labeled "kw{b}" (1-based).
    """
    if branches < 2 or branch_len < 2:
        raise ConfigError(f"star needs branches >= 2 and branch_len >= 2")
    corpus = Corpus.new()
    for b in range(1, branches + 1):
        dataset = b - 1
        ids = []
        for i in range(1, branch_len + 1):
            if i == 1:
                label = f"kw{b}"
            elif i == branch_len:
                label = "hub"
            else:
                label = f"b{b}n{i}"
            ids.append(_add_value(corpus, label, dataset, link=True))
        for a, c in zip(ids, ids[1:]):
            _add_data_edge(corpus, a, c, "next")
    corpus.graph.freeze()
    return corpus


def _ba_structure(n: int, m0: int, seed: int) -> list[tuple[int, int]]:
    """Edge list: connected seed ring, then one preferential edge per node."""
    rng = SplitMix64(seed)
    edges = [(i, (i + 1) % m0) for i in range(m0)]
    ball: list[int] = []
    for a, b in edges:
        ball.extend((a, b))
    for node in range(m0, n):
        target = ball[rng.below(len(ball))]
        edges.append((node, target))
        ball.extend((node, target))
    return edges


def _bfs_distances(n: int, edges: list[tuple[int, int]], start: int) -> list[int]:
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    dist = [-1] * n
    dist[start] = 0
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for other in adjacency[node]:
            if dist[other] < 0:
                dist[other] = dist[node] + 1
                queue.append(other)
    return dist


def ba_keyword_pair(n: int, m0: int, seed: int, distance: int) -> tuple[int, int] | None:
    """Two node ids of the structure exactly ``distance`` apart, or None.

    Found by breadth-first search from an eccentric node (two-sweep), so
    larger distances stay reachable when the graph allows them.
    """
    edges = _ba_structure(n, m0, seed)
    dist0 = _bfs_distances(n, edges, 0)
    far = max(range(n), key=lambda i: (dist0[i], -i))
    dist = _bfs_distances(n, edges, far)
    for node in range(n):
        if dist[node] == distance:
            return far, node
    return None


def gen_ba(n: int, m0: int, seed: int, kw_distance: int | None = None) -> Corpus:
    """Preferential-attachment graph: m0-node seed ring, then every new node
    attaches with one edge to a degree-weighted existing node.

    With ``kw_distance``, two nodes that far apart are labeled "kwstart" and
    "kwend" instead of their positional labels.
    """
    if m0 < 2 or n <= m0:
        raise ConfigError(f"need n > m0 >= 2, got n={n} m0={m0}")
    edges = _ba_structure(n, m0, seed)
    labels = [f"node{i}" for i in range(n)]
    if kw_distance is not None:
        pair = ba_keyword_pair(n, m0, seed, kw_distance)
        if pair is None:
            raise ConfigError(f"no node pair at distance {kw_distance} (seed {seed})")
        labels[pair[0]] = "kwstart"
        labels[pair[1]] = "kwend"
    corpus = Corpus.new()
    ids = [_add_value(corpus, label) for label in labels]
    for a, b in edges:
        _add_data_edge(corpus, ids[a], ids[b], "link")
    corpus.graph.freeze()
    return corpus
