"""Answer scoring: keyword match quality plus connection quality.

The total is a weighted sum of three components: the mean similarity between
each query keyword and the label of the node matching it, the product of edge
confidences (uncertainty multiplies), and the product of edge specificities
(many unspecific hops multiply down). Weights alpha and beta are free
parameters with 0 <= alpha, beta < 1 and alpha + beta <= 1; the remainder
weighs the specificity product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ConfigError
from .graph import Graph, SameAs
from .linking import label_similarity


@dataclass(frozen=True)
class ScoreParams:
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha < 1.0 and 0.0 <= self.beta < 1.0):
            raise ConfigError(f"alpha and beta must be in [0, 1): {self.alpha}, {self.beta}")
        if self.alpha + self.beta > 1.0:
            raise ConfigError(f"alpha + beta must not exceed 1: {self.alpha} + {self.beta}")


@dataclass(frozen=True)
class ScoreBreakdown:
    ms: float
    conf_prod: float
    spec_prod: float
    total: float


def matching_score(
    graph: Graph, matched: Mapping[str, Iterable[int]], keywords: Iterable[str]
) -> float:
    """Mean keyword-to-label similarity over the query keywords.

    ``matched`` maps each keyword to the node(s) matching it; with several
    (equivalent) matches the best similarity counts.
    """
    keywords = list(keywords)
    total = 0.0
    for keyword in keywords:
        nodes = list(matched.get(keyword, ()))
        if not nodes:
            raise ConfigError(f"keyword {keyword!r} has no matched node")
        total += max(label_similarity(graph.node(n).label, keyword) for n in nodes)
    return total / len(keywords)


def connection_score(graph: Graph, edges: Iterable["int | SameAs"]) -> tuple[float, float]:
    """(confidence product, specificity product); empty products are 1.0."""
    conf = 1.0
    spec = 1.0
    for ref in edges:
        if isinstance(ref, SameAs):
            continue  # virtual equivalence edges carry confidence and specificity 1.0
        edge = graph.edge(ref)
        conf *= edge.confidence
        spec *= edge.specificity
    return conf, spec


def score(
    graph: Graph,
    edges: Iterable["int | SameAs"],
    matched: Mapping[str, Iterable[int]],
    keywords: Iterable[str],
    params: ScoreParams = ScoreParams(),
) -> ScoreBreakdown:
    ms = matching_score(graph, matched, keywords)
    conf_prod, spec_prod = connection_score(graph, edges)
    total = params.alpha * ms + params.beta * conf_prod + (1.0 - params.alpha - params.beta) * spec_prod
    return ScoreBreakdown(ms, conf_prod, spec_prod, total)
