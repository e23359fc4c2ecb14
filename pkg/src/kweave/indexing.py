"""Label tokenization and the inverted keyword index.

Labels are NFC-normalized, lowercased, split on non-alphanumeric separators
(URIs additionally on their structural separators, with scheme/TLD noise
dropped so the registrable domain words survive), filtered against a stopword
list, and stemmed. The index maps each resulting keyword to the sorted node
ids whose label contains it; it is derived state, rebuilt from the graph file
byte-identically.
"""

from __future__ import annotations

import io
import json
import os
import re
import unicodedata
from importlib import resources
from typing import Callable, Iterable

from .errors import GraphFormatError
from .graph import Graph, NodeKind

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_URI_SEP_RE = re.compile(r"[/#:?&.\-_]+")

# Tokens that carry no signal in URIs: schemes, the www label, and common
# top-level domains. Dropping them keeps the registrable domain's own name.
_URI_NOISE = frozenset(
    "http https ftp ftps mailto urn www com org net edu gov mil int io fr de uk".split()
)

MIN_TOKEN_LEN = 2


def plural_stem(token: str) -> str:
    """Conservative plural stripping.

    Only undoes common English plural endings on words of length >= 4, so
    proper names and short tokens pass through untouched. Idempotent.
    """
    if len(token) < 4:
        return token
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("ies"):
        return token[:-3] + "y"
    if token.endswith("ss") or token.endswith("us") or token.endswith("is"):
        return token
    if token.endswith("s"):
        return token[:-1]
    return token


def identity_stem(token: str) -> str:
    return token


STEMMERS: dict[str, Callable[[str], str]] = {
    "plural": plural_stem,
    "none": identity_stem,
}


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).lower()


def load_stopwords(path: str | os.PathLike | None = None) -> frozenset[str]:
    """Read a stopword file (one token per line, '#' comments).

    Without a path, the list shipped with the package is used.
    """
    if path is None:
        text = resources.files("kweave.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(normalize(line))
    return frozenset(words)


class Tokenizer:
    def __init__(
        self,
        stopwords: frozenset[str] | None = None,
        stemmer: str | Callable[[str], str] = "plural",
    ):
        self.stopwords = load_stopwords() if stopwords is None else stopwords
        self.stem = STEMMERS[stemmer] if isinstance(stemmer, str) else stemmer

    def tokenize(self, label: str, kind: NodeKind = NodeKind.VALUE) -> set[str]:
        """Keywords of a label: split, drop stopwords and short tokens, stem."""
        text = normalize(label)
        if kind is NodeKind.URI:
            parts = [p for p in _URI_SEP_RE.split(text) if p]
            raw = []
            for part in parts:
                if part in _URI_NOISE:
                    continue
                raw.extend(_TOKEN_RE.findall(part))
        else:
            raw = _TOKEN_RE.findall(text)
        keywords = set()
        for token in raw:
            if len(token) < MIN_TOKEN_LEN or token in self.stopwords:
                continue
            stemmed = self.stem(token)
            # The stemmed form is checked too, else a token like "cans"
            # would emit the stopword "can" and break idempotence.
            if len(stemmed) < MIN_TOKEN_LEN or stemmed in self.stopwords:
                continue
            keywords.add(stemmed)
        return keywords

    def query_keyword(self, raw: str) -> str:
        """Normalize and stem one user-supplied query keyword."""
        return self.stem(normalize(raw.strip()))


class InvertedIndex:
    """Keyword -> node id postings over one graph."""

    def __init__(self, tokenizer: Tokenizer | None = None):
        self.tokenizer = tokenizer or Tokenizer()
        self._postings: dict[str, set[int]] = {}

    def index_node(self, graph: Graph, node_id: int) -> int:
        """Post every keyword of the node's label; returns postings added.

        Dataset nodes are skipped (they are structural, not matchable);
        do-not-link nodes are indexed normally, they only refuse links.
        """
        node = graph.node(node_id)
        if node.kind is NodeKind.DATASET or not node.label:
            return 0
        added = 0
        for keyword in self.tokenizer.tokenize(node.label, node.kind):
            bucket = self._postings.setdefault(keyword, set())
            if node_id not in bucket:
                bucket.add(node_id)
                added += 1
        return added

    def raw_postings(self, keyword: str) -> set[int]:
        """Postings for an already-stemmed keyword, without any correction."""
        return self._postings.get(keyword, set())

    def lookup(self, graph: Graph, raw_keyword: str) -> dict[int, float]:
        """Nodes matching a query keyword, with match similarity.

        Stems the keyword and returns stem-equal postings at similarity 1.0.
        When both a node and one of its extracted entity children match, only
        the child is kept: the parent's label contains the entity surface, so
        indexing both would double-count the same occurrence.
        """
        keyword = self.tokenizer.query_keyword(raw_keyword)
        hits = set(self._postings.get(keyword, ()))
        if not hits:
            return {}
        suppressed = set()
        for node_id in hits:
            for edge in graph.out_edges(node_id):
                if edge.label.startswith("extract:") and edge.target in hits:
                    suppressed.add(node_id)
                    break
        return {node_id: 1.0 for node_id in hits - suppressed}

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def persist(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            self.dump(fh)

    def dump(self, fh: io.TextIOBase) -> None:
        for keyword in sorted(self._postings):
            record = {"kw": keyword, "ids": sorted(self._postings[keyword])}
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike, tokenizer: Tokenizer | None = None) -> "InvertedIndex":
        index = cls(tokenizer)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    index._postings[record["kw"]] = set(record["ids"])
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise GraphFormatError(f"index line {lineno}: {exc}") from None
        return index

    @classmethod
    def build(cls, graph: Graph, tokenizer: Tokenizer | None = None) -> "InvertedIndex":
        """Rebuild the whole index from the graph's node labels."""
        index = cls(tokenizer)
        for node_id in sorted(graph.nodes):
            index.index_node(graph, node_id)
        return index

    def keywords(self) -> Iterable[str]:
        return self._postings.keys()

    def __len__(self) -> int:
        return len(self._postings)
