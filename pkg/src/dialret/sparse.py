"""Lexical analysis, inverted index and BM25 scoring.

The scoring function, for query weight w_t over matched documents d:

    score(q, d) = sum_t  w_t * idf(t) * tf(t,d) * (k1 + 1)
                          / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))

    idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))

which is non-negative for every df <= N. Plain token-list queries weight each
token occurrence by 1, so a repeated token contributes its occurrence count.
Documents whose score is 0 (no query term matches) are omitted from results.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from . import porter
from .corpus import Corpus
from .errors import ConfigError, DataError
from .ranking import ScoredList, top_k

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")


def default_stopwords() -> frozenset[str]:
    text = resources.files("dialret").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


@dataclass(frozen=True)
class Analyzer:
    """lowercase -> tokenize -> stopword removal -> Porter stemming.

    Stopwords are removed before stemming, so inflections of stopwords
    ("being", "willing") survive as content tokens.
    """

    lowercase: bool = True
    stem: bool = True
    stopwords: frozenset[str] = field(default_factory=default_stopwords)

    def __call__(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        tokens = _TOKEN_RE.findall(text)
        tokens = [t for t in tokens if t not in self.stopwords]
        if self.stem:
            tokens = [porter.stem(t) for t in tokens]
        return tokens


@dataclass(frozen=True)
class BM25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if not (self.k1 >= 0 and math.isfinite(self.k1)):
            raise ConfigError(f"k1 must be finite and >= 0, got {self.k1!r}")
        if not (0.0 <= self.b <= 1.0):
            raise ConfigError(f"b must be in [0, 1], got {self.b!r}")


class InvertedIndex:
    """Term -> postings list over an analyzed corpus.

    Postings are (doc_id, term_frequency) sorted by doc_id. Documents whose
    analysis comes out empty stay in the index with length 0; they simply
    never match.
    """

    def __init__(self, corpus: Corpus, analyzer: Analyzer):
        if len(corpus) == 0:
            raise DataError("cannot index an empty corpus")
        self.analyzer = analyzer
        self.postings: dict[str, list[tuple[str, int]]] = {}
        self.doc_terms: dict[str, dict[str, int]] = {}
        self.doc_lengths: dict[str, int] = {}
        for doc in corpus:
            tf = Counter(analyzer(doc.text))
            self.doc_terms[doc.id] = dict(tf)
            self.doc_lengths[doc.id] = sum(tf.values())
            for term, count in tf.items():
                self.postings.setdefault(term, []).append((doc.id, count))
        for plist in self.postings.values():
            plist.sort(key=lambda entry: entry[0])
        self.doc_count = len(corpus)
        total = sum(self.doc_lengths.values())
        self.avg_doc_length = total / self.doc_count

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_index(corpus: Corpus, analyzer: Analyzer | None = None) -> InvertedIndex:
    return InvertedIndex(corpus, analyzer if analyzer is not None else Analyzer())


def as_weighted_query(query) -> dict[str, float]:
    """Normalize a query to term -> weight; token lists weight occurrences."""
    if isinstance(query, dict):
        for term, w in query.items():
            if not (math.isfinite(w) and w >= 0):
                raise DataError(f"query weight for {term!r} must be finite and >= 0")
        return dict(query)
    weights: dict[str, float] = {}
    for token in query:
        weights[token] = weights.get(token, 0.0) + 1.0
    return weights


def bm25_search(
    index: InvertedIndex,
    query,
    params: BM25Params = BM25Params(),
    k: int = 10,
    query_id: str = "",
) -> ScoredList:
    """Score the full collection, return the top k as a ScoredList.

    `query` is either a token list (already analyzed) or a term -> weight
    mapping. Ties break by ascending doc_id; zero-score documents are omitted.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    weights = as_weighted_query(query)
    k1, b = params.k1, params.b
    avgdl = index.avg_doc_length
    scores: dict[str, float] = {}
    for term, w in weights.items():
        if w == 0.0:
            continue
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            norm = tf + k1 * (1.0 - b + b * index.doc_lengths[doc_id] / avgdl)
            scores[doc_id] = scores.get(doc_id, 0.0) + w * idf * tf * (k1 + 1.0) / norm
    return top_k(scores, k, query_id=query_id, drop_zeros=True)
