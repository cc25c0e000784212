"""RM3 pseudo-relevance feedback on top of BM25.

Two-pass retrieval:

  1. BM25 with the plain query; take the top fb_docs results.
  2. Relevance model: document weights are the first-pass scores normalized
     to sum 1; each term's weight is sum_d docweight(d) * tf(t,d) / |d|.
     Keep the fb_terms heaviest terms (ties broken lexicographically),
     renormalize to sum 1.
  3. Final query: orig_weight * (normalized original term frequencies)
     + (1 - orig_weight) * (relevance model), then BM25 again.

With orig_weight = 1.0 the interpolation degenerates and the ranking equals
plain BM25 (scores scale by 1/|q|, order is unchanged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DataError
from .ranking import ScoredList
from .sparse import BM25Params, InvertedIndex, bm25_search


@dataclass(frozen=True)
class RM3Params:
    fb_docs: int = 10
    fb_terms: int = 10
    orig_weight: float = 0.5

    def __post_init__(self):
        if self.fb_docs < 1:
            raise ConfigError(f"fb_docs must be >= 1, got {self.fb_docs}")
        if self.fb_terms < 1:
            raise ConfigError(f"fb_terms must be >= 1, got {self.fb_terms}")
        if not (0.0 <= self.orig_weight <= 1.0) or not math.isfinite(self.orig_weight):
            raise ConfigError(f"orig_weight must be in [0, 1], got {self.orig_weight!r}")


def build_relevance_model(
    index: InvertedIndex,
    first_pass: ScoredList,
    fb_docs: int,
    fb_terms: int,
) -> dict[str, float]:
    """Expansion term distribution from the top of a first-pass ranking."""
    top = first_pass.entries[:fb_docs]
    if not top:
        raise DataError("cannot build a relevance model from an empty ranking")
    total_score = sum(score for _, score in top)
    if total_score <= 0:
        raise DataError("first-pass scores must be positive")
    term_weights: dict[str, float] = {}
    for doc_id, score in top:
        length = index.doc_lengths.get(doc_id)
        if length is None:
            raise DataError(f"first pass references unindexed doc {doc_id!r}")
        if length == 0:
            continue
        doc_weight = score / total_score
        for term, tf in index.doc_terms[doc_id].items():
            term_weights[term] = term_weights.get(term, 0.0) + doc_weight * tf / length
    if not term_weights:
        return {}
    kept = sorted(term_weights.items(), key=lambda kv: (-kv[1], kv[0]))[:fb_terms]
    norm = sum(w for _, w in kept)
    return {term: w / norm for term, w in kept}


def interpolate_query(
    query_tokens: list[str],
    model: dict[str, float],
    orig_weight: float,
) -> dict[str, float]:
    if not query_tokens:
        raise DataError("empty query")
    counts: dict[str, float] = {}
    for token in query_tokens:
        counts[token] = counts.get(token, 0.0) + 1.0
    total = float(len(query_tokens))
    orig = {t: c / total for t, c in counts.items()}
    if not model:
        return orig
    combined = {t: orig_weight * w for t, w in orig.items()}
    for term, w in model.items():
        combined[term] = combined.get(term, 0.0) + (1.0 - orig_weight) * w
    return combined


def rm3_search(
    index: InvertedIndex,
    query_tokens: list[str],
    params: RM3Params = RM3Params(),
    k: int = 10,
    bm25: BM25Params = BM25Params(),
    query_id: str = "",
) -> ScoredList:
    """BM25 + RM3 expansion; falls back to the first pass when it is empty."""
    first = bm25_search(index, query_tokens, bm25, k=max(k, params.fb_docs),
                        query_id=query_id)
    if not first.entries:
        return ScoredList(query_id=query_id, entries=())
    model = build_relevance_model(index, first, params.fb_docs, params.fb_terms)
    final = interpolate_query(query_tokens, model, params.orig_weight)
    return bm25_search(index, final, bm25, k=k, query_id=query_id)


def sweep_grid(
    index: InvertedIndex,
    queries: dict[str, list[str]],
    qrels: dict[str, set[str]],
    fb_docs_grid: list[int],
    fb_terms_grid: list[int],
    orig_weight_grid: list[float],
    ks: tuple[int, ...] = (1, 10),
    bm25: BM25Params = BM25Params(),
) -> list[dict]:
    """Grid search over RM3 parameters; one row of recalls per combination."""
    from .evaluation import recall_at_k

    rows = []
    for fb_docs in fb_docs_grid:
        for fb_terms in fb_terms_grid:
            for orig_weight in orig_weight_grid:
                params = RM3Params(fb_docs=fb_docs, fb_terms=fb_terms,
                                   orig_weight=orig_weight)
                results = {
                    qid: rm3_search(index, tokens, params, k=max(ks),
                                    bm25=bm25, query_id=qid)
                    for qid, tokens in queries.items()
                }
                report = recall_at_k(results, qrels, ks)
                row = {"fb_docs": fb_docs, "fb_terms": fb_terms,
                       "orig_weight": orig_weight}
                for kk in ks:
                    row[f"recall@{kk}"] = report.means[kk]
                rows.append(row)
    return rows
