"""Recall, re-ranking MAP, and paired significance testing.

Recall@K counts a query as hit when any relevant document appears in the
top K of a full-collection ranking. Re-ranking MAP scores small candidate
sets with exactly one positive, so average precision reduces to the
reciprocal rank of the positive.

paired_ttest is a two-sided paired Student t test. The t CDF is computed
from the regularized incomplete beta function

    p_two_sided = I_x(df/2, 1/2),  x = df / (df + t^2)

evaluated with the Lentz continued fraction to tolerance 1e-10. Bonferroni
correction divides alpha by the number of comparisons in the family.

Qrels files are 4 whitespace-separated columns: query_id 0 doc_id relevance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DataError
from .ranking import ScoredList, rank_key


def _rank_order(entries) -> list[str]:
    if isinstance(entries, ScoredList):
        return entries.ids()
    entries = list(entries)
    if entries and isinstance(entries[0], tuple):
        return [d for d, _ in sorted(entries, key=rank_key)]
    return list(entries)


@dataclass(frozen=True)
class EvalReport:
    """Per-query hit indicators and their means, one block per cutoff K."""

    ks: tuple[int, ...]
    per_query: dict[int, dict[str, int]]
    means: dict[int, float]
    num_queries: int


def recall_at_k(runs, qrels: dict[str, set[str]], ks) -> EvalReport:
    """runs: query_id -> ScoredList | [(doc_id, score)] | [doc_id].

    Every query in qrels is scored; a query missing from the runs counts 0.
    Queries in the runs without qrels are ignored.
    """
    ks = tuple(int(k) for k in ks)
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"cutoffs must be >= 1, got {ks!r}")
    if not qrels:
        raise DataError("empty qrels")
    for qid, rel in qrels.items():
        if not rel:
            raise DataError(f"query {qid!r} has no relevant documents")
    per_query: dict[int, dict[str, int]] = {k: {} for k in ks}
    for qid in sorted(qrels):
        ranked = _rank_order(runs.get(qid, []))
        rel = qrels[qid]
        for k in ks:
            hit = any(d in rel for d in ranked[:k])
            per_query[k][qid] = 1 if hit else 0
    n = len(qrels)
    means = {k: sum(per_query[k].values()) / n for k in ks}
    return EvalReport(ks=ks, per_query=per_query, means=means, num_queries=n)


def rerank_map(runs, qrels: dict[str, set[str]]) -> float:
    """Mean reciprocal rank of the positive over small candidate sets.

    Candidates are re-sorted by (score desc, doc_id asc); input order is not
    trusted. Each candidate set must contain exactly one relevant document.
    """
    if not qrels:
        raise DataError("empty qrels")
    total = 0.0
    for qid in sorted(qrels):
        rel = qrels[qid]
        if len(rel) != 1:
            raise DataError(f"query {qid!r} must have exactly one positive")
        ranked = _rank_order(runs.get(qid, []))
        if not ranked:
            raise DataError(f"no candidates for query {qid!r}")
        positive = next(iter(rel))
        try:
            rank = ranked.index(positive) + 1
        except ValueError:
            raise DataError(f"candidates for {qid!r} do not contain the positive") from None
        total += 1.0 / rank
    return total / len(qrels)


def _betacf(a: float, b: float, x: float, tol: float = 1e-10, max_iter: int = 300) -> float:
    # Lentz's continued fraction for the incomplete beta function
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ConfigError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ConfigError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df < 1:
        raise ConfigError(f"df must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return betainc_reg(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class SignificanceResult:
    system_a: str
    system_b: str
    metric: str
    mean_a: float
    mean_b: float
    t_statistic: float
    p_value: float
    alpha: float
    adjusted_alpha: float
    significant: bool


def paired_ttest(
    scores_a: list[float],
    scores_b: list[float],
    alpha: float = 0.05,
    num_comparisons: int = 1,
    system_a: str = "a",
    system_b: str = "b",
    metric: str = "",
) -> SignificanceResult:
    """Two-sided paired t test over per-query scores, Bonferroni adjusted.

    The two lists must be aligned per query. All-zero differences give
    t = 0, p = 1; zero variance with a non-zero mean gives p = 0.
    """
    if len(scores_a) != len(scores_b):
        raise DataError("score lists must have equal length")
    n = len(scores_a)
    if n < 2:
        raise DataError(f"need at least 2 paired scores, got {n}")
    if not (0.0 < alpha < 1.0):
        raise ConfigError(f"alpha must be in (0, 1), got {alpha!r}")
    if num_comparisons < 1:
        raise ConfigError(f"num_comparisons must be >= 1, got {num_comparisons}")
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    adjusted = alpha / num_comparisons
    if var == 0.0:
        if mean == 0.0:
            t, p = 0.0, 1.0
        else:
            t = math.inf if mean > 0 else -math.inf
            p = 0.0
    else:
        t = mean / math.sqrt(var / n)
        p = t_sf_two_sided(t, n - 1)
    return SignificanceResult(
        system_a=system_a,
        system_b=system_b,
        metric=metric,
        mean_a=sum(scores_a) / n,
        mean_b=sum(scores_b) / n,
        t_statistic=t,
        p_value=p,
        alpha=alpha,
        adjusted_alpha=adjusted,
        significant=p < adjusted,
    )


def load_qrels(path: str) -> dict[str, set[str]]:
    qrels: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
            qid, _iter, doc_id, rel_s = parts
            try:
                rel = int(rel_s)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad relevance {rel_s!r}") from None
            if rel > 0:
                qrels.setdefault(qid, set()).add(doc_id)
    if not qrels:
        raise DataError(f"{path}: no positive judgments")
    return qrels


def save_qrels(qrels: dict[str, set[str]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid in sorted(qrels):
            for doc_id in sorted(qrels[qid]):
                fh.write(f"{qid} 0 {doc_id} 1\n")
