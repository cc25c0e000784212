"""
Recall, reranking MAP, and paired significance
==============================================

Metrics take runs (ranked ids with scores) and qrels (the relevant ids per
query). The paired t-test compares two systems on the same queries; a
Bonferroni correction tightens alpha when several systems are compared
against one baseline.
"""

from dialret import paired_ttest, recall_at_k, rerank_map

runs_a = {
    "q1": [("d3", 2.1), ("d1", 1.4), ("d7", 0.9)],
    "q2": [("d2", 3.0), ("d5", 2.2)],
    "q3": [("d8", 1.1), ("d4", 1.0), ("d2", 0.4)],
    "q4": [("d6", 2.5), ("d9", 2.0)],
}
qrels = {"q1": {"d1"}, "q2": {"d2"}, "q3": {"d4"}, "q4": {"d9"}}

report = recall_at_k(runs_a, qrels, ks=(1, 2))
print("system A per-query hits @2:", report.per_query[2])
print("system A means:", {k: f"{v:.2f}" for k, v in report.means.items()})

# Reranking MAP over small candidate sets: reciprocal rank of the positive.
print("rerank MAP:", round(rerank_map(runs_a, qrels), 4))

# A second system that wins q1 and q3 at rank 1.
runs_b = {
    "q1": [("d1", 2.0), ("d3", 1.0)],
    "q2": [("d2", 3.0), ("d5", 2.2)],
    "q3": [("d4", 2.0), ("d8", 1.0)],
    "q4": [("d6", 2.5), ("d9", 2.0)],
}
a_hits = [float(recall_at_k(runs_a, qrels, ks=(1,)).per_query[1][q]) for q in sorted(qrels)]
b_hits = [float(recall_at_k(runs_b, qrels, ks=(1,)).per_query[1][q]) for q in sorted(qrels)]
result = paired_ttest(b_hits, a_hits, alpha=0.05, num_comparisons=3,
                      system_a="b", system_b="a", metric="recall@1")
print(f"\nB vs A on recall@1: t={result.t_statistic:.4f} p={result.p_value:.4f}")
print(f"alpha {result.alpha} / 3 comparisons -> adjusted {result.adjusted_alpha:.4f}")
print("significant:", bool(result.significant))

# Four queries cannot separate the systems: the lesson is that the test
# needs enough paired observations, not that the systems are equal.
