"""
Document expansion closes the vocabulary gap
============================================

Short answers often lack the words people actually type. Appending a few
predicted queries to each document puts those words into the index. The
expansion here is hand-written; any generator that emits the JSONL record
format plugs in the same way.
"""

from dialret import (
    Analyzer,
    Corpus,
    ExpansionRecord,
    ResponseDoc,
    apply_expansions,
    bm25_search,
    build_index,
    expansion_stats,
)

corpus = Corpus(
    [
        ResponseDoc("faq-1", "use the reset pin"),
        ResponseDoc("faq-2", "update the firmware"),
        ResponseDoc("faq-3", "replace the battery"),
    ]
)

# Each record predicts questions a user might ask this answer.
records = [
    ExpansionRecord(
        "faq-1",
        ("how do i factory reset my router", "router stuck on boot loop"),
        generator="demo",
    ),
    ExpansionRecord(
        "faq-2",
        ("wifi keeps dropping every hour", "router firmware update guide"),
        generator="demo",
    ),
    ExpansionRecord(
        "faq-3",
        ("clock resets after unplugging", "device forgets settings"),
        generator="demo",
    ),
]

expanded = apply_expansions(corpus, records, num_predictions=2)
print("provenance:", expanded.provenance)
for doc in expanded:
    print(f"  {doc.id}: {doc.text}")

stats = expansion_stats(corpus, expanded)
print(
    f"\n{stats.num_expanded} docs expanded, "
    f"avg {stats.avg_appended_words:.1f} words appended, "
    f"{stats.pct_new_words:.1f}% previously unseen in the doc"
)

# The payoff: a query with zero lexical overlap with the original answer.
analyzer = Analyzer()
query = analyzer("router boot loop")
before = bm25_search(build_index(corpus, analyzer), query, k=3)
after = bm25_search(build_index(expanded, analyzer), query, k=3)
print("\nquery 'router boot loop'")
print("  against originals:", before.ids() or "no hits")
print("  against expanded :", after.ids())
