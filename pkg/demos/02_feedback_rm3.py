"""
Pseudo-relevance feedback with RM3
==================================

RM3 reads the top documents of a first BM25 pass, builds a relevance model
over their terms, and mixes it back into the query. orig_weight=1.0 keeps
the original query only, so the ranking collapses back to plain BM25.
"""

from dialret import (
    Analyzer,
    Corpus,
    ResponseDoc,
    RM3Params,
    bm25_search,
    build_index,
    build_relevance_model,
    rm3_search,
)

corpus = Corpus(
    [
        ResponseDoc("a1", "flash the firmware image to the router over tftp"),
        ResponseDoc("a2", "the router firmware update fixes the wifi drop"),
        ResponseDoc("a3", "download the firmware archive and verify the checksum"),
        ResponseDoc("a4", "reset the router to factory settings with the pin hole"),
        ResponseDoc("a5", "the kernel image boots from the second partition"),
        ResponseDoc("a6", "wifi drivers live in the kernel not the firmware"),
    ]
)

analyzer = Analyzer()
index = build_index(corpus, analyzer)
query = analyzer("router firmware")

base = bm25_search(index, query, k=6)
print("plain BM25:", base.ids())

# Peek at the relevance model the feedback step extracts.
model = build_relevance_model(index, base, fb_docs=2, fb_terms=4)
print("\nfeedback terms (top documents voted):")
for term, weight in sorted(model.items(), key=lambda e: -e[1]):
    print(f"  {term:10s} {weight:.3f}")

# Sweep the interpolation weight. alpha=1.0 is the degenerate case.
for alpha in (1.0, 0.5, 0.0):
    params = RM3Params(fb_docs=2, fb_terms=4, orig_weight=alpha)
    result = rm3_search(index, query, params, k=6)
    marker = "  (identical to BM25)" if result.ids() == base.ids() else ""
    print(f"\nalpha={alpha}: {result.ids()}{marker}")

# Feedback pulls in terms like "update"/"wifi" from the top documents, which
# can surface a2/a6-style answers the literal query text never mentions.
