"""
Sparse first-stage retrieval with BM25
======================================

Index a handful of support answers, issue a query, and look at how term
saturation and length normalization shape the ranking.
"""

from dialret import Analyzer, BM25Params, bm25_search, build_index, Corpus, ResponseDoc

# A tiny response collection. Analysis lowercases, drops stopwords, and stems,
# so "installing", "installed", and "install" all meet in one posting list.
corpus = Corpus(
    [
        ResponseDoc("ans-1", "Try installing the video driver from the vendor page."),
        ResponseDoc("ans-2", "The driver installs fine after you update the kernel."),
        ResponseDoc("ans-3", "Purge the old driver, reboot, then install the new driver."),
        ResponseDoc("ans-4", "Wireless keeps dropping; restart the network manager."),
        ResponseDoc("ans-5", "You can compile the driver module yourself with dkms."),
    ]
)

analyzer = Analyzer()
index = build_index(corpus, analyzer)
print(f"indexed {index.doc_count} docs, avg length {index.avg_doc_length:.2f} tokens")
print(f"df('driver') = {index.df(analyzer('driver')[0])}")

# The query goes through the same analyzer before scoring.
query = analyzer("how do I install a driver")
print("\nanalyzed query:", query)

for label, params in (
    ("default (k1=0.9, b=0.4)", BM25Params()),
    ("no length norm (b=0)", BM25Params(k1=0.9, b=0.0)),
    ("binary-ish tf (k1=0.1)", BM25Params(k1=0.1, b=0.4)),
):
    result = bm25_search(index, query, params, k=5)
    print(f"\n{label}")
    for rank, (doc_id, score) in enumerate(result.entries, start=1):
        print(f"  {rank}. {doc_id}  {score:.4f}")

# ans-3 mentions "driver" twice and "install" once; with saturation flattened
# (small k1) repeated terms stop paying, and the ranking tightens up.
