import numpy as np
import pytest

from dialret import (
    BM25Params,
    ConfigError,
    Corpus,
    DataError,
    ResponseDoc,
    RM3Params,
    bm25_search,
    build_index,
    build_relevance_model,
    rm3_search,
    sweep_grid,
)
from dialret.rm3 import interpolate_query


class TestRelevanceModel:
    def test_single_doc_term_distribution(self, raw_analyzer):
        # one feedback doc "x x y": weights tf/|d| -> x: 2/3, y: 1/3
        corpus = Corpus([ResponseDoc("d1", "x x y"), ResponseDoc("d2", "z")])
        idx = build_index(corpus, raw_analyzer)
        first = bm25_search(idx, ["x"], k=5)
        model = build_relevance_model(idx, first, fb_docs=1, fb_terms=10)
        assert model["x"] == pytest.approx(2 / 3)
        assert model["y"] == pytest.approx(1 / 3)

    def test_fb_terms_tie_breaks_lexicographically(self, raw_analyzer):
        corpus = Corpus([ResponseDoc("d1", "b a d c"), ResponseDoc("d2", "z")])
        idx = build_index(corpus, raw_analyzer)
        first = bm25_search(idx, ["a"], k=5)
        model = build_relevance_model(idx, first, fb_docs=1, fb_terms=2)
        assert sorted(model) == ["a", "b"]

    def test_doc_weights_proportional_to_scores(self, raw_analyzer):
        corpus = Corpus(
            [
                ResponseDoc("d1", "x x x"),
                ResponseDoc("d2", "x y y"),
                ResponseDoc("d3", "q"),
            ]
        )
        idx = build_index(corpus, raw_analyzer)
        first = bm25_search(idx, ["x"], k=5)
        s1 = dict(first.entries)["d1"]
        s2 = dict(first.entries)["d2"]
        model = build_relevance_model(idx, first, fb_docs=2, fb_terms=10)
        w1, w2 = s1 / (s1 + s2), s2 / (s1 + s2)
        expect_x = w1 * 3 / 3 + w2 * 1 / 3
        expect_y = w2 * 2 / 3
        total = expect_x + expect_y
        assert model["x"] == pytest.approx(expect_x / total, abs=1e-12)
        assert model["y"] == pytest.approx(expect_y / total, abs=1e-12)

    def test_weights_sum_to_one(self, raw_analyzer):
        rng = np.random.default_rng(7)
        vocab = [f"t{i}" for i in range(8)]
        for _ in range(20):
            n = int(rng.integers(2, 10))
            corpus = Corpus(
                [
                    ResponseDoc(
                        f"d{i}",
                        " ".join(rng.choice(vocab, size=int(rng.integers(1, 8)))),
                    )
                    for i in range(n)
                ]
            )
            idx = build_index(corpus, raw_analyzer)
            first = bm25_search(idx, [str(rng.choice(vocab))], k=n)
            if not first.entries:
                continue
            model = build_relevance_model(idx, first, fb_docs=3, fb_terms=4)
            assert sum(model.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(w >= 0 for w in model.values())

    def test_empty_first_pass_rejected(self, fruit_corpus, raw_analyzer):
        idx = build_index(fruit_corpus, raw_analyzer)
        from dialret import ScoredList

        with pytest.raises(DataError, match="empty ranking"):
            build_relevance_model(idx, ScoredList("q", ()), 10, 10)


class TestInterpolation:
    def test_convex_combination(self):
        final = interpolate_query(["a", "a", "b"], {"b": 0.5, "c": 0.5}, 0.5)
        # original normalized: a 2/3, b 1/3
        assert final["a"] == pytest.approx(0.5 * 2 / 3)
        assert final["b"] == pytest.approx(0.5 * 1 / 3 + 0.5 * 0.5)
        assert final["c"] == pytest.approx(0.25)
        assert sum(final.values()) == pytest.approx(1.0, abs=1e-12)

    def test_empty_model_returns_original(self):
        final = interpolate_query(["a", "b"], {}, 0.3)
        assert final == {"a": 0.5, "b": 0.5}

    def test_empty_query_rejected(self):
        with pytest.raises(DataError, match="empty query"):
            interpolate_query([], {"a": 1.0}, 0.5)


class TestRM3Search:
    def test_alpha_one_equals_bm25_ranking(self, raw_analyzer):
        rng = np.random.default_rng(123)
        vocab = [f"t{i}" for i in range(10)]
        params = RM3Params(fb_docs=3, fb_terms=5, orig_weight=1.0)
        for trial in range(25):
            n = int(rng.integers(3, 20))
            corpus = Corpus(
                [
                    ResponseDoc(
                        f"d{i:02d}",
                        " ".join(rng.choice(vocab, size=int(rng.integers(1, 9)))),
                    )
                    for i in range(n)
                ]
            )
            idx = build_index(corpus, raw_analyzer)
            query = list(rng.choice(vocab, size=int(rng.integers(1, 4))))
            base = bm25_search(idx, query, k=n)
            fed = rm3_search(idx, query, params, k=n)
            assert fed.ids() == base.ids(), f"trial {trial}"

    def test_alpha_zero_is_pure_feedback_model(self, raw_analyzer):
        corpus = Corpus(
            [
                ResponseDoc("d1", "x y"),
                ResponseDoc("d2", "y z"),
                ResponseDoc("d3", "z z"),
            ]
        )
        idx = build_index(corpus, raw_analyzer)
        params = RM3Params(fb_docs=1, fb_terms=10, orig_weight=0.0)
        result = rm3_search(idx, ["x"], params, k=3)
        # feedback doc is d1; model {x: .5, y: .5} also reaches d2 through y
        assert set(result.ids()) == {"d1", "d2"}

    def test_no_first_pass_results_falls_back_empty(self, fruit_corpus, raw_analyzer):
        idx = build_index(fruit_corpus, raw_analyzer)
        result = rm3_search(idx, ["nomatch"], RM3Params(), k=5)
        assert result.entries == ()

    def test_bad_params_rejected(self):
        with pytest.raises(ConfigError):
            RM3Params(fb_docs=0)
        with pytest.raises(ConfigError):
            RM3Params(orig_weight=1.5)


class TestSweep:
    def test_grid_shape_and_alpha_one_matches_bm25(self, raw_analyzer):
        corpus = Corpus(
            [
                ResponseDoc("d1", "apple pie recipe"),
                ResponseDoc("d2", "apple tart"),
                ResponseDoc("d3", "car manual"),
            ]
        )
        idx = build_index(corpus, raw_analyzer)
        queries = {"q1": ["apple"], "q2": ["car"]}
        qrels = {"q1": {"d2"}, "q2": {"d3"}}
        rows = sweep_grid(
            idx, queries, qrels,
            fb_docs_grid=[1, 2], fb_terms_grid=[2], orig_weight_grid=[0.5, 1.0],
            ks=(1,),
        )
        assert len(rows) == 4
        base = bm25_search(idx, ["apple"], k=1)
        assert base.ids() == ["d2"]
        for row in rows:
            if row["orig_weight"] == 1.0:
                assert row["recall@1"] == 1.0
