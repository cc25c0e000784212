import pytest

from dialret import (
    Corpus,
    DataError,
    ExpansionRecord,
    ResponseDoc,
    apply_expansions,
    expansion_stats,
    load_expansions,
    save_expansions,
)


def records():
    return [
        ExpansionRecord("d1", ("how do i install driver on windows",), "gen-a"),
        ExpansionRecord("d2", ("p1", "p2", "p3", "p4"), "gen-b"),
    ]


class TestRoundTrip:
    def test_save_load(self, tmp_path):
        path = tmp_path / "exp.jsonl"
        save_expansions(records(), path)
        back = load_expansions(path)
        assert back == records()

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "exp.jsonl"
        save_expansions([records()[0], records()[0]], path)
        with pytest.raises(DataError, match=":2"):
            load_expansions(path)

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "exp.jsonl"
        path.write_text('{"response_id": "d1", "predictions": ["x"]}\nnot json\n')
        with pytest.raises(DataError, match=":2"):
            load_expansions(path)

    def test_predictions_must_be_strings(self, tmp_path):
        path = tmp_path / "exp.jsonl"
        path.write_text('{"response_id": "d1", "predictions": [1, 2]}\n')
        with pytest.raises(DataError):
            load_expansions(path)


class TestApply:
    def test_appends_first_n_predictions(self):
        corpus = Corpus([ResponseDoc("d2", "base text")])
        out = apply_expansions(corpus, [records()[1]], num_predictions=2)
        assert out.get("d2").text == "base text p1 p2"
        assert out.provenance == "expanded:gen-b"

    def test_generators_sorted_in_provenance(self):
        corpus = Corpus([ResponseDoc("d1", "a"), ResponseDoc("d2", "b")])
        out = apply_expansions(corpus, records(), num_predictions=1)
        assert out.provenance == "expanded:gen-a+gen-b"

    def test_unknown_response_id(self):
        corpus = Corpus([ResponseDoc("other", "a")])
        with pytest.raises(DataError, match="d1"):
            apply_expansions(corpus, [records()[0]])

    def test_refuses_already_expanded(self):
        corpus = Corpus([ResponseDoc("d1", "a")], provenance="expanded:gen-a")
        with pytest.raises(DataError, match="refusing to expand twice"):
            apply_expansions(corpus, [records()[0]])
        out = apply_expansions(corpus, [records()[0]], allow_restack=True)
        assert out.get("d1").text.startswith("a how")

    def test_unexpanded_docs_untouched(self):
        corpus = Corpus([ResponseDoc("d1", "a"), ResponseDoc("keep", "same")])
        out = apply_expansions(corpus, [records()[0]])
        assert out.get("keep").text == "same"


class TestStats:
    def test_new_word_percentage(self):
        # worked fixture: 7 appended words, 5 unseen in the original
        original = Corpus([ResponseDoc("d1", "install the driver")])
        expanded = apply_expansions(original, [records()[0]])
        stats = expansion_stats(original, expanded)
        assert stats.num_expanded == 1
        assert stats.avg_appended_words == pytest.approx(7.0)
        assert stats.pct_new_words == pytest.approx(100 * 5 / 7)

    def test_pure_repetition_is_zero_percent(self):
        original = Corpus([ResponseDoc("d1", "install the driver")])
        rec = ExpansionRecord("d1", ("install the driver",), "echo")
        expanded = apply_expansions(original, [rec])
        stats = expansion_stats(original, expanded)
        assert stats.pct_new_words == 0.0

    def test_expanded_must_extend_original(self):
        original = Corpus([ResponseDoc("d1", "one text")])
        other = Corpus([ResponseDoc("d1", "different")])
        with pytest.raises(DataError, match="extend"):
            expansion_stats(original, other)

    def test_id_sets_must_match(self):
        original = Corpus([ResponseDoc("d1", "a")])
        other = Corpus([ResponseDoc("d2", "a")])
        with pytest.raises(DataError):
            expansion_stats(original, other)

    def test_unchanged_corpus_counts_zero(self):
        original = Corpus([ResponseDoc("d1", "a")])
        stats = expansion_stats(original, original)
        assert stats.num_expanded == 0
        assert stats.avg_appended_words == 0.0
