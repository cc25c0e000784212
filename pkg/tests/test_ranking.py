import pytest

from dialret import DataError, ScoredList, read_run, top_k, write_run


class TestScoredList:
    def test_valid_ordering(self):
        sl = ScoredList("q", (("a", 2.0), ("b", 1.0), ("c", 1.0)))
        assert sl.ids() == ["a", "b", "c"]

    def test_rejects_unsorted(self):
        with pytest.raises(DataError, match="not sorted"):
            ScoredList("q", (("a", 1.0), ("b", 2.0)))

    def test_rejects_tie_out_of_id_order(self):
        with pytest.raises(DataError, match="not sorted"):
            ScoredList("q", (("b", 1.0), ("a", 1.0)))

    def test_rejects_duplicates(self):
        with pytest.raises(DataError, match="duplicate"):
            ScoredList("q", (("a", 2.0), ("a", 1.0)))


class TestTopK:
    def test_orders_and_truncates(self):
        scores = {"a": 1.0, "b": 3.0, "c": 2.0, "d": 3.0}
        sl = top_k(scores, 3, query_id="q")
        assert sl.entries == (("b", 3.0), ("d", 3.0), ("c", 2.0))

    def test_drop_zeros(self):
        scores = {"a": 0.0, "b": 1.0}
        assert top_k(scores, 5, drop_zeros=True).ids() == ["b"]
        assert top_k(scores, 5).ids() == ["b", "a"]


class TestRunFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "x.run.txt"
        results = [
            ScoredList("q1", (("d2", 1.5), ("d1", 0.25))),
            ScoredList("q2", (("d3", 0.125),)),
        ]
        write_run(str(path), results, tag="testtag")
        lines = path.read_text().splitlines()
        assert lines[0] == "q1 Q0 d2 1 1.500000 testtag"
        assert lines[2] == "q2 Q0 d3 1 0.125000 testtag"
        runs = read_run(str(path))
        assert runs == {"q1": [("d2", 1.5), ("d1", 0.25)], "q2": [("d3", 0.125)]}

    def test_bad_tag_rejected(self, tmp_path):
        with pytest.raises(DataError, match="tag"):
            write_run(str(tmp_path / "x"), [], tag="has space")

    @pytest.mark.parametrize(
        "line, message",
        [
            ("q1 Q0 d1 1", "6 columns"),
            ("q1 XX d1 1 1.0 t", "Q0"),
            ("q1 Q0 d1 2 1.0 t", "out of sequence"),
            ("q1 Q0 d1 x 1.0 t", "bad rank"),
        ],
    )
    def test_malformed_lines(self, tmp_path, line, message):
        path = tmp_path / "bad.run.txt"
        path.write_text(line + "\n", encoding="utf-8")
        with pytest.raises(DataError, match=message):
            read_run(str(path))

    def test_duplicate_doc_rejected(self, tmp_path):
        path = tmp_path / "bad.run.txt"
        path.write_text("q1 Q0 d1 1 2.0 t\nq1 Q0 d1 2 1.0 t\n", encoding="utf-8")
        with pytest.raises(DataError, match="duplicate"):
            read_run(str(path))
