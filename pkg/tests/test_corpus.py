import json

import pytest

from dialret import (
    Corpus,
    DataError,
    ResponseDoc,
    Utterance,
    concat_context,
    corpus_stats,
    load_dataset,
    save_dataset,
    word_tokens,
)
from tests.conftest import make_context


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def ctx_record(cid, texts, speakers=None, split=None):
    speakers = speakers or ["unknown"] * len(texts)
    return {
        "type": "context",
        "id": cid,
        "utterances": [
            {"text": t, "speaker": s, "turn": i}
            for i, (t, s) in enumerate(zip(texts, speakers))
        ],
    }


BASE = [
    ctx_record("c1", ["hello there", "is it broken"], ["seeker", "seeker"]),
    ctx_record("c2", ["printer jammed"], ["seeker"]),
    {"type": "response", "id": "r1", "text": "try turning it off"},
    {"type": "response", "id": "r2", "text": "clear the tray first"},
    {"type": "response", "id": "r3", "text": "unrelated filler"},
    {"type": "pair", "context_id": "c1", "response_id": "r1", "split": "train"},
    {"type": "pair", "context_id": "c2", "response_id": "r2", "split": "test"},
]


class TestLoading:
    def test_counts_and_split_assignment(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(path, BASE)
        ds = load_dataset(str(path))
        assert sorted(ds.splits) == ["test", "train"]
        assert [c.id for c in ds.split("train").contexts] == ["c1"]
        assert [c.id for c in ds.split("test").contexts] == ["c2"]
        # responses form one shared collection
        assert len(ds.corpus) == 3
        assert ds.split("train").corpus is ds.corpus

    def test_round_trip(self, tmp_path):
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        write_jsonl(first, BASE)
        ds = load_dataset(str(first))
        save_dataset(ds, str(second))
        again = load_dataset(str(second))
        assert again.corpus == ds.corpus
        assert again.splits.keys() == ds.splits.keys()
        for name in ds.splits:
            assert again.splits[name].contexts == ds.splits[name].contexts
            assert again.splits[name].pairs == ds.splits[name].pairs

    def test_empty_file_is_empty_split(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DataError, match="empty split"):
            load_dataset(str(path))

    def test_missing_split_raises(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(path, BASE)
        ds = load_dataset(str(path))
        with pytest.raises(DataError, match="valid"):
            ds.split("valid")

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda r: r.append({"type": "pair", "context_id": "cx", "response_id": "r1", "split": "train"}), "unknown context"),
            (lambda r: r.append({"type": "pair", "context_id": "c1", "response_id": "rx", "split": "train"}), "unknown response"),
            (lambda r: r.append({"type": "pair", "context_id": "c1", "response_id": "r3", "split": "train"}), "more than one pair"),
            (lambda r: r.append(ctx_record("c9", ["alone"])), "no pair"),
            (lambda r: r.append({"type": "response", "id": "r1", "text": "again"}), "duplicate response"),
            (lambda r: r.append(ctx_record("c1", ["again"])), "duplicate context"),
            (lambda r: r.append({"type": "widget", "id": "w"}), "unknown record type"),
            (lambda r: r.append({"type": "pair", "context_id": "c1", "response_id": "r1", "split": "dev"}), "bad split"),
        ],
    )
    def test_validation_errors(self, tmp_path, mutate, message):
        records = [dict(r) for r in BASE]
        mutate(records)
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, records)
        with pytest.raises(DataError, match=message):
            load_dataset(str(path))

    def test_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"type": "context", "id": "c1"}\n', encoding="utf-8")
        with pytest.raises(DataError, match="line 1"):
            load_dataset(str(path))

    def test_bad_json_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{nope}\n", encoding="utf-8")
        with pytest.raises(DataError, match="line 1"):
            load_dataset(str(path))

    def test_turns_must_increase(self, tmp_path):
        rec = ctx_record("c1", ["a", "b"])
        rec["utterances"][1]["turn"] = 0
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, [rec, {"type": "response", "id": "r1", "text": "x"},
                           {"type": "pair", "context_id": "c1", "response_id": "r1", "split": "train"}])
        with pytest.raises(DataError, match="turns"):
            load_dataset(str(path))


class TestCorpus:
    def test_duplicate_id_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            Corpus([ResponseDoc("r", "a"), ResponseDoc("r", "b")])

    def test_empty_text_rejected(self):
        with pytest.raises(DataError, match="empty text"):
            Corpus([ResponseDoc("r", "   ")])

    def test_lookup(self, fruit_corpus):
        assert fruit_corpus.get("d2").text == "apple apple"
        assert "d3" in fruit_corpus
        with pytest.raises(DataError, match="unknown response"):
            fruit_corpus.get("nope")


class TestConcatContext:
    def test_single_utterance_is_plain_text(self):
        ctx = make_context("c", "just one")
        assert concat_context(ctx) == "just one"

    def test_all_unknown_speakers_alternate(self):
        ctx = make_context("c", "a", "b", "c", "d")
        assert concat_context(ctx) == "a [U] b [T] c [U] d"

    def test_speaker_change_gets_turn_marker(self):
        ctx = make_context(
            "c", "q1", "a1", "q2", speakers=["seeker", "provider", "seeker"]
        )
        assert concat_context(ctx) == "q1 [T] a1 [T] q2"

    def test_same_speaker_gets_utterance_marker(self):
        ctx = make_context("c", "part one", "part two", speakers=["seeker", "seeker"])
        assert concat_context(ctx) == "part one [U] part two"

    def test_mixed_speakers_compare_values(self):
        ctx = make_context("c", "a", "b", speakers=["seeker", "unknown"])
        assert concat_context(ctx) == "a [T] b"


class TestStats:
    def test_word_tokens_split_non_alphanumeric(self):
        assert word_tokens("Hello, world! x2") == ["hello", "world", "x2"]

    def test_average_word_counts(self, tmp_path):
        records = [
            ctx_record("c1", ["a b"]),
            ctx_record("c2", ["c d", "e f"]),
            {"type": "response", "id": "r1", "text": "one two three"},
            {"type": "response", "id": "r2", "text": "four"},
            {"type": "pair", "context_id": "c1", "response_id": "r1", "split": "train"},
            {"type": "pair", "context_id": "c2", "response_id": "r2", "split": "train"},
        ]
        path = tmp_path / "d.jsonl"
        write_jsonl(path, records)
        stats = corpus_stats(load_dataset(str(path)))
        # contexts average (2 + 4) / 2; responses (3 + 1) / 2
        assert stats["train"].avg_context_words == 3.0
        assert stats["train"].avg_response_words == 2.0
        assert stats["train"].num_contexts == 2
