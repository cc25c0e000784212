"""Data model and JSONL ingestion for dialogue retrieval datasets.

A dataset file is UTF-8 JSON Lines with three record types:

  {"type": "context", "id": ..., "utterances": [{"text", "speaker", "turn"}]}
  {"type": "response", "id": ..., "text": ...}
  {"type": "pair", "context_id": ..., "response_id": ..., "split": ...}

Responses form one shared collection (retrieval ranks against the whole
collection); contexts belong to the split named by their pair record. Every
context must be referenced by exactly one pair.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import DataError

SPLITS = ("train", "valid", "test")
SPEAKERS = ("seeker", "provider", "unknown")

_WORD_RE = re.compile(r"[0-9a-z]+")


def word_tokens(text: str) -> list[str]:
    """Lowercase words split on non-alphanumeric runs; used for statistics."""
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class Utterance:
    text: str
    speaker: str = "unknown"
    turn: int = 0


@dataclass(frozen=True)
class DialogueContext:
    id: str
    utterances: tuple[Utterance, ...]

    def text(self) -> str:
        """All utterance texts joined by single spaces, no separator markers."""
        return " ".join(u.text for u in self.utterances)


@dataclass(frozen=True)
class ResponseDoc:
    id: str
    text: str


@dataclass(frozen=True)
class ExamplePair:
    context_id: str
    response_id: str
    split: str


def concat_context(ctx: DialogueContext) -> str:
    """Join utterances with [U]/[T] markers for the dense encoder.

    The marker after utterance k is [T] when the speaker changes at that
    boundary and [U] otherwise. When every speaker is unknown the markers
    alternate starting with [U].
    """
    utts = ctx.utterances
    if len(utts) == 1:
        return utts[0].text
    all_unknown = all(u.speaker == "unknown" for u in utts)
    parts = [utts[0].text]
    for i in range(1, len(utts)):
        if all_unknown:
            sep = "[U]" if (i - 1) % 2 == 0 else "[T]"
        else:
            sep = "[T]" if utts[i].speaker != utts[i - 1].speaker else "[U]"
        parts.append(sep)
        parts.append(utts[i].text)
    return " ".join(parts)


class Corpus:
    """Ordered, id-unique collection of response documents."""

    def __init__(self, docs, provenance: str = "original"):
        self.docs: list[ResponseDoc] = list(docs)
        self.provenance = provenance
        self._by_id: dict[str, ResponseDoc] = {}
        for d in self.docs:
            if not d.id:
                raise DataError("response with empty id")
            if not d.text.strip():
                raise DataError(f"response {d.id!r} has empty text")
            if d.id in self._by_id:
                raise DataError(f"duplicate response id {d.id!r}")
            self._by_id[d.id] = d

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.docs == other.docs and self.provenance == other.provenance

    def get(self, doc_id: str) -> ResponseDoc:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise DataError(f"unknown response id {doc_id!r}") from None

    def ids(self) -> list[str]:
        return [d.id for d in self.docs]


@dataclass
class Split:
    contexts: list[DialogueContext]
    pairs: list[ExamplePair]
    corpus: Corpus

    def positives(self) -> dict[str, str]:
        return {p.context_id: p.response_id for p in self.pairs}


@dataclass
class Dataset:
    splits: dict[str, Split]
    corpus: Corpus

    def split(self, name: str) -> Split:
        if name not in self.splits:
            raise DataError(f"empty split {name!r}")
        return self.splits[name]


def _require(record: dict, key: str, lineno: int):
    if key not in record:
        raise DataError(f"line {lineno}: missing field {key!r}")
    return record[key]


def _parse_context(rec: dict, lineno: int) -> DialogueContext:
    cid = _require(rec, "id", lineno)
    if not isinstance(cid, str) or not cid:
        raise DataError(f"line {lineno}: context id must be a non-empty string")
    raw = _require(rec, "utterances", lineno)
    if not isinstance(raw, list) or not raw:
        raise DataError(f"line {lineno}: context {cid!r} needs at least one utterance")
    utts = []
    prev_turn = -1
    for u in raw:
        text = _require(u, "text", lineno)
        if not isinstance(text, str) or not text.strip():
            raise DataError(f"line {lineno}: context {cid!r} has an empty utterance")
        speaker = u.get("speaker", "unknown")
        if speaker not in SPEAKERS:
            raise DataError(f"line {lineno}: bad speaker {speaker!r}")
        turn = u.get("turn", prev_turn + 1)
        if not isinstance(turn, int) or turn < 0 or turn <= prev_turn:
            raise DataError(f"line {lineno}: turns must be non-negative and increasing")
        prev_turn = turn
        utts.append(Utterance(text=text, speaker=speaker, turn=turn))
    return DialogueContext(id=cid, utterances=tuple(utts))


def load_dataset(path: str) -> Dataset:
    contexts: dict[str, DialogueContext] = {}
    docs: list[ResponseDoc] = []
    doc_ids: set[str] = set()
    pairs: list[ExamplePair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            kind = rec.get("type")
            if kind == "context":
                ctx = _parse_context(rec, lineno)
                if ctx.id in contexts:
                    raise DataError(f"line {lineno}: duplicate context id {ctx.id!r}")
                contexts[ctx.id] = ctx
            elif kind == "response":
                rid = _require(rec, "id", lineno)
                text = _require(rec, "text", lineno)
                if not isinstance(text, str) or not text.strip():
                    raise DataError(f"line {lineno}: response {rid!r} has empty text")
                if rid in doc_ids:
                    raise DataError(f"line {lineno}: duplicate response id {rid!r}")
                doc_ids.add(rid)
                docs.append(ResponseDoc(id=rid, text=text))
            elif kind == "pair":
                split = _require(rec, "split", lineno)
                if split not in SPLITS:
                    raise DataError(f"line {lineno}: bad split {split!r}")
                pairs.append(
                    ExamplePair(
                        context_id=_require(rec, "context_id", lineno),
                        response_id=_require(rec, "response_id", lineno),
                        split=split,
                    )
                )
            else:
                raise DataError(f"line {lineno}: unknown record type {kind!r}")
    if not pairs:
        raise DataError(f"{path}: empty split (no pair records)")
    corpus = Corpus(docs)
    paired: set[str] = set()
    for p in pairs:
        if p.context_id not in contexts:
            raise DataError(f"pair references unknown context {p.context_id!r}")
        if p.response_id not in corpus:
            raise DataError(f"pair references unknown response {p.response_id!r}")
        if p.context_id in paired:
            raise DataError(f"context {p.context_id!r} appears in more than one pair")
        paired.add(p.context_id)
    unpaired = sorted(set(contexts) - paired)
    if unpaired:
        raise DataError(f"context {unpaired[0]!r} has no pair")
    splits: dict[str, Split] = {}
    for name in SPLITS:
        split_pairs = [p for p in pairs if p.split == name]
        if not split_pairs:
            continue
        splits[name] = Split(
            contexts=[contexts[p.context_id] for p in split_pairs],
            pairs=split_pairs,
            corpus=corpus,
        )
    return Dataset(splits=splits, corpus=corpus)


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a dataset back to JSON Lines; load(save(x)) == x."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name in SPLITS:
            if name not in dataset.splits:
                continue
            for ctx in dataset.splits[name].contexts:
                rec = {
                    "type": "context",
                    "id": ctx.id,
                    "utterances": [
                        {"text": u.text, "speaker": u.speaker, "turn": u.turn}
                        for u in ctx.utterances
                    ],
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        for doc in dataset.corpus:
            rec = {"type": "response", "id": doc.id, "text": doc.text}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        for name in SPLITS:
            if name not in dataset.splits:
                continue
            for p in dataset.splits[name].pairs:
                rec = {
                    "type": "pair",
                    "context_id": p.context_id,
                    "response_id": p.response_id,
                    "split": p.split,
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class SplitStats:
    num_contexts: int
    num_responses: int
    avg_context_words: float
    avg_response_words: float


def corpus_stats(dataset: Dataset) -> dict[str, SplitStats]:
    """Average word counts per split; contexts count all their utterances."""
    out: dict[str, SplitStats] = {}
    for name in SPLITS:
        if name not in dataset.splits:
            continue
        split = dataset.splits[name]
        if not split.contexts:
            raise DataError(f"empty split {name!r}")
        ctx_lengths = [
            sum(len(word_tokens(u.text)) for u in ctx.utterances)
            for ctx in split.contexts
        ]
        doc_lengths = [len(word_tokens(d.text)) for d in split.corpus]
        out[name] = SplitStats(
            num_contexts=len(split.contexts),
            num_responses=len(split.corpus),
            avg_context_words=sum(ctx_lengths) / len(ctx_lengths),
            avg_response_words=sum(doc_lengths) / len(doc_lengths),
        )
    return out
