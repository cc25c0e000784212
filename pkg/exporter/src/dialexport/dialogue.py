"""Reader for dialogue retrieval dataset files.

A dataset file is UTF-8 JSON Lines with three record types:

  {"type": "context", "id": ..., "utterances": [{"text", "speaker", "turn"}]}
  {"type": "response", "id": ..., "text": ...}
  {"type": "pair", "context_id": ..., "response_id": ..., "split": ...}

Responses form one shared collection; each pair assigns its context to a
split. This module implements the documented file contract directly so the
exporter stays decoupled from the retrieval engine that consumes its output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DataError

SPLITS = ("train", "valid", "test")
SPEAKERS = ("seeker", "provider", "unknown")


@dataclass(frozen=True)
class Utterance:
    text: str
    speaker: str = "unknown"


@dataclass(frozen=True)
class DialogueContext:
    id: str
    utterances: tuple[Utterance, ...]


@dataclass(frozen=True)
class ResponseDoc:
    id: str
    text: str


@dataclass
class Dataset:
    responses: list[ResponseDoc]
    contexts: dict[str, DialogueContext]
    # split name -> ordered (context_id, response_id) pairs
    pairs: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def response_texts(self) -> list[tuple[str, str]]:
        return [(d.id, d.text) for d in self.responses]

    def split_pairs(self, split: str) -> list[tuple[str, str]]:
        if split not in SPLITS:
            raise DataError(f"unknown split {split!r}")
        pairs = self.pairs.get(split, [])
        if not pairs:
            raise DataError(f"empty split {split!r}")
        return pairs


def concat_context(ctx: DialogueContext) -> str:
    """Join utterances with [U]/[T] markers.

    The marker after utterance k is [T] when the speaker changes at that
    boundary and [U] otherwise; when every speaker is unknown the markers
    alternate starting with [U]. A single utterance is returned bare.
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


def last_utterance(ctx: DialogueContext) -> str:
    return ctx.utterances[-1].text


def _fail(path: str, lineno: int, msg: str):
    raise DataError(f"{path}:{lineno}: {msg}")


def load_dialogues(path: str) -> Dataset:
    responses: list[ResponseDoc] = []
    response_ids: set[str] = set()
    contexts: dict[str, DialogueContext] = {}
    pairs: dict[str, list[tuple[str, str]]] = {}
    paired: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                _fail(path, lineno, f"invalid JSON ({exc.msg})")
            kind = rec.get("type")
            if kind == "response":
                rid, text = rec.get("id"), rec.get("text")
                if not rid or not isinstance(rid, str):
                    _fail(path, lineno, "response needs a non-empty string id")
                if not isinstance(text, str) or not text.strip():
                    _fail(path, lineno, f"response {rid!r} has empty text")
                if rid in response_ids:
                    _fail(path, lineno, f"duplicate response id {rid!r}")
                response_ids.add(rid)
                responses.append(ResponseDoc(id=rid, text=text))
            elif kind == "context":
                cid, raw = rec.get("id"), rec.get("utterances")
                if not cid or not isinstance(cid, str):
                    _fail(path, lineno, "context needs a non-empty string id")
                if cid in contexts:
                    _fail(path, lineno, f"duplicate context id {cid!r}")
                if not isinstance(raw, list) or not raw:
                    _fail(path, lineno, f"context {cid!r} needs utterances")
                utts = []
                for u in raw:
                    text = u.get("text")
                    if not isinstance(text, str) or not text.strip():
                        _fail(path, lineno, f"context {cid!r} has an empty utterance")
                    speaker = u.get("speaker", "unknown")
                    if speaker not in SPEAKERS:
                        _fail(path, lineno, f"bad speaker {speaker!r}")
                    utts.append(Utterance(text=text, speaker=speaker))
                contexts[cid] = DialogueContext(id=cid, utterances=tuple(utts))
            elif kind == "pair":
                split = rec.get("split")
                if split not in SPLITS:
                    _fail(path, lineno, f"bad split {split!r}")
                cid, rid = rec.get("context_id"), rec.get("response_id")
                if not cid or not rid:
                    _fail(path, lineno, "pair needs context_id and response_id")
                if cid in paired:
                    _fail(path, lineno, f"context {cid!r} appears in more than one pair")
                paired.add(cid)
                pairs.setdefault(split, []).append((cid, rid))
            else:
                _fail(path, lineno, f"unknown record type {kind!r}")
    for split_pairs in pairs.values():
        for cid, rid in split_pairs:
            if cid not in contexts:
                raise DataError(f"pair references unknown context {cid!r}")
            if rid not in response_ids:
                raise DataError(f"pair references unknown response {rid!r}")
    if not responses:
        raise DataError(f"{path}: no response records")
    return Dataset(responses=responses, contexts=contexts, pairs=pairs)
