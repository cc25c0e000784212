"""Document expansion: append predicted context texts to responses.

Expansion records live in JSON Lines files:

    {"response_id": ..., "predictions": [...], "generator": ...}

apply_expansions appends the first num_predictions predictions to each
response's text, space separated. The resulting corpus carries an
"expanded:<generator>" provenance so a second application is refused unless
explicitly allowed (it would stack predictions again).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import Corpus, ResponseDoc, word_tokens
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class ExpansionRecord:
    response_id: str
    predictions: tuple[str, ...]
    generator: str = ""


def load_expansions(path: str) -> list[ExpansionRecord]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            rid = rec.get("response_id")
            preds = rec.get("predictions")
            if not rid or not isinstance(rid, str):
                raise DataError(f"{path}:{lineno}: missing response_id")
            if rid in seen:
                raise DataError(f"{path}:{lineno}: duplicate record for {rid!r}")
            seen.add(rid)
            if not isinstance(preds, list) or not preds:
                raise DataError(f"{path}:{lineno}: predictions must be a non-empty list")
            if not all(isinstance(p, str) for p in preds):
                raise DataError(f"{path}:{lineno}: predictions must be strings")
            records.append(
                ExpansionRecord(
                    response_id=rid,
                    predictions=tuple(preds),
                    generator=rec.get("generator", ""),
                )
            )
    return records


def save_expansions(records: list[ExpansionRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "response_id": rec.response_id,
                        "predictions": list(rec.predictions),
                        "generator": rec.generator,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def apply_expansions(
    corpus: Corpus,
    records: list[ExpansionRecord],
    num_predictions: int = 3,
    allow_restack: bool = False,
) -> Corpus:
    """New corpus with predictions appended to each covered response."""
    if num_predictions < 1:
        raise ConfigError(f"num_predictions must be >= 1, got {num_predictions}")
    if corpus.provenance != "original" and not allow_restack:
        raise DataError(
            f"corpus provenance is {corpus.provenance!r}; refusing to expand twice"
        )
    by_id = {}
    for rec in records:
        if rec.response_id not in corpus:
            raise DataError(f"expansion for unknown response {rec.response_id!r}")
        by_id[rec.response_id] = rec
    generators = sorted({rec.generator for rec in records})
    tag = "+".join(g for g in generators if g) or "unnamed"
    docs = []
    for doc in corpus:
        rec = by_id.get(doc.id)
        if rec is None:
            docs.append(doc)
            continue
        appended = " ".join(rec.predictions[:num_predictions])
        text = f"{doc.text} {appended}" if appended else doc.text
        docs.append(ResponseDoc(id=doc.id, text=text))
    return Corpus(docs, provenance=f"expanded:{tag}")


@dataclass(frozen=True)
class ExpansionStats:
    num_expanded: int
    avg_appended_words: float
    pct_new_words: float


def expansion_stats(original: Corpus, expanded: Corpus) -> ExpansionStats:
    """Average appended length and share of appended words not in the original.

    Averages run over responses whose text actually changed. A response whose
    appended portion repeats only words already present contributes 0 percent.
    """
    if set(original.ids()) != set(expanded.ids()):
        raise DataError("corpora must contain the same response ids")
    lengths = []
    pcts = []
    for doc in original:
        new_doc = expanded.get(doc.id)
        if new_doc.text == doc.text:
            continue
        if not new_doc.text.startswith(doc.text):
            raise DataError(f"response {doc.id!r}: expanded text does not extend the original")
        appended = new_doc.text[len(doc.text):]
        appended_tokens = word_tokens(appended)
        original_vocab = set(word_tokens(doc.text))
        lengths.append(len(appended_tokens))
        if appended_tokens:
            new_count = sum(1 for t in appended_tokens if t not in original_vocab)
            pcts.append(100.0 * new_count / len(appended_tokens))
        else:
            pcts.append(0.0)
    if not lengths:
        return ExpansionStats(num_expanded=0, avg_appended_words=0.0, pct_new_words=0.0)
    return ExpansionStats(
        num_expanded=len(lengths),
        avg_appended_words=sum(lengths) / len(lengths),
        pct_new_words=sum(pcts) / len(pcts),
    )
