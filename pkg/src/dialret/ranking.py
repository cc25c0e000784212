"""Ranked result lists and TREC-style run file round-trip.

Run files are 6 columns separated by single spaces:

    query_id Q0 doc_id rank score tag

with rank starting at 1 and scores formatted to 6 decimal places. The order
over (score, doc_id) is score descending, doc_id ascending on ties.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError


def rank_key(entry: tuple[str, float]):
    doc_id, score = entry
    return (-score, doc_id)


@dataclass(frozen=True)
class ScoredList:
    """Entries (doc_id, score) strictly sorted by score desc, doc_id asc."""

    query_id: str
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        seen = set()
        prev = None
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise DataError(f"duplicate doc id {doc_id!r} in scored list")
            seen.add(doc_id)
            if prev is not None:
                p_doc, p_score = prev
                if score > p_score or (score == p_score and doc_id <= p_doc):
                    raise DataError("scored list is not sorted")
            prev = (doc_id, score)

    def ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def top_k(
    scores: dict[str, float],
    k: int,
    query_id: str = "",
    drop_zeros: bool = False,
) -> ScoredList:
    items = scores.items()
    if drop_zeros:
        items = [(d, s) for d, s in items if s != 0.0]
    ranked = sorted(items, key=rank_key)[:k]
    return ScoredList(query_id=query_id, entries=tuple(ranked))


def write_run(path: str, results: list[ScoredList], tag: str) -> None:
    if not tag or any(c.isspace() for c in tag):
        raise DataError(f"run tag must be non-empty without whitespace: {tag!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for result in results:
            for rank, (doc_id, score) in enumerate(result.entries, start=1):
                fh.write(
                    f"{result.query_id} Q0 {doc_id} {rank} {score:.6f} {tag}\n"
                )


def read_run(path: str) -> dict[str, list[tuple[str, float]]]:
    """Parse a run file into query_id -> [(doc_id, score)] in rank order."""
    runs: dict[str, list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise DataError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            query_id, q0, doc_id, rank_s, score_s, _tag = parts
            if q0 != "Q0":
                raise DataError(f"{path}:{lineno}: second column must be Q0")
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad rank or score") from None
            rows = runs.setdefault(query_id, [])
            if rank != len(rows) + 1:
                raise DataError(f"{path}:{lineno}: rank {rank} out of sequence")
            if any(d == doc_id for d, _ in rows):
                raise DataError(f"{path}:{lineno}: duplicate doc {doc_id!r}")
            rows.append((doc_id, score))
    return runs
