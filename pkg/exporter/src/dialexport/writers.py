"""Writers for the two export formats, with pre-write contract checks.

Expansion records are JSON Lines:

    {"response_id": ..., "predictions": [...], "generator": ...}

Embedding files (magic "DEMB") are little-endian binary:

    magic   4 bytes  b"DEMB"
    version u32      1
    dim     u32      > 0
    count   u64      number of records
    prov    u32 length + that many UTF-8 bytes (provenance string)
    records count times: u32 id length + id UTF-8 bytes + dim float32 values

Both writers validate against the consumer's loader rules before touching the
filesystem and write atomically (temp file + rename), so a crash or a contract
violation never leaves a partial or rejectable file behind.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

DEMB_MAGIC = b"DEMB"
DEMB_VERSION = 1


@dataclass(frozen=True)
class ExpansionRecord:
    response_id: str
    predictions: tuple[str, ...]
    generator: str = ""


def _check_expansions(records: list[ExpansionRecord]) -> None:
    seen: set[str] = set()
    for rec in records:
        if not rec.response_id or not isinstance(rec.response_id, str):
            raise DataError("expansion record needs a non-empty response_id")
        if rec.response_id in seen:
            raise DataError(f"duplicate expansion record for {rec.response_id!r}")
        seen.add(rec.response_id)
        if not rec.predictions:
            raise DataError(f"record {rec.response_id!r} has no predictions")
        if not all(isinstance(p, str) for p in rec.predictions):
            raise DataError(f"record {rec.response_id!r} has non-string predictions")


def write_expansions(records: list[ExpansionRecord], path: str) -> None:
    _check_expansions(records)
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
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
    tmp.replace(target)


def write_embeddings(
    ids: list[str], matrix: np.ndarray, path: str, provenance: str = ""
) -> None:
    if matrix.ndim != 2:
        raise DataError("embedding matrix must be 2-dimensional")
    if len(ids) != matrix.shape[0]:
        raise DataError("id count does not match matrix rows")
    if matrix.shape[1] < 1:
        raise DataError("embedding dim must be >= 1")
    if len(set(ids)) != len(ids):
        raise DataError("embedding ids must be unique")
    if any(not i for i in ids):
        raise DataError("embedding ids must be non-empty")
    # the format stores float32; cast once so the file round-trips bit-exactly
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if not np.all(np.isfinite(matrix)):
        raise DataError("embeddings must be finite")
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(DEMB_MAGIC)
        fh.write(struct.pack("<IIQ", DEMB_VERSION, matrix.shape[1], len(ids)))
        prov = provenance.encode("utf-8")
        fh.write(struct.pack("<I", len(prov)))
        fh.write(prov)
        for i, id_ in enumerate(ids):
            raw = id_.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(matrix[i].tobytes())
    tmp.replace(target)
