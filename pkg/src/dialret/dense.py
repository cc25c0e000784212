"""Dense retrieval: toy mean-pooling encoder, exhaustive search, embedding IO.

A text embeds as the mean of the embedding-table rows of its known tokens
(occurrences counted); a text with no known token embeds as the zero vector.
The relevance score of a context/response pair is the plain dot product.

Embedding files (extension-agnostic, magic "DEMB") are little-endian binary:

    magic   4 bytes  b"DEMB"
    version u32      1
    dim     u32      > 0
    count   u64      number of records
    prov    u32 length + that many UTF-8 bytes (provenance string)
    records count times: u32 id length + id UTF-8 bytes + dim float32 values

Vectors are materialized as float32, so save/load round-trips bit-exactly.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .corpus import Corpus, DialogueContext, concat_context
from .errors import ConfigError, DataError
from .ranking import ScoredList, top_k
from .seeding import derive_seed

MAGIC = b"DEMB"
VERSION = 1

# keeps the [U]/[T] separator markers as tokens, unlike the sparse analyzer
_ENC_TOKEN_RE = re.compile(r"\[[ut]\]|[0-9a-z]+")


def encoder_tokens(text: str) -> list[str]:
    return _ENC_TOKEN_RE.findall(text.lower())


class EmbeddingStore:
    """Ordered id -> float32 vector map with exhaustive dot-product search."""

    def __init__(self, ids: list[str], matrix: np.ndarray, provenance: str = ""):
        if matrix.ndim != 2:
            raise DataError("embedding matrix must be 2-dimensional")
        if len(ids) != matrix.shape[0]:
            raise DataError("id count does not match matrix rows")
        if matrix.shape[1] < 1:
            raise DataError("embedding dim must be >= 1")
        if not np.all(np.isfinite(matrix)):
            raise DataError("embeddings must be finite")
        self.ids = list(ids)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self.provenance = provenance
        self._row: dict[str, int] = {}
        for i, id_ in enumerate(self.ids):
            if id_ in self._row:
                raise DataError(f"duplicate embedding id {id_!r}")
            self._row[id_] = i

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, id_: str) -> bool:
        return id_ in self._row

    def vector(self, id_: str) -> np.ndarray:
        try:
            return self.matrix[self._row[id_]]
        except KeyError:
            raise DataError(f"unknown embedding id {id_!r}") from None


def dot_score(query: np.ndarray, doc: np.ndarray) -> float:
    query = np.asarray(query)
    doc = np.asarray(doc)
    if query.shape != doc.shape:
        raise DataError(f"dim mismatch: {query.shape} vs {doc.shape}")
    return float(np.dot(query.astype(np.float64), doc.astype(np.float64)))


def dense_search(
    store: EmbeddingStore,
    query: np.ndarray,
    k: int = 10,
    query_id: str = "",
) -> ScoredList:
    """Exhaustive top-k by dot product; ties break by ascending doc id.

    Unlike BM25, zero scores are kept: a zero query vector returns the first
    k documents in doc_id order, all with score 0.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (store.dim,):
        raise DataError(f"query dim {query.shape} does not match store dim {store.dim}")
    mat = store.matrix.astype(np.float64)
    # per-row np.dot, not a matvec: BLAS gemv rounds differently at the last
    # bit and search must agree exactly with per-pair dot_score
    scores = {id_: float(np.dot(mat[i], query)) for i, id_ in enumerate(store.ids)}
    return top_k(scores, k, query_id=query_id)


class ToyEncoder:
    """Mean-pooling bag-of-tokens encoder over a learned embedding table."""

    def __init__(self, vocab: list[str], table: np.ndarray):
        if len(vocab) != table.shape[0]:
            raise DataError("vocab size does not match table rows")
        if len(set(vocab)) != len(vocab):
            raise DataError("vocab contains duplicates")
        self.vocab = list(vocab)
        self.table = np.array(table, dtype=np.float64)
        self.row = {tok: i for i, tok in enumerate(self.vocab)}

    @classmethod
    def init_random(cls, vocab, dim: int, seed: int = 0, scale: float = 0.1):
        vocab = sorted(set(vocab))
        if not vocab:
            raise DataError("empty vocabulary")
        if dim < 1:
            raise ConfigError(f"dim must be >= 1, got {dim}")
        rng = np.random.default_rng(derive_seed(seed, "toy-encoder-init"))
        table = rng.normal(0.0, scale, size=(len(vocab), dim))
        return cls(vocab, table)

    @property
    def dim(self) -> int:
        return int(self.table.shape[1])

    def copy(self) -> "ToyEncoder":
        return ToyEncoder(self.vocab, self.table.copy())

    def token_rows(self, tokens: list[str]) -> list[int]:
        return [self.row[t] for t in tokens if t in self.row]

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        rows = self.token_rows(tokens)
        if not rows:
            return np.zeros(self.dim, dtype=np.float64)
        return self.table[rows].mean(axis=0)

    def encode(self, text: str) -> np.ndarray:
        return self.encode_tokens(encoder_tokens(text))

    def encode_context(self, ctx: DialogueContext) -> np.ndarray:
        return self.encode(concat_context(ctx))


def corpus_vocabulary(corpus: Corpus, contexts=()) -> list[str]:
    """Sorted encoder-token vocabulary of a corpus plus optional contexts."""
    vocab = set()
    for doc in corpus:
        vocab.update(encoder_tokens(doc.text))
    for ctx in contexts:
        vocab.update(encoder_tokens(concat_context(ctx)))
    return sorted(vocab)


def encode_corpus(encoder: ToyEncoder, corpus: Corpus, provenance: str = "") -> EmbeddingStore:
    matrix = np.stack([encoder.encode(doc.text) for doc in corpus])
    return EmbeddingStore(corpus.ids(), matrix, provenance=provenance)


def encode_contexts(
    encoder: ToyEncoder, contexts: list[DialogueContext], provenance: str = ""
) -> EmbeddingStore:
    matrix = np.stack([encoder.encode_context(ctx) for ctx in contexts])
    return EmbeddingStore([c.id for c in contexts], matrix, provenance=provenance)


def save_encoder(encoder: ToyEncoder, path: str, provenance: str = "toy-encoder") -> None:
    """Checkpoint = embedding file whose ids are the vocabulary, row order."""
    store = EmbeddingStore(encoder.vocab, encoder.table, provenance=provenance)
    save_embeddings(store, path)


def load_encoder(path: str) -> ToyEncoder:
    store = load_embeddings(path)
    return ToyEncoder(store.ids, store.matrix.astype(np.float64))


def save_embeddings(store: EmbeddingStore, path: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    prov = store.provenance.encode("utf-8")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", VERSION, store.dim, len(store)))
        fh.write(struct.pack("<I", len(prov)))
        fh.write(prov)
        for i, id_ in enumerate(store.ids):
            raw = id_.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(store.matrix[i].tobytes())
    tmp.replace(path)


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise DataError(f"truncated embedding file while reading {what}")
    return data


def load_embeddings(path: str) -> EmbeddingStore:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise DataError(f"wrong magic {magic!r}, expected {MAGIC!r}")
        version, dim, count = struct.unpack("<IIQ", _read_exact(fh, 16, "header"))
        if version != VERSION:
            raise DataError(f"unsupported embedding file version {version}")
        if dim < 1:
            raise DataError("embedding dim must be >= 1")
        (prov_len,) = struct.unpack("<I", _read_exact(fh, 4, "provenance length"))
        provenance = _read_exact(fh, prov_len, "provenance").decode("utf-8")
        ids = []
        vectors = np.empty((count, dim), dtype=np.float32)
        for i in range(count):
            (id_len,) = struct.unpack("<I", _read_exact(fh, 4, "id length"))
            ids.append(_read_exact(fh, id_len, "id").decode("utf-8"))
            raw = _read_exact(fh, 4 * dim, f"vector {i}")
            vectors[i] = np.frombuffer(raw, dtype="<f4")
        if fh.read(1):
            raise DataError("trailing data after the last embedding record")
    return EmbeddingStore(ids, vectors, provenance=provenance)
