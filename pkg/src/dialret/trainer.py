"""Contrastive training of the toy encoder on (context, response) pairs.

Scores within a batch of B pairs form the matrix S with S[i][j] =
dot(encode(context_i), encode(candidate_j)). Candidates are the B positives
(column j = positive of pair j) followed by any explicit negatives, flattened
in batch order, so C >= B and the diagonal holds each pair's positive.

Loss variants over S:

  softmax_full   J = -(1/B) sum_i [ S_ii - log sum_j exp(S_ij) ]
                 gradient dJ/dS = (softmax_rows(S) - I) / B
  paper_literal  the sum over j excludes j = i, i.e. the positive's own
                 column is removed from the log-partition; needs C >= 2.

Optimization is plain SGD with decoupled weight decay,

    theta <- theta * (1 - lr_t * wd) - lr_t * grad,

with lr_t ramping linearly over the warmup steps and constant afterwards.
Every eval_every steps (and after the final step) the encoder is scored by
re-ranking MAP over fixed candidate sets; the best-MAP state is returned
(ties keep the earliest).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .corpus import DialogueContext, ResponseDoc, concat_context
from .dense import ToyEncoder, encoder_tokens
from .errors import ConfigError, DataError, TrainingDiverged
from .evaluation import rerank_map
from .seeding import derive_seed

LOSS_VARIANTS = ("softmax_full", "paper_literal")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 5
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    total_steps: int = 10000
    warmup_fraction: float = 0.10
    eval_every: int = 100
    seed: int = 0
    loss_variant: str = "softmax_full"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.total_steps < 0:
            raise ConfigError(f"total_steps must be >= 0, got {self.total_steps}")
        if not (0.0 <= self.warmup_fraction <= 1.0):
            raise ConfigError(f"warmup_fraction must be in [0, 1], got {self.warmup_fraction}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.loss_variant not in LOSS_VARIANTS:
            raise ConfigError(f"unknown loss variant {self.loss_variant!r}")


@dataclass
class TrainBatch:
    contexts: list[DialogueContext]
    positives: list[ResponseDoc]
    negatives: list[list[ResponseDoc]] = field(default_factory=list)

    def __post_init__(self):
        if not self.contexts:
            raise DataError("empty batch")
        if len(self.contexts) != len(self.positives):
            raise DataError("contexts and positives must align")
        if not self.negatives:
            self.negatives = [[] for _ in self.contexts]
        if len(self.negatives) != len(self.contexts):
            raise DataError("negatives must align with contexts")
        ids = [c.id for c in self.contexts]
        if len(set(ids)) != len(ids):
            raise DataError("a context appears twice in one batch")

    def candidate_texts(self) -> list[str]:
        texts = [doc.text for doc in self.positives]
        for negs in self.negatives:
            texts.extend(doc.text for doc in negs)
        return texts


def _pool_rows(encoder: ToyEncoder, row_lists: list[list[int]]) -> np.ndarray:
    out = np.zeros((len(row_lists), encoder.dim), dtype=np.float64)
    for i, rows in enumerate(row_lists):
        if rows:
            out[i] = encoder.table[rows].mean(axis=0)
    return out


def _batch_rows(encoder: ToyEncoder, batch: TrainBatch):
    ctx_rows = [
        encoder.token_rows(encoder_tokens(concat_context(c))) for c in batch.contexts
    ]
    cand_rows = [
        encoder.token_rows(encoder_tokens(t)) for t in batch.candidate_texts()
    ]
    return ctx_rows, cand_rows


def batch_scores(encoder: ToyEncoder, batch: TrainBatch) -> np.ndarray:
    """B x C score matrix; column j of the first B is pair j's positive."""
    ctx_rows, cand_rows = _batch_rows(encoder, batch)
    q = _pool_rows(encoder, ctx_rows)
    r = _pool_rows(encoder, cand_rows)
    with np.errstate(over="ignore", invalid="ignore"):
        return q @ r.T


def _logsumexp_rows(s: np.ndarray) -> np.ndarray:
    m = s.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(s - m).sum(axis=1, keepdims=True)))[:, 0]


def mnrl_loss(scores: np.ndarray, variant: str = "softmax_full") -> float:
    """Multiple-negatives ranking loss of a B x C score matrix."""
    j, _ = _loss_and_grad_scores(np.asarray(scores, dtype=np.float64), variant)
    return j


def _loss_and_grad_scores(s: np.ndarray, variant: str):
    if variant not in LOSS_VARIANTS:
        raise ConfigError(f"unknown loss variant {variant!r}")
    if s.ndim != 2:
        raise DataError("score matrix must be 2-dimensional")
    b, c = s.shape
    if b < 1 or c < b:
        raise DataError(f"score matrix needs C >= B >= 1, got {b}x{c}")
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_grad_unchecked(s, variant, b, c)


def _loss_and_grad_unchecked(s: np.ndarray, variant: str, b: int, c: int):
    if variant == "softmax_full":
        lse = _logsumexp_rows(s)
        loss = -(np.diagonal(s)[:b] - lse).sum() / b
        p = np.exp(s - lse[:, None])
        grad = p.copy()
        grad[np.arange(b), np.arange(b)] -= 1.0
        return float(loss), grad / b
    # paper_literal: the positive's own column leaves the partition
    if c < 2:
        raise DataError("paper_literal needs at least 2 candidates per row")
    mask = np.ones_like(s, dtype=bool)
    mask[np.arange(b), np.arange(b)] = False
    neg = np.where(mask, s, -np.inf)
    lse = _logsumexp_rows(neg)
    loss = -(np.diagonal(s)[:b] - lse).sum() / b
    p = np.exp(neg - lse[:, None])
    p[np.arange(b), np.arange(b)] = 0.0
    grad = p
    grad[np.arange(b), np.arange(b)] = -1.0
    return float(loss), grad / b


def _table_gradient(
    encoder: ToyEncoder, batch: TrainBatch, variant: str
) -> tuple[float, dict[int, np.ndarray]]:
    """Loss and gradient w.r.t. the touched embedding-table rows."""
    ctx_rows, cand_rows = _batch_rows(encoder, batch)
    q = _pool_rows(encoder, ctx_rows)
    r = _pool_rows(encoder, cand_rows)
    with np.errstate(over="ignore", invalid="ignore"):
        s = q @ r.T
        loss, d_s = _loss_and_grad_scores(s, variant)
        d_q = d_s @ r
        d_r = d_s.T @ q
    grads: dict[int, np.ndarray] = {}
    for vec_grad, rows in zip(np.vstack([d_q, d_r]), ctx_rows + cand_rows):
        if not rows:
            continue
        share = vec_grad / len(rows)
        for row in rows:
            acc = grads.get(row)
            if acc is None:
                grads[row] = share.copy()
            else:
                acc += share
    return loss, grads


def gradient_check(
    encoder: ToyEncoder,
    batch: TrainBatch,
    variant: str = "softmax_full",
    epsilon: float = 1e-5,
) -> float:
    """Max relative error of the analytic gradient vs central differences."""
    loss, grads = _table_gradient(encoder, batch, variant)
    del loss
    probe = encoder.copy()
    worst = 0.0
    for row, grad_row in sorted(grads.items()):
        for col in range(encoder.dim):
            original = probe.table[row, col]
            probe.table[row, col] = original + epsilon
            up = mnrl_loss(batch_scores(probe, batch), variant)
            probe.table[row, col] = original - epsilon
            down = mnrl_loss(batch_scores(probe, batch), variant)
            probe.table[row, col] = original
            numeric = (up - down) / (2.0 * epsilon)
            analytic = grad_row[col]
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst


@dataclass
class RerankSet:
    context: DialogueContext
    candidates: list[ResponseDoc]
    positive_id: str

    def __post_init__(self):
        ids = [d.id for d in self.candidates]
        if len(set(ids)) != len(ids):
            raise DataError(f"duplicate candidates for context {self.context.id!r}")
        if self.positive_id not in ids:
            raise DataError(f"candidates for {self.context.id!r} miss the positive")


def build_rerank_sets(
    pairs: list[tuple[DialogueContext, ResponseDoc]],
    collection: list[ResponseDoc],
    num_candidates: int = 10,
    seed: int = 0,
) -> list[RerankSet]:
    """Fixed positive + seeded random distractors per context."""
    sets = []
    for ctx, positive in pairs:
        others = [d for d in collection if d.id != positive.id]
        if len(others) < num_candidates - 1:
            raise DataError(f"not enough distractors for context {ctx.id!r}")
        rng = random.Random(derive_seed(seed, "rerank", ctx.id))
        sampled = rng.sample(others, num_candidates - 1)
        sets.append(RerankSet(ctx, [positive] + sampled, positive.id))
    return sets


def evaluate_rerank_map(encoder: ToyEncoder, sets: list[RerankSet]) -> float:
    runs = {}
    qrels = {}
    for rs in sets:
        qvec = encoder.encode_context(rs.context)
        runs[rs.context.id] = [
            (doc.id, float(np.dot(qvec, encoder.encode(doc.text))))
            for doc in rs.candidates
        ]
        qrels[rs.context.id] = {rs.positive_id}
    return rerank_map(runs, qrels)


@dataclass
class TrainHistory:
    losses: list[float]
    evals: list[tuple[int, float]]
    best_step: int
    best_map: float | None


def train(
    encoder: ToyEncoder,
    pairs: list[tuple[DialogueContext, ResponseDoc]],
    config: TrainConfig = TrainConfig(),
    negatives: dict[str, list[ResponseDoc]] | None = None,
    rerank_sets: list[RerankSet] | None = None,
) -> tuple[ToyEncoder, TrainHistory]:
    """SGD over shuffled batches; returns the best checkpoint and history.

    The input encoder is not modified. `negatives` maps context ids to
    explicit negative documents shared with the whole batch; contexts
    without an entry rely on in-batch negatives only.
    """
    if not pairs:
        raise DataError("no training pairs")
    if config.batch_size > len(pairs):
        raise ConfigError(
            f"batch_size {config.batch_size} exceeds {len(pairs)} pairs"
        )
    negatives = negatives or {}
    for cid in negatives:
        if not any(ctx.id == cid for ctx, _ in pairs):
            raise DataError(f"negatives given for unknown context {cid!r}")
    model = encoder.copy()
    if config.total_steps == 0:
        return model, TrainHistory(losses=[], evals=[], best_step=0, best_map=None)

    warmup_steps = int(round(config.warmup_fraction * config.total_steps))
    order_rng = random.Random(derive_seed(config.seed, "batch-order"))
    indices: list[int] = []
    losses: list[float] = []
    evals: list[tuple[int, float]] = []
    best_map = -1.0
    best_step = config.total_steps
    best_table = None

    for t in range(config.total_steps):
        if len(indices) < config.batch_size:
            fresh = list(range(len(pairs)))
            order_rng.shuffle(fresh)
            indices = fresh
        take, indices = indices[: config.batch_size], indices[config.batch_size:]
        batch_pairs = [pairs[i] for i in take]
        batch = TrainBatch(
            contexts=[ctx for ctx, _ in batch_pairs],
            positives=[doc for _, doc in batch_pairs],
            negatives=[negatives.get(ctx.id, []) for ctx, _ in batch_pairs],
        )
        loss, grads = _table_gradient(model, batch, config.loss_variant)
        if not np.isfinite(loss):
            raise TrainingDiverged(t + 1, loss)
        losses.append(loss)
        lr = config.learning_rate
        if t < warmup_steps:
            lr = config.learning_rate * (t + 1) / warmup_steps
        if config.weight_decay > 0.0:
            model.table *= 1.0 - lr * config.weight_decay
        for row, grad_row in grads.items():
            model.table[row] -= lr * grad_row

        step = t + 1
        if rerank_sets and (step % config.eval_every == 0 or step == config.total_steps):
            if not evals or evals[-1][0] != step:
                score = evaluate_rerank_map(model, rerank_sets)
                evals.append((step, score))
                if score > best_map:
                    best_map = score
                    best_step = step
                    best_table = model.table.copy()

    if best_table is not None:
        model.table = best_table
        history_best = best_map
    else:
        history_best = None
    return model, TrainHistory(
        losses=losses, evals=evals, best_step=best_step, best_map=history_best
    )
