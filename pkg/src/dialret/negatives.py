"""Negative sampling for contrastive training.

Four sampler kinds:

  random      uniform without replacement over the collection minus the
              positive, seeded.
  sparse_top  top-n of a (sparse) retriever ranking, positive removed.
  dense_top   same selection rule with a dense retriever.
  denoised    retrieve depth docs, drop the positive, window = the last
              `window` entries of what remains, then take the top n of the
              window by rank. Short rankings keep whatever bottom slice
              exists; any remaining deficit is filled by seeded random draws.

Retrieval kinds take a `retriever(ctx, k) -> ScoredList` callable, so the
same windowing serves both sparse and dense rankers. With depth == window ==
n the denoised rule degenerates to plain top-n.

Negative set files are JSON Lines:

    {"context_id": ..., "negatives": [...], "sampler": ...}
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .corpus import DialogueContext
from .errors import ConfigError, DataError
from .seeding import derive_seed

KINDS = ("random", "sparse_top", "dense_top", "denoised")


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    n: int = 10
    depth: int = 100
    window: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown sampler kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.kind == "denoised":
            if self.window < self.n:
                raise ConfigError(f"window {self.window} must be >= n {self.n}")
            if self.depth < self.window:
                raise ConfigError(f"depth {self.depth} must be >= window {self.window}")

    def tag(self) -> str:
        if self.kind == "denoised":
            return f"denoised[k={self.depth},m={self.window},n={self.n}]"
        return self.kind


@dataclass(frozen=True)
class NegativeSet:
    context_id: str
    negative_ids: tuple[str, ...]
    sampler_tag: str

    def __post_init__(self):
        if len(set(self.negative_ids)) != len(self.negative_ids):
            raise DataError(f"duplicate negatives for context {self.context_id!r}")


def _random_fill(
    rng: random.Random,
    collection_ids: list[str],
    exclude: set[str],
    count: int,
) -> list[str]:
    candidates = [r for r in collection_ids if r not in exclude]
    if len(candidates) < count:
        raise DataError(
            f"insufficient candidates: need {count}, have {len(candidates)}"
        )
    return rng.sample(candidates, count)


def sample_negatives(
    spec: SamplerSpec,
    ctx: DialogueContext,
    positive_id: str,
    collection_ids: list[str],
    retriever=None,
) -> NegativeSet:
    """Draw spec.n distinct negatives for one context.

    collection_ids is the full response collection in a fixed order (the
    order seeds the random draws). Retrieval kinds require `retriever`.
    """
    if spec.kind != "random" and retriever is None:
        raise ConfigError(f"sampler kind {spec.kind!r} requires a retriever")
    if spec.kind == "random":
        rng = random.Random(derive_seed(spec.seed, "negatives", "random", ctx.id))
        negs = _random_fill(rng, collection_ids, {positive_id}, spec.n)
        return NegativeSet(ctx.id, tuple(negs), spec.tag())

    if spec.kind in ("sparse_top", "dense_top"):
        ranking = retriever(ctx, spec.n + 1)
        ranked = [d for d in ranking.ids() if d != positive_id]
        if len(ranked) < spec.n:
            raise DataError(
                f"insufficient candidates: retriever returned {len(ranked)} "
                f"non-positive docs for context {ctx.id!r}, need {spec.n}"
            )
        return NegativeSet(ctx.id, tuple(ranked[: spec.n]), spec.tag())

    # denoised
    ranking = retriever(ctx, spec.depth)
    ranked = [d for d in ranking.ids() if d != positive_id]
    window = ranked[-spec.window:]
    negs = window[: spec.n]
    if len(negs) < spec.n:
        rng = random.Random(derive_seed(spec.seed, "negatives", "denoised", ctx.id))
        negs = negs + _random_fill(
            rng, collection_ids, {positive_id, *negs}, spec.n - len(negs)
        )
    return NegativeSet(ctx.id, tuple(negs), spec.tag())


def false_negative_rate(
    negsets: list[NegativeSet],
    positives: dict[str, str],
    equivalence: dict[str, set[str]],
) -> float:
    """Fraction of sampled negatives equivalent to their context's positive.

    `positives` maps context_id -> positive response id; `equivalence` maps a
    positive id to the set of response ids that would also satisfy the
    context (planted duplicates). Unlisted positives have no equivalents.
    """
    if not negsets:
        raise DataError("no negative sets given")
    total = 0
    false_hits = 0
    for ns in negsets:
        if ns.context_id not in positives:
            raise DataError(f"no positive recorded for context {ns.context_id!r}")
        dupes = equivalence.get(positives[ns.context_id], set())
        total += len(ns.negative_ids)
        false_hits += sum(1 for d in ns.negative_ids if d in dupes)
    if total == 0:
        return 0.0
    return false_hits / total


def save_negatives(negsets: list[NegativeSet], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ns in negsets:
            fh.write(
                json.dumps(
                    {
                        "context_id": ns.context_id,
                        "negatives": list(ns.negative_ids),
                        "sampler": ns.sampler_tag,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_negatives(path: str) -> list[NegativeSet]:
    out = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            cid = rec.get("context_id")
            negs = rec.get("negatives")
            if not cid or not isinstance(cid, str):
                raise DataError(f"{path}:{lineno}: missing context_id")
            if cid in seen:
                raise DataError(f"{path}:{lineno}: duplicate context {cid!r}")
            seen.add(cid)
            if not isinstance(negs, list) or not negs:
                raise DataError(f"{path}:{lineno}: negatives must be a non-empty list")
            out.append(
                NegativeSet(
                    context_id=cid,
                    negative_ids=tuple(negs),
                    sampler_tag=rec.get("sampler", ""),
                )
            )
    return out
