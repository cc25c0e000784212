"""Synthetic lexical datasets for end-to-end experiments.

Each example owns a key pair (one "a" token, one "b" token) planted in both
the context and its positive response; everything else is filler drawn from
a shared vocabulary. Distractor responses carry unused key pairs. Splits
share the component tokens but not the combinations, so an encoder that
learns the components can rank held-out combinations.

plant_duplicates adds near-duplicates of training positives (same key pair,
different filler) to the collection, plus the equivalence map that marks
them as false negatives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Corpus, Dataset, DialogueContext, ExamplePair, ResponseDoc, Split, Utterance
from .errors import ConfigError
from .seeding import derive_seed


@dataclass(frozen=True)
class LexicalSpec:
    num_train: int = 1000
    num_valid: int = 100
    num_test: int = 200
    num_distractors: int = 700
    num_components: int = 50
    num_fillers: int = 30
    seed: int = 0

    def __post_init__(self):
        total = self.num_train + self.num_valid + self.num_test + self.num_distractors
        if self.num_components < 2 or total > self.num_components ** 2:
            raise ConfigError(
                f"{total} combinations do not fit {self.num_components}^2 key pairs"
            )
        if min(self.num_train, self.num_valid, self.num_test) < 1:
            raise ConfigError("every split needs at least one pair")
        if self.num_fillers < 6:
            raise ConfigError("need at least 6 filler tokens")
        if self.num_train < self.num_components:
            raise ConfigError("train split too small to cover all components")


def _response_text(rng: random.Random, fillers: list[str], a: str, b: str) -> str:
    pads = rng.sample(fillers, 3)
    return f"{pads[0]} {a} {b} {pads[1]} {pads[2]}"


def _context(rng: random.Random, fillers: list[str], a: str, b: str, cid: str) -> DialogueContext:
    pads = rng.sample(fillers, 5)
    first = f"{pads[0]} {pads[1]} {a} {b} {pads[2]}"
    second = f"{pads[3]} {a} {b} {pads[4]}"
    return DialogueContext(
        id=cid,
        utterances=(
            Utterance(text=first, speaker="seeker", turn=0),
            Utterance(text=second, speaker="seeker", turn=1),
        ),
    )


def lexical_dataset(spec: LexicalSpec = LexicalSpec()) -> Dataset:
    rng = random.Random(derive_seed(spec.seed, "lexical-dataset"))
    a_keys = [f"qa{i:03d}" for i in range(spec.num_components)]
    b_keys = [f"qb{i:03d}" for i in range(spec.num_components)]
    fillers = [f"fl{i:03d}" for i in range(spec.num_fillers)]

    # diagonal first so every component token occurs in the train split
    diagonal = [(i, i) for i in range(spec.num_components)]
    rest = [
        (i, j)
        for i in range(spec.num_components)
        for j in range(spec.num_components)
        if i != j
    ]
    rng.shuffle(rest)
    combos = diagonal + rest

    docs: list[ResponseDoc] = []
    contexts: dict[str, list[DialogueContext]] = {"train": [], "valid": [], "test": []}
    pairs: dict[str, list[ExamplePair]] = {"train": [], "valid": [], "test": []}
    cursor = 0
    for split, count in (
        ("train", spec.num_train),
        ("valid", spec.num_valid),
        ("test", spec.num_test),
    ):
        for n in range(count):
            i, j = combos[cursor]
            cursor += 1
            a, b = a_keys[i], b_keys[j]
            rid = f"resp-{split}-{n:05d}"
            cid = f"ctx-{split}-{n:05d}"
            docs.append(ResponseDoc(id=rid, text=_response_text(rng, fillers, a, b)))
            contexts[split].append(_context(rng, fillers, a, b, cid))
            pairs[split].append(ExamplePair(context_id=cid, response_id=rid, split=split))
    for n in range(spec.num_distractors):
        i, j = combos[cursor]
        cursor += 1
        docs.append(
            ResponseDoc(
                id=f"resp-dstr-{n:05d}",
                text=_response_text(rng, fillers, a_keys[i], b_keys[j]),
            )
        )

    corpus = Corpus(docs)
    splits = {
        name: Split(contexts=contexts[name], pairs=pairs[name], corpus=corpus)
        for name in ("train", "valid", "test")
    }
    return Dataset(splits=splits, corpus=corpus)


def _key_tokens(doc: ResponseDoc) -> tuple[str, str]:
    words = doc.text.split()
    a = next(w for w in words if w.startswith("qa"))
    b = next(w for w in words if w.startswith("qb"))
    return a, b


def plant_duplicates(
    dataset: Dataset,
    per_positive: int = 5,
    split: str = "train",
    seed: int = 0,
) -> tuple[Dataset, dict[str, set[str]]]:
    """Copy each positive of a split with fresh filler; same key pair.

    Returns the enlarged dataset and positive_id -> {duplicate ids}.
    """
    if per_positive < 1:
        raise ConfigError(f"per_positive must be >= 1, got {per_positive}")
    rng = random.Random(derive_seed(seed, "plant-duplicates", split))
    fillers = sorted(
        {w for doc in dataset.corpus for w in doc.text.split() if w.startswith("fl")}
    )
    target = dataset.split(split)
    docs = list(dataset.corpus.docs)
    equivalence: dict[str, set[str]] = {}
    for pair in target.pairs:
        positive = dataset.corpus.get(pair.response_id)
        a, b = _key_tokens(positive)
        dupes = set()
        for k in range(per_positive):
            dup_id = f"{positive.id}-dup{k}"
            docs.append(ResponseDoc(id=dup_id, text=_response_text(rng, fillers, a, b)))
            dupes.add(dup_id)
        equivalence[positive.id] = dupes
    corpus = Corpus(docs)
    splits = {
        name: Split(contexts=s.contexts, pairs=s.pairs, corpus=corpus)
        for name, s in dataset.splits.items()
    }
    return Dataset(splits=splits, corpus=corpus), equivalence
