"""Export jobs: one declarative description per emitted file.

A job names a mode, a dataset, a model identifier, and an output path.
Expansion modes fine-tune the generator on the train split (response text
in, context text out), then sample predictions for every response in the
collection. The two modes differ only in the fine-tuning target:

  expand_full            the utterances joined with [U]/[T] markers
  expand_last_utterance  the final utterance text only

Embed mode writes mean-pooled encoder embeddings of either the whole
response collection or one split's marker-joined contexts. Provenance
strings record the model identifier plus the formatting choices, so a
consumer can tell exactly how a file was produced.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dialogue import SPLITS, concat_context, last_utterance, load_dialogues
from .errors import ConfigError
from .modeling import (
    encode_texts,
    finetune_generator,
    load_encoder,
    load_generator,
    load_tokenizer,
    sample_predictions,
)
from .writers import ExpansionRecord, write_embeddings, write_expansions

MODES = ("expand_full", "expand_last_utterance", "embed")
EMBED_TEXTS = ("responses", "contexts")


@dataclass
class ExportJob:
    mode: str
    dataset: str
    model: str
    output: str
    # expansion settings
    num_samples: int = 3
    top_k: int = 10
    max_new_tokens: int = 64
    epochs: int = 2
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    batch_size: int = 5
    save_model: str | None = None
    # embed settings
    texts: str = "responses"
    split: str = "test"
    # shared
    infer_batch_size: int = 16
    max_source_length: int = 512
    max_target_length: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if not self.dataset or not self.model or not self.output:
            raise ConfigError("dataset, model, and output must be non-empty")
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.max_new_tokens < 1:
            raise ConfigError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight decay must be >= 0, got {self.weight_decay}")
        for name in ("batch_size", "infer_batch_size", "max_source_length",
                     "max_target_length"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.texts not in EMBED_TEXTS:
            raise ConfigError(f"texts must be one of {EMBED_TEXTS}, got {self.texts!r}")
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split {self.split!r}")


def _expansion_tag(job: ExportJob) -> str:
    target = (
        "marker-joined-context" if job.mode == "expand_full" else "last-utterance"
    )
    return (
        f"ctxgen[{job.model};target={target};"
        f"samples={job.num_samples};top_k={job.top_k}]"
    )


def _run_expansion(job: ExportJob) -> list[str]:
    data = load_dialogues(job.dataset)
    tokenizer = load_tokenizer(job.model)
    model = load_generator(job.model)
    target_text = concat_context if job.mode == "expand_full" else last_utterance
    if job.epochs > 0:
        by_id = {d.id: d.text for d in data.responses}
        pairs = [
            (by_id[rid], target_text(data.contexts[cid]))
            for cid, rid in data.split_pairs("train")
        ]
        finetune_generator(
            model,
            tokenizer,
            pairs,
            epochs=job.epochs,
            learning_rate=job.learning_rate,
            weight_decay=job.weight_decay,
            batch_size=job.batch_size,
            max_source_length=job.max_source_length,
            max_target_length=job.max_target_length,
            seed=job.seed,
        )
    predictions = sample_predictions(
        model,
        tokenizer,
        [d.text for d in data.responses],
        num_samples=job.num_samples,
        top_k=job.top_k,
        max_new_tokens=job.max_new_tokens,
        batch_size=job.infer_batch_size,
        max_source_length=job.max_source_length,
        seed=job.seed,
    )
    tag = _expansion_tag(job)
    records = [
        ExpansionRecord(response_id=doc.id, predictions=preds, generator=tag)
        for doc, preds in zip(data.responses, predictions)
    ]
    write_expansions(records, job.output)
    written = [job.output]
    if job.save_model:
        model.save_pretrained(job.save_model)
        tokenizer.save_pretrained(job.save_model)
        written.append(job.save_model)
    return written


def _run_embed(job: ExportJob) -> list[str]:
    data = load_dialogues(job.dataset)
    tokenizer = load_tokenizer(job.model)
    model = load_encoder(job.model)
    if job.texts == "responses":
        ids = [d.id for d in data.responses]
        texts = [d.text for d in data.responses]
        provenance = f"encoder[{job.model};pool=mean;texts=responses]"
    else:
        pairs = data.split_pairs(job.split)
        ids = [cid for cid, _ in pairs]
        texts = [concat_context(data.contexts[cid]) for cid in ids]
        provenance = (
            f"encoder[{job.model};pool=mean;texts=contexts;split={job.split}]"
        )
    matrix = encode_texts(
        model,
        tokenizer,
        texts,
        batch_size=job.infer_batch_size,
        max_source_length=job.max_source_length,
    )
    write_embeddings(ids, matrix, job.output, provenance=provenance)
    return [job.output]


def run_export(job: ExportJob) -> list[str]:
    """Execute the job and return the paths written."""
    if job.mode == "embed":
        return _run_embed(job)
    return _run_expansion(job)
