"""Model-backed exporters for dialogue response retrieval experiments.

Fine-tunes a sequence-to-sequence model to predict dialogue contexts from
responses and emits the sampled predictions as expansion records, or exports
mean-pooled transformer embeddings of responses and contexts. Both outputs
follow the retrieval engine's file contracts exactly, so they drop straight
into its expansion and embedding loaders.
"""

from .dialogue import (
    Dataset,
    DialogueContext,
    ResponseDoc,
    Utterance,
    concat_context,
    last_utterance,
    load_dialogues,
)
from .errors import ConfigError, DataError, DialexportError, ModelError
from .jobs import ExportJob, run_export
from .modeling import (
    encode_texts,
    finetune_generator,
    load_encoder,
    load_generator,
    load_tokenizer,
    sample_predictions,
)
from .writers import ExpansionRecord, write_embeddings, write_expansions

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "DialexportError",
    "DialogueContext",
    "ExpansionRecord",
    "ExportJob",
    "ModelError",
    "ResponseDoc",
    "Utterance",
    "concat_context",
    "encode_texts",
    "finetune_generator",
    "last_utterance",
    "load_dialogues",
    "load_encoder",
    "load_generator",
    "load_tokenizer",
    "run_export",
    "sample_predictions",
    "write_embeddings",
    "write_expansions",
]
