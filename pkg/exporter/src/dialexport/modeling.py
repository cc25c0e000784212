"""Transformer loading, fine-tuning, sampled generation, and encoding.

Model identifiers resolve through from_pretrained, so both hub names and
local checkpoint directories work. Fine-tuning follows the sequence-to-
sequence recipe used for context generators: AdamW, 2 epochs, learning rate
2e-5, weight decay 0.01, batch size 5. Generation samples with the top-k
token truncation; encoding mean-pools the final hidden layer over non-pad
positions.
"""

from __future__ import annotations

import random

import numpy as np
import torch

from .errors import ModelError


def _quiet() -> None:
    from transformers.utils import logging as hf_logging

    hf_logging.set_verbosity_error()
    hf_logging.disable_progress_bar()


def load_tokenizer(model_id: str):
    from transformers import AutoTokenizer

    _quiet()
    try:
        return AutoTokenizer.from_pretrained(model_id)
    except Exception as exc:
        raise ModelError(f"cannot load tokenizer {model_id!r}: {exc}") from None


def load_generator(model_id: str):
    from transformers import AutoModelForSeq2SeqLM

    _quiet()
    try:
        return AutoModelForSeq2SeqLM.from_pretrained(model_id)
    except Exception as exc:
        raise ModelError(f"cannot load generator model {model_id!r}: {exc}") from None


def load_encoder(model_id: str):
    # encoder-decoder checkpoints contribute only their encoder stack
    from transformers import AutoConfig, AutoModel, T5EncoderModel

    _quiet()
    try:
        config = AutoConfig.from_pretrained(model_id)
        if config.model_type in ("t5", "mt5", "umt5"):
            return T5EncoderModel.from_pretrained(model_id)
        return AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ModelError(f"cannot load encoder model {model_id!r}: {exc}") from None


def _batches(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def finetune_generator(
    model,
    tokenizer,
    pairs: list[tuple[str, str]],
    *,
    epochs: int = 2,
    learning_rate: float = 2e-5,
    weight_decay: float = 0.01,
    batch_size: int = 5,
    max_source_length: int = 512,
    max_target_length: int = 128,
    seed: int = 0,
) -> list[float]:
    """Fine-tune on (source text, target text) pairs; returns per-epoch mean loss."""
    if not pairs:
        raise ModelError("fine-tuning needs at least one training pair")
    torch.manual_seed(seed)
    order_rng = random.Random(seed)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=learning_rate, weight_decay=weight_decay
    )
    model.train()
    epoch_losses = []
    step = 0
    for _ in range(epochs):
        order = list(range(len(pairs)))
        order_rng.shuffle(order)
        total, count = 0.0, 0
        for batch_idx in _batches(order, batch_size):
            sources = [pairs[i][0] for i in batch_idx]
            targets = [pairs[i][1] for i in batch_idx]
            enc = tokenizer(
                sources,
                padding=True,
                truncation=True,
                max_length=max_source_length,
                return_tensors="pt",
            )
            labels = tokenizer(
                targets,
                padding=True,
                truncation=True,
                max_length=max_target_length,
                return_tensors="pt",
            ).input_ids
            labels[labels == tokenizer.pad_token_id] = -100
            loss = model(**enc, labels=labels).loss
            value = loss.detach().item()
            if not np.isfinite(value):
                raise ModelError(f"non-finite loss {value!r} at step {step}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += value
            count += 1
            step += 1
        epoch_losses.append(total / count)
    model.eval()
    return epoch_losses


def sample_predictions(
    model,
    tokenizer,
    texts: list[str],
    *,
    num_samples: int = 3,
    top_k: int = 10,
    max_new_tokens: int = 64,
    batch_size: int = 16,
    max_source_length: int = 512,
    seed: int = 0,
) -> list[tuple[str, ...]]:
    """Sample num_samples decoded sequences per input text, in input order."""
    torch.manual_seed(seed)
    model.eval()
    out: list[tuple[str, ...]] = []
    with torch.no_grad():
        for chunk in _batches(texts, batch_size):
            enc = tokenizer(
                chunk,
                padding=True,
                truncation=True,
                max_length=max_source_length,
                return_tensors="pt",
            )
            generated = model.generate(
                **enc,
                do_sample=True,
                top_k=top_k,
                num_return_sequences=num_samples,
                max_new_tokens=max_new_tokens,
            )
            decoded = tokenizer.batch_decode(generated, skip_special_tokens=True)
            # generate returns the samples for input i in rows
            # i*num_samples .. (i+1)*num_samples - 1
            for i in range(len(chunk)):
                out.append(tuple(decoded[i * num_samples : (i + 1) * num_samples]))
    return out


def encode_texts(
    model,
    tokenizer,
    texts: list[str],
    *,
    batch_size: int = 32,
    max_source_length: int = 512,
) -> np.ndarray:
    """Mean-pooled final-layer embeddings as a float32 (len(texts), dim) array."""
    model.eval()
    rows = []
    with torch.no_grad():
        for chunk in _batches(texts, batch_size):
            enc = tokenizer(
                chunk,
                padding=True,
                truncation=True,
                max_length=max_source_length,
                return_tensors="pt",
            )
            hidden = model(**enc).last_hidden_state
            mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
            rows.append(pooled.to(torch.float32).numpy())
    return np.concatenate(rows, axis=0)
