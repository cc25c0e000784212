import pytest
import torch

from dialexport import (
    ModelError,
    finetune_generator,
    load_generator,
    load_tokenizer,
    sample_predictions,
)
from dialexport.dialogue import DialogueContext, Utterance, load_dialogues
from dialexport.jobs import ExportJob, _expansion_tag


PAIRS = [
    ("driver crash on boot", "how do i fix the driver"),
    ("update the kernel module", "which kernel do you run"),
    ("reset the router first", "my network drops daily"),
    ("check the display cable", "screen stays black"),
    ("reinstall the audio panel", "no sound after update"),
    ("grub needs a rebuild", "boot stops at grub"),
]


class TestFinetune:
    def test_loss_decreases_on_repetitive_data(self, tiny_model_dir):
        # one pair repeated: even a tiny model memorizes it quickly
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        pairs = [PAIRS[0]] * 10
        losses = finetune_generator(
            model, tok, pairs, epochs=3, learning_rate=1e-3, batch_size=5, seed=0
        )
        assert len(losses) == 3
        assert losses[-1] < losses[0]

    def test_same_seed_same_losses(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        results = []
        for _ in range(2):
            model = load_generator(tiny_model_dir)
            results.append(
                finetune_generator(
                    model, tok, list(PAIRS), epochs=2, learning_rate=1e-3, seed=7
                )
            )
        assert results[0] == results[1]

    def test_updates_model_weights(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        before = [p.detach().clone() for p in model.parameters()]
        finetune_generator(model, tok, list(PAIRS), epochs=1, learning_rate=1e-3)
        changed = any(
            not torch.equal(a, b) for a, b in zip(before, model.parameters())
        )
        assert changed

    def test_empty_pairs_rejected(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        with pytest.raises(ModelError, match="at least one"):
            finetune_generator(model, tok, [])

    def test_divergence_reported_with_step(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        with pytest.raises(ModelError, match="non-finite loss"):
            finetune_generator(
                model, tok, list(PAIRS), epochs=3, learning_rate=1e30, seed=0
            )


class TestSampling:
    def test_sample_counts_and_order(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        texts = [p[0] for p in PAIRS]
        preds = sample_predictions(
            model, tok, texts, num_samples=3, max_new_tokens=6, batch_size=4, seed=1
        )
        assert len(preds) == len(texts)
        assert all(len(p) == 3 for p in preds)
        assert all(isinstance(s, str) for p in preds for s in p)

    def test_seeded_sampling_is_reproducible(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        texts = [p[0] for p in PAIRS[:3]]
        a = sample_predictions(model, tok, texts, max_new_tokens=8, seed=5)
        b = sample_predictions(model, tok, texts, max_new_tokens=8, seed=5)
        assert a == b

    def test_num_samples_respected(self, tiny_model_dir):
        tok = load_tokenizer(tiny_model_dir)
        model = load_generator(tiny_model_dir)
        preds = sample_predictions(
            model, tok, ["one input"], num_samples=5, max_new_tokens=4
        )
        assert len(preds[0]) == 5


class TestTargets:
    def test_full_mode_target_is_marker_joined_context(self, dataset_path):
        data = load_dialogues(dataset_path)
        cid, _ = data.split_pairs("train")[0]
        ctx = data.contexts[cid]
        from dialexport import concat_context

        target = concat_context(ctx)
        assert "[T]" in target or "[U]" in target
        assert all(u.text in target for u in ctx.utterances)

    def test_last_utterance_mode_target_is_final_utterance_only(self):
        ctx = DialogueContext(
            "c",
            (
                Utterance("first turn", "seeker"),
                Utterance("second turn", "provider"),
                Utterance("the last words", "seeker"),
            ),
        )
        from dialexport import last_utterance

        assert last_utterance(ctx) == "the last words"

    def test_provenance_tags_name_the_model_and_target(self):
        full = ExportJob(
            mode="expand_full", dataset="d", model="tiny-gen", output="o"
        )
        lu = ExportJob(
            mode="expand_last_utterance", dataset="d", model="tiny-gen", output="o"
        )
        assert _expansion_tag(full) == (
            "ctxgen[tiny-gen;target=marker-joined-context;samples=3;top_k=10]"
        )
        assert _expansion_tag(lu) == (
            "ctxgen[tiny-gen;target=last-utterance;samples=3;top_k=10]"
        )
