"""Conformance gate: every emitted file must satisfy the consumer's loaders.

The retrieval engine (dialret) is imported here as the validation oracle;
the exporter itself never imports it, so these tests pin the file contract
from both sides.
"""

import numpy as np
import pytest

import dialret
from dialexport import ExportJob, encode_texts, load_encoder, load_tokenizer, run_export
from dialexport.cli import main


@pytest.fixture(scope="module")
def expansion_file(dataset_path, tiny_model_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("exp") / "expansions.jsonl"
    job = ExportJob(
        mode="expand_full",
        dataset=dataset_path,
        model=tiny_model_dir,
        output=str(out),
        max_new_tokens=6,
        infer_batch_size=8,
        seed=3,
    )
    written = run_export(job)
    assert written == [str(out)]
    return str(out)


class TestExpansionConformance:
    def test_ac9_expansion_file_passes_the_consumer_loader(
        self, expansion_file, dataset_path
    ):
        records = dialret.load_expansions(expansion_file)
        dataset = dialret.load_dataset(dataset_path)
        assert len(records) == len(dataset.corpus)
        assert {r.response_id for r in records} == set(dataset.corpus.ids())

    def test_ac9_records_carry_exactly_three_predictions_by_default(
        self, expansion_file
    ):
        records = dialret.load_expansions(expansion_file)
        assert all(len(r.predictions) == 3 for r in records)

    def test_ac9_generator_records_the_model_identifier(
        self, expansion_file, tiny_model_dir
    ):
        records = dialret.load_expansions(expansion_file)
        assert all(tiny_model_dir in r.generator for r in records)
        assert all("target=marker-joined-context" in r.generator for r in records)

    def test_ac9_expanded_corpus_applies_cleanly(self, expansion_file, dataset_path):
        dataset = dialret.load_dataset(dataset_path)
        records = dialret.load_expansions(expansion_file)
        expanded = dialret.apply_expansions(dataset.corpus, records)
        assert expanded.provenance.startswith("expanded:")
        sample = dataset.corpus.docs[0]
        assert expanded.get(sample.id).text.startswith(sample.text)

    def test_ac9_last_utterance_mode_also_conforms(
        self, dataset_path, tiny_model_dir, tmp_path
    ):
        out = tmp_path / "lu.jsonl"
        job = ExportJob(
            mode="expand_last_utterance",
            dataset=dataset_path,
            model=tiny_model_dir,
            output=str(out),
            epochs=1,
            max_new_tokens=6,
            seed=4,
        )
        run_export(job)
        records = dialret.load_expansions(str(out))
        assert all(len(r.predictions) == 3 for r in records)
        assert all("target=last-utterance" in r.generator for r in records)


class TestEmbeddingConformance:
    def test_ac9_embedding_round_trip_is_bit_exact(
        self, dataset_path, tiny_model_dir, tmp_path
    ):
        out = tmp_path / "resp.demb"
        job = ExportJob(
            mode="embed",
            dataset=dataset_path,
            model=tiny_model_dir,
            output=str(out),
            infer_batch_size=8,
        )
        run_export(job)
        store = dialret.load_embeddings(str(out))
        dataset = dialret.load_dataset(dataset_path)
        assert store.ids == dataset.corpus.ids()
        assert store.dim == 32
        # recompute with the same model and batching: the stored float32
        # payload must match to the last bit
        tok = load_tokenizer(tiny_model_dir)
        model = load_encoder(tiny_model_dir)
        expected = encode_texts(
            model, tok, [d.text for d in dataset.corpus], batch_size=8
        )
        assert store.matrix.tobytes() == expected.tobytes()
        assert tiny_model_dir in store.provenance

    def test_ac9_context_embeddings_conform(
        self, dataset_path, tiny_model_dir, tmp_path
    ):
        out = tmp_path / "ctx.demb"
        job = ExportJob(
            mode="embed",
            dataset=dataset_path,
            model=tiny_model_dir,
            output=str(out),
            texts="contexts",
            split="test",
        )
        run_export(job)
        store = dialret.load_embeddings(str(out))
        dataset = dialret.load_dataset(dataset_path)
        assert store.ids == [c.id for c in dataset.split("test").contexts]
        assert "texts=contexts" in store.provenance
        assert "split=test" in store.provenance

    def test_ac9_embeddings_search_in_the_consumer_engine(
        self, dataset_path, tiny_model_dir, tmp_path
    ):
        # end to end: exported vectors drive the consumer's dense search
        resp_out = tmp_path / "r.demb"
        ctx_out = tmp_path / "c.demb"
        common = dict(dataset=dataset_path, model=tiny_model_dir)
        run_export(ExportJob(mode="embed", output=str(resp_out), **common))
        run_export(
            ExportJob(mode="embed", output=str(ctx_out), texts="contexts", **common)
        )
        responses = dialret.load_embeddings(str(resp_out))
        contexts = dialret.load_embeddings(str(ctx_out))
        ranking = dialret.dense_search(
            responses, contexts.matrix[0].astype(np.float64), k=5, query_id="q"
        )
        assert len(ranking) == 5


class TestCli:
    def test_expand_command(self, dataset_path, tiny_model_dir, tmp_path, capsys):
        out = tmp_path / "cli.jsonl"
        code = main(
            [
                "expand",
                "--dataset", dataset_path,
                "--model", tiny_model_dir,
                "--out", str(out),
                "--epochs", "0",
                "--max-new-tokens", "4",
            ]
        )
        assert code == 0
        assert "wrote expansion records" in capsys.readouterr().out
        assert len(dialret.load_expansions(str(out))) == 15

    def test_embed_command(self, dataset_path, tiny_model_dir, tmp_path, capsys):
        out = tmp_path / "cli.demb"
        code = main(
            [
                "embed",
                "--dataset", dataset_path,
                "--model", tiny_model_dir,
                "--out", str(out),
            ]
        )
        assert code == 0
        assert dialret.load_embeddings(str(out)).dim == 32

    def test_save_model_round_trips(self, dataset_path, tiny_model_dir, tmp_path):
        out = tmp_path / "exp.jsonl"
        saved = tmp_path / "tuned"
        code = main(
            [
                "expand",
                "--dataset", dataset_path,
                "--model", tiny_model_dir,
                "--out", str(out),
                "--epochs", "1",
                "--max-new-tokens", "4",
                "--save-model", str(saved),
            ]
        )
        assert code == 0
        reload_out = tmp_path / "exp2.jsonl"
        code = main(
            [
                "expand",
                "--dataset", dataset_path,
                "--model", str(saved),
                "--out", str(reload_out),
                "--epochs", "0",
                "--max-new-tokens", "4",
            ]
        )
        assert code == 0
        assert len(dialret.load_expansions(str(reload_out))) == 15

    def test_exit_codes(self, dataset_path, tiny_model_dir, tmp_path, capsys):
        ok_args = ["--model", tiny_model_dir, "--out", str(tmp_path / "x.jsonl")]
        assert main(["expand", "--dataset", dataset_path, "--samples", "0", *ok_args]) == 2
        assert "E_CONFIG" in capsys.readouterr().err
        assert main(["expand", "--dataset", str(tmp_path / "gone.jsonl"), *ok_args]) == 3
        assert "E_DATA" in capsys.readouterr().err
        assert (
            main(
                [
                    "embed",
                    "--dataset", dataset_path,
                    "--model", str(tmp_path / "not-a-model"),
                    "--out", str(tmp_path / "x.demb"),
                ]
            )
            == 4
        )
        assert "E_MODEL" in capsys.readouterr().err
