import pytest

from dialexport import ConfigError, ExportJob, ModelError, run_export


def job(**overrides):
    base = dict(mode="embed", dataset="d.jsonl", model="m", output="out.demb")
    base.update(overrides)
    return ExportJob(**base)


class TestJobValidation:
    def test_defaults_follow_the_training_recipe(self):
        j = job(mode="expand_full")
        assert (j.epochs, j.learning_rate, j.weight_decay, j.batch_size) == (
            2,
            2e-5,
            0.01,
            5,
        )
        assert (j.num_samples, j.top_k) == (3, 10)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError, match="unknown mode"):
            job(mode="expand_everything")

    def test_empty_required_fields(self):
        with pytest.raises(ConfigError, match="non-empty"):
            job(model="")

    @pytest.mark.parametrize(
        "field,value",
        [
            ("num_samples", 0),
            ("top_k", 0),
            ("max_new_tokens", 0),
            ("epochs", -1),
            ("learning_rate", 0.0),
            ("weight_decay", -0.5),
            ("batch_size", 0),
            ("infer_batch_size", 0),
            ("max_source_length", 0),
            ("max_target_length", 0),
        ],
    )
    def test_numeric_bounds(self, field, value):
        with pytest.raises(ConfigError):
            job(**{field: value})

    def test_embed_text_choices(self):
        assert job(texts="contexts").texts == "contexts"
        with pytest.raises(ConfigError, match="texts"):
            job(texts="everything")
        with pytest.raises(ConfigError, match="split"):
            job(texts="contexts", split="dev")


class TestRunExportErrors:
    def test_missing_dataset_fails_before_model_load(self, tmp_path):
        j = job(dataset=str(tmp_path / "absent.jsonl"), model="not-checked")
        with pytest.raises(OSError):
            run_export(j)

    def test_unloadable_model(self, dataset_path, tmp_path):
        j = job(dataset=dataset_path, model=str(tmp_path / "no-model-here"))
        with pytest.raises(ModelError, match="cannot load"):
            run_export(j)
