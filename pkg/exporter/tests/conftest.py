import re

import pytest
import torch

from export_testdata import make_dataset_records, write_records


@pytest.fixture(scope="session")
def dataset_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "dataset.jsonl"
    return write_records(make_dataset_records(), path)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """Byte-tokenizer seq2seq checkpoint small enough to fine-tune in tests."""
    from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration

    d = tmp_path_factory.mktemp("tinyt5")
    config = T5Config(
        vocab_size=384,
        d_model=32,
        d_ff=64,
        num_layers=2,
        num_heads=2,
        d_kv=8,
        dropout_rate=0.0,
        decoder_start_token_id=0,
    )
    torch.manual_seed(1234)
    T5ForConditionalGeneration(config).save_pretrained(d)
    ByT5Tokenizer().save_pretrained(d)
    return str(d)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    for plugin in config.pluginmanager.get_plugins():
        fname = getattr(plugin, "__file__", "") or ""
        if (
            fname.endswith("conftest.py")
            and fname != __file__
            and hasattr(plugin, "pytest_terminal_summary")
        ):
            return  # another suite's hook prints the combined block
    outcomes = {}
    for key in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(key, []):
            if getattr(report, "when", "call") != "call" and key != "error":
                continue
            match = re.search(r"test_ac(\d+)_", report.nodeid)
            if match:
                num = int(match.group(1))
                ok = key == "passed"
                outcomes[num] = outcomes.get(num, True) and ok
    if not outcomes:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num in sorted(outcomes):
        verdict = "PASS" if outcomes[num] else "FAIL"
        terminalreporter.write_line(f"  AC-{num}: {verdict}")
