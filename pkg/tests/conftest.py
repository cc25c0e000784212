import re

import pytest

from dialret import Analyzer, Corpus, DialogueContext, ResponseDoc, Utterance


@pytest.fixture
def raw_analyzer():
    # no stemming, no stopwords: tokens survive verbatim for exact fixtures
    return Analyzer(stem=False, stopwords=frozenset())


@pytest.fixture
def fruit_corpus():
    return Corpus(
        [
            ResponseDoc("d1", "apple banana"),
            ResponseDoc("d2", "apple apple"),
            ResponseDoc("d3", "cherry"),
        ]
    )


def make_context(cid: str, *texts: str, speakers=None) -> DialogueContext:
    speakers = speakers or ["unknown"] * len(texts)
    utts = tuple(
        Utterance(text=t, speaker=s, turn=i)
        for i, (t, s) in enumerate(zip(texts, speakers))
    )
    return DialogueContext(id=cid, utterances=utts)


@pytest.fixture
def ctx_factory():
    return make_context


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
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
