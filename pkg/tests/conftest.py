from __future__ import annotations

from importlib import resources

import pytest

from radcompare import (
    LlmConfig,
    Weights,
    judge_entity_context,
    lexicon_extract,
    load_default_lexicon,
    parse_corpus,
)

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def bundled_corpus():
    data = resources.files("radcompare.data").joinpath("synthetic_corpus.jsonl").read_bytes()
    return parse_corpus(data)


@pytest.fixture(scope="session")
def bundled_corpus_path():
    return str(resources.files("radcompare.data").joinpath("synthetic_corpus.jsonl"))


@pytest.fixture(scope="session")
def lexicon():
    return load_default_lexicon()


@pytest.fixture(scope="session")
def lexicon_extractor(lexicon):
    return lambda text: lexicon_extract(lexicon, text)


@pytest.fixture(scope="session")
def mock_config():
    return LlmConfig()


@pytest.fixture(scope="session")
def mock_judge(mock_config):
    def judge(entity, final_text, prelim_text):
        return judge_entity_context(mock_config, entity, final_text, prelim_text).value

    return judge


@pytest.fixture(scope="session")
def default_weights():
    return Weights()


def pytest_runtest_logreport(report):
    # one pass/fail line per acceptance criterion, shown in the final summary
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    _ACCEPTANCE_LINES.append(f"{'PASS' if report.passed else 'FAIL'}: {name}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
