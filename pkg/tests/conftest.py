import sys

import pytest
from hypothesis import HealthCheck, settings

from stlcausation.suite import gen_suite

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

CORPUS_SEED = 2024


@pytest.fixture(scope="session")
def corpus():
    return gen_suite(CORPUS_SEED, 1000)


@pytest.fixture(scope="session")
def small_corpus():
    return gen_suite(CORPUS_SEED + 1, 150)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
