import numpy as np
import pytest

from thompson_games.harness import builtin_config, run_ensemble

# Acceptance verdicts, filled by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}: {detail}"
        return passed

    return record


@pytest.fixture(scope="session")
def pd_ensemble():
    """500 prisoner's-dilemma paths of 10^6 rounds, shared by the acceptance and harness tests."""
    cfg = builtin_config("pd", paths=500, horizon=10**6, base_seed=2024)
    return run_ensemble(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
