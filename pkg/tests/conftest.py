import os
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CACHE = Path(os.environ.get("PHMHT_CACHE", ROOT / ".phmht_cache"))

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture(scope="session")
def default_config():
    from phmht.harness.config import ExperimentConfig

    return ExperimentConfig.load()


@pytest.fixture(scope="session")
def fixture_pool(default_config):
    """Full-size invariant pools, computed once and cached on disk."""
    from phmht.harness.fixtures import precompute_fixtures

    return precompute_fixtures(default_config, CACHE / "fixtures")


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
