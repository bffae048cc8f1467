import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from toricbt.serialize import load_map

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES = []


def fixture_path(name: str) -> str:
    return str(FIXTURES / f"{name}.json")


def load_fixture(name: str):
    return load_map(json.loads((FIXTURES / f"{name}.json").read_text()))


@pytest.fixture
def phi1():
    return load_fixture("phi1")


@pytest.fixture
def phi2():
    return load_fixture("phi2")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
