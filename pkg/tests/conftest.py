from __future__ import annotations

import sys
from pathlib import Path

import pytest

from polorg import parse

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR.parent / "fixtures"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def example_source() -> str:
    return (FIXTURES / "example.pog").read_text(encoding="utf-8")


@pytest.fixture()
def example_model(example_source):
    result = parse(example_source)
    assert result.model is not None, result.diagnostics
    return result.model
