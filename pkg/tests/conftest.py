from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_triplets() -> str:
    return (DATA / "fixture_triplets.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_attrs() -> str:
    return (DATA / "fixture_attrs.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_paths():
    return DATA / "fixture_triplets.csv", DATA / "fixture_attrs.csv"
