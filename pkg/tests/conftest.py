from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "optosim" / "data"


@pytest.fixture(scope="session")
def corpus_text() -> str:
    return (DATA_DIR / "corpus.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_sl_csv() -> Path:
    return DATA_DIR / "sample_source_levels.csv"


@pytest.fixture(scope="session")
def sample_hydrophone_csv() -> Path:
    return DATA_DIR / "sample_hydrophone.csv"
