import sys
from pathlib import Path

import pytest

# make eventgen importable from any test module
sys.path.insert(0, str(Path(__file__).resolve().parent))

REPO = Path(__file__).resolve().parents[1]
CORPUS = REPO / "corpus"

CORPUS_FILES = [
    "coordinate-email.xml",
    "gps-fix-phone.xml",
    "region-relay.xml",
]


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def corpus_documents() -> dict[str, bytes]:
    return {name: (CORPUS / name).read_bytes() for name in CORPUS_FILES}
