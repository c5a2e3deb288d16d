import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sociable import load  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

# filled in by test_acceptance.py, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.si"))


def load_file(name: str):
    path = CORPUS / name
    return load(path.read_text(), str(path))


@pytest.fixture(scope="session")
def corpus():
    """``{file name: {module name: Interface}}`` for every corpus file."""
    return {p.name: load(p.read_text(), str(p)) for p in corpus_files()}


@pytest.fixture(scope="session")
def fire():
    return load_file("fire.si")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
