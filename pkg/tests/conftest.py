from pathlib import Path

import pytest

from chm.classifier import ClassifyOptions, classify
from chm.equivalence import ClassStore
from chm.hadamard import CandidateQuad, StructureParams

DATA = Path(__file__).parent / "data"


def occurrences(store):
    """(quadruple, key) for every stored occurrence, in file order."""
    out = []
    for e in sorted(store.entries.values(), key=lambda e: e.representative.order_key()):
        for o in sorted(e.occurrences.values(), key=lambda o: o.order_key()):
            out.append((CandidateQuad.from_texts(o.rows, StructureParams.parse(o.cell)), e.key))
    return out


@pytest.fixture(scope="session")
def extended5():
    return classify(5, ClassifyOptions(cells="extended"))


@pytest.fixture(scope="session")
def extended7():
    return classify(7, ClassifyOptions(cells="extended"))


@pytest.fixture(scope="session")
def default7():
    return classify(7)


@pytest.fixture(scope="session")
def store11():
    """Frozen output of a full default-cell run at p=11."""
    return ClassStore.load(DATA / "p11_default.jsonl")


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
