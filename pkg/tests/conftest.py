import pytest

from ilclab.constellation import TimeGrid, load_presets
from ilclab.optimizer.common import build_layer_pair

ACCEPTANCE: list[str] = []


def report(name: str, ok: bool, detail: str) -> None:
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def presets():
    return load_presets()


@pytest.fixture(scope="session")
def toy_pair(presets):
    return build_layer_pair(presets["toy-4x4"], presets["toy-3x5"], TimeGrid(n_slots=10), lookahead=10)


@pytest.fixture(scope="session")
def gc_pair(presets):
    return build_layer_pair(presets["globalstar"], presets["celestri"], TimeGrid(n_slots=20), lookahead=20)
