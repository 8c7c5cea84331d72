import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polaraut.monomial import parse_code  # noqa: E402

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    def record(name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))


@pytest.fixture
def rm13():
    """The (8,4,4) code of the erasure example."""
    return parse_code("1,x0,x1,x2", 3)


@pytest.fixture
def code16():
    """The (16,7) code of the decomposition-tree example."""
    return parse_code("1,x0,x1,x2,x3,x0*x2,x0*x3", 4)
