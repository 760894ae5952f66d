import numpy as np
import pytest

from edesign import Design, DesignSpace

_VERDICTS: list[str] = []


@pytest.fixture
def micro_space():
    return DesignSpace.from_regressors(np.array([[1.0, 0.0], [0.0, 1.0], [0.3, 0.3]]), ids=["f1", "f2", "f3"])


@pytest.fixture
def micro_design():
    return Design({"f1": 0.6, "f2": 0.4})


@pytest.fixture
def quad5_space():
    xs = [-1.0, -0.5, 0.0, 0.5, 1.0]
    F = np.array([[1.0, x, x * x] for x in xs])
    return DesignSpace.from_regressors(F, ids=[f"x{x:g}" for x in xs], coords=[(x, 0.0) for x in xs])


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _VERDICTS.append(line)
        with capman.global_and_fixture_disabled():
            print("\n" + line)
        assert ok, line

    return emit


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
