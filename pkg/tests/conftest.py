from pathlib import Path

import pytest

from bubblestamp.montecarlo import McConfig, cached_table

# Fixed before any acceptance run; never tuned.
CV_SEED = 20240112


def cv_table(request, T: int, reps: int = 2000):
    """Critical values for a Phillips-window null of length ``T``, cached between sessions."""
    cache = Path(request.config.cache.mkdir("bubblestamp-cv"))
    return cached_table(McConfig(T=T, reps=reps, seed=CV_SEED), cache)


@pytest.fixture(scope="session")
def cv300(request):
    return cv_table(request, 300)


# (criterion, passed, detail) lines collected by the acceptance suite
VERDICTS: list[tuple[str, bool, str]] = []


def verdict(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    VERDICTS.append((criterion, passed, detail))
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in VERDICTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
