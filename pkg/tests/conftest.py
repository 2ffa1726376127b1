import time
from contextlib import contextmanager

import pytest

_REPORT: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line per acceptance criterion."""

    @contextmanager
    def record(label: str, limit_s: float | None = None):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit_s is not None:
                assert elapsed < limit_s, f"took {elapsed:.1f} s, limit {limit_s} s"
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            _REPORT.append(f"FAIL  {label}  ({elapsed:.1f} s): {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}")
            raise
        _REPORT.append(f"PASS  {label}  ({elapsed:.1f} s)")

    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
