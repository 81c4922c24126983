import time
from contextlib import contextmanager

CRITERIA: list[tuple[int, str, bool, str, float]] = []


@contextmanager
def criterion(number: int, title: str):
    """Record a pass/fail line for an acceptance criterion; ``note`` collects details."""
    note: dict = {}
    start = time.perf_counter()
    try:
        yield note
    except BaseException:
        CRITERIA.append((number, title, False, _fmt(note), time.perf_counter() - start))
        raise
    CRITERIA.append((number, title, True, _fmt(note), time.perf_counter() - start))


def _fmt(note: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in note.items())


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail, seconds in sorted(CRITERIA):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number} {status} [{seconds:.1f} s] {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
