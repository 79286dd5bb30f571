import pytest

_RESULTS = {}


class Acceptance:
    def record(self, n: int, ok: bool, detail: str):
        _RESULTS[n] = (bool(ok), detail)
        return ok


@pytest.fixture(scope="session")
def acceptance():
    return Acceptance()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
