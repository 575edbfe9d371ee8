import contextlib
import time
from pathlib import Path

import pytest

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "demo"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

_results = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_results] = []


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_results]

    @contextlib.contextmanager
    def record(label):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            lines.append(f"FAIL  {label}  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
            raise
        lines.append(f"PASS  {label}  [{time.perf_counter() - start:.2f}s]")

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_results, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
