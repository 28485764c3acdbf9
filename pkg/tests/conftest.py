import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _cache_dir(tmp_path_factory, monkeypatch):
    # keep the k_lambda quadrature cache out of the user's home
    monkeypatch.setenv("SDW_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "klcache"))


_ACCEPTANCE: list[str] = []


@pytest.fixture
def accept():
    """Record one acceptance line: ``accept(tag, passed, text)``."""

    def _record(tag: str, passed: bool, text: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {tag}: {text}"
        _ACCEPTANCE.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
