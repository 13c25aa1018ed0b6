import functools

import pytest

from euclid_companion.spectra import compute_spectrum


@functools.lru_cache(maxsize=None)
def cached_spectrum(k: int):
    return compute_spectrum(k)


@pytest.fixture(scope="session")
def spectrum():
    return cached_spectrum


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Call with (label, passed, detail); the line is printed and collected."""
    log = request.config.stash[_ACCEPTANCE]

    def record(label: str, passed: bool | None, detail: str = "") -> None:
        tag = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        line = f"{tag}  {label}  {detail}".rstrip()
        log.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
