import csv
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def read_csv(name: str) -> list[dict[str, str]]:
    with open(DATA / name, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="session")
def published_twins():
    """The 60 rows (p, φ(p-1), φ(p+1), δ) for twin p <= 2000."""
    return read_csv("twin_totients_2000.csv")


@pytest.fixture(scope="session")
def published_exceptional():
    """The first 100 exceptional primes with δ, π₂, π_e and the ratio."""
    return read_csv("first_100_exceptional.csv")


@pytest.fixture(scope="session")
def twins_1e7():
    """Every twin pair p <= 10^7 with totients and counters."""
    from twinbias.scan import scan

    return scan(10**7)


@pytest.fixture(scope="session")
def c2_default():
    from twinbias.constants import twin_prime_constant

    return twin_prime_constant(1e-9)


@pytest.fixture(scope="session")
def bounds_default():
    from twinbias.constants import theorem_bounds

    return theorem_bounds()


# ---------------------------------------------------------------- acceptance report
# Tests tagged @pytest.mark.criterion(n, "title") are grouped and summarised as one
# PASS/FAIL line per criterion at the end of the run.

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "passed": 0})
    if report.failed:
        entry["failed"].append(report.nodeid.split("::")[-1])
    elif report.when == "call" and report.passed:
        entry["passed"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report._criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number:>2}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  [failed: {', '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
