import pytest

from spinorzeta.coeffs import build_table
from spinorzeta.ingest import gen_sk, gen_tempered, gen_trivial

ACCEPTANCE_LINES = []


def record_acceptance(criterion: str, passed: bool | None, detail: str = "") -> None:
    """Record one gate line; ``passed=None`` marks a criterion skipped for lack of data."""
    status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    line = f"[{status}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def trivial_table():
    return build_table(gen_trivial(20_000), 20_000)


@pytest.fixture(scope="session")
def tempered_form():
    return gen_tempered(7, 200_000)


@pytest.fixture(scope="session")
def tempered_table(tempered_form):
    return build_table(tempered_form, 200_000)


@pytest.fixture(scope="session")
def sk_table():
    return build_table(gen_sk(20_000, seed=3), 20_000)
