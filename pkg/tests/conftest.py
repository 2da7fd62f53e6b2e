import pytest

from phiqkd.optimizer import default_theta_grid, landmarks, theta_sweep


@pytest.fixture(scope="session")
def theta_rows():
    return theta_sweep(default_theta_grid(600), workers=4)


@pytest.fixture(scope="session")
def sweep_marks(theta_rows):
    return landmarks(theta_rows)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
