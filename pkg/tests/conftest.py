import numpy as np
import pytest

from sharplimit.orientation import PhiEvaluator
from sharplimit.potential import make_asymmetric, make_standard
from sharplimit.reduced import build_diagram
from sharplimit.standing_wave import compute_standing_wave


@pytest.fixture(scope="session")
def W_std():
    return make_standard()


@pytest.fixture(scope="session")
def W_asym():
    return make_asymmetric()


@pytest.fixture(scope="session")
def prof_std(W_std):
    return compute_standing_wave(W_std)


@pytest.fixture(scope="session")
def prof_asym(W_asym):
    return compute_standing_wave(W_asym)


@pytest.fixture(scope="session")
def phi150(prof_std):
    return PhiEvaluator(prof_std, 150.0)


@pytest.fixture(scope="session")
def phi1(prof_std):
    return PhiEvaluator(prof_std, 1.0)


@pytest.fixture(scope="session")
def diag150(phi150):
    return build_diagram(phi150)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


# ----------------------------------------------------------------------------
# acceptance report: one PASS/FAIL line per criterion, repeated in the summary

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    def _report(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] Criterion {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
