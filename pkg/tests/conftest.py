import numpy as np
import pytest

from loewner_lab.linalg import herm
from loewner_lab.phimap import random_isometry


def random_hermitian(n, rng, lo=-1.0, hi=1.0):
    u = random_isometry(n, n, rng)
    lam = rng.uniform(lo, hi, size=n)
    return herm((u * lam) @ u.conj().T)


def random_spd(n, rng, lo=0.5, hi=3.0):
    return random_hermitian(n, rng, lo, hi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail, seconds):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({seconds:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
