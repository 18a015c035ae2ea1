import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# derandomized so repeated runs explore the same examples
settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def rotated(rng, values):
    from coaxial.symmat import random_rotation

    Q = random_rotation(rng)
    A = (Q * np.asarray(values, dtype=float)) @ Q.T
    return 0.5 * (A + A.T)


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
