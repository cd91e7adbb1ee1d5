"""Shared fixtures and the per-criterion summary printed after the run."""

import numpy as np
import pytest

# criterion number -> (passed, text); filled in by test_acceptance.py
CRITERIA: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        passed, text = CRITERIA[k]
        terminalreporter.write_line(f"CRITERION {k:2d}: {'PASS' if passed else 'FAIL'}  {text}")
